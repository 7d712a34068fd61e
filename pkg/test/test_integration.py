"""
End-to-end pipeline tests for physprim
"""
import json

import pytest
from click.testing import CliRunner

from physprim.cli import cli


def run(*args):
    result = CliRunner().invoke(cli, ['--no-progress', *map(str, args)])
    assert result.exit_code == 0, result.output
    return result


@pytest.mark.integration
class TestPipeline:
    """Test gen, infer and eval chained through the command line."""

    def test_gen_infer_eval(self, smoke_config_file, tmp_path):
        """The smoke pipeline produces a complete report."""
        run('gen', '--config', smoke_config_file)
        run('infer', '--config', smoke_config_file)
        result = run('eval', '--config', smoke_config_file)

        report = json.loads((tmp_path / "report.json").read_text())
        assert report['counts']['tasks'] == 2
        assert "mean F1" in result.output
        assert "mean F1" in (tmp_path / "report.txt").read_text()

    def test_shape_and_phys_pipeline(self, smoke_config_file, tmp_path):
        """Joint shape and density inference runs through to a report."""
        run('gen', '--config', smoke_config_file)
        run('infer', '--config', smoke_config_file, '--mode', 'shape+phys', '-o', tmp_path / "joint.json")
        run('eval', tmp_path / "joint.json", '--config', smoke_config_file, '-o', tmp_path / "joint_report.json")

        results = json.loads((tmp_path / "joint.json").read_text())
        assert results['mode'] == 'shape+phys'
        assert (tmp_path / "joint_report.txt").exists()

    def test_reproducible(self, smoke_config_file, tmp_path):
        """The same config and seed give byte-identical results."""
        run('gen', '--config', smoke_config_file)
        run('infer', '--config', smoke_config_file, '-o', tmp_path / "first.json")
        run('infer', '--config', smoke_config_file, '-o', tmp_path / "second.json")
        assert (tmp_path / "first.json").read_bytes() == (tmp_path / "second.json").read_bytes()

    @pytest.mark.slow
    def test_standard_horizon(self, smoke_config_file, smoke_config_data, tmp_path):
        """The pipeline also runs at the standard 256-step horizon."""
        smoke_config_data["sim"] = {}
        smoke_config_data['budget'] = 2
        smoke_config_file.write_text(json.dumps(smoke_config_data))
        run('gen', '--config', smoke_config_file)
        run('infer', '--config', smoke_config_file)
        run('eval', '--config', smoke_config_file)
        assert (tmp_path / "report.json").exists()
