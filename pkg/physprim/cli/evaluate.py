"""
Evaluation command: metrics report for an inference results file
"""

import click

from .utils import config_option, out_option, pipeline_command
from ..dataset.records import load_dataset
from ..evaluation.report import evaluate_results, format_report, write_report
from ..utils.config import load_experiment_config
from ..utils.data_processing import read_json


@click.command('eval')
@click.argument('results_file', required=False, type=click.Path(dir_okay=False))
@config_option
@click.option('--dataset', '-d', 'dataset_dir', type=click.Path(file_okay=False), default=None,
              help='Dataset directory (default: the one recorded in the results)')
@out_option('Report JSON (overrides report_path; a .txt table is written next to it)')
@click.pass_context
@pipeline_command
def eval_command(ctx, results_file, config_path, dataset_dir, out):
    """
    📊 Score inference results: top-k accuracy, RMSE and baselines.

    RESULTS_FILE defaults to the config's results_path.

    \b
    Examples:
      physprim eval results.json
      physprim eval --config configs/smoke.json
    """
    verbose = (ctx.obj or {}).get('verbose', False)
    config = load_experiment_config(config_path)
    results = read_json(results_file or config.results_path)
    dataset = load_dataset(dataset_dir or results.get('dataset') or config.dataset_dir)

    report = evaluate_results(results, dataset, verbose=verbose)
    path = write_report(report, out or config.report_path)
    click.echo(format_report(report), nl=False)
    click.echo(f"💾 Report saved to {path}")
