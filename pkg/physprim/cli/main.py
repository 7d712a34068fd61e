"""
Main CLI entry point for physprim
"""

import click

from .data import gen_command, simulate_command, voxelize_command
from .evaluate import eval_command
from .inference import infer_command, sweep_command
from .shapes import fit_command
from .tracking import extract_command
from .. import __version__
from ..utils.config import set_global_config


@click.group()
@click.version_option(
    version=__version__,
    prog_name="physprim",
    message="%(prog)s %(version)s - Physical primitive decomposition toolkit"
)
@click.option('--verbose', '-v', is_flag=True,
              help='Enable verbose output and full tracebacks')
@click.option('--workers', '-w', type=click.IntRange(min=1), default=None,
              help='Worker threads for simulations (global max_workers)')
@click.option('--progress/--no-progress', default=True,
              help='Show progress bars for batch work')
@click.pass_context
def cli(ctx, verbose, workers, progress):
    """
    🧱 physprim - Physical primitive decomposition toolkit

    Generate block towers, simulate pushes, fit cuboids to voxels and infer
    per-part densities from trajectories.

    \b
    Pipeline:
      physprim gen --config configs/smoke.json      # dataset
      physprim infer --config configs/smoke.json    # results.json
      physprim eval --config configs/smoke.json     # report.json + report.txt

    \b
    Exit codes: 0 success, 2 configuration error, 3 data error,
    4 numerical failure.

    \b
    Use 'physprim COMMAND --help' for detailed help on any command.
    """
    ctx.ensure_object(dict)
    ctx.obj['verbose'] = verbose
    settings = {'verbose': verbose, 'progress_bar': progress}
    if workers is not None:
        settings['max_workers'] = workers
    set_global_config(**settings)

    if verbose:
        click.echo("🚀 physprim CLI - Verbose mode enabled")


@cli.command()
def info():
    """Show package information and capabilities."""
    import physprim

    physprim.info()


cli.add_command(gen_command)
cli.add_command(simulate_command)
cli.add_command(voxelize_command)
cli.add_command(fit_command)
cli.add_command(infer_command)
cli.add_command(sweep_command)
cli.add_command(eval_command)
cli.add_command(extract_command)


@cli.command(name='help', hidden=True)
@click.argument('command_name', required=False)
@click.pass_context
def help_command(ctx, command_name):
    """Show help for a specific command."""
    if command_name:
        cmd = cli.get_command(ctx, command_name)
        if cmd:
            click.echo(cmd.get_help(ctx))
        else:
            click.echo(f"No such command: {command_name}")
    else:
        click.echo(cli.get_help(ctx))


if __name__ == '__main__':
    cli()
