"""
Shared helpers for the physprim command line: option types, config loading
and the error-to-exit-code wrapper
"""

import functools
import traceback

import click

from ..core.primitives import PrimitiveObject
from ..utils.data_processing import read_json
from ..utils.error_handling import DataError, DomainError, PhysPrimError, handle_cli_error


class BudgetType(click.ParamType):
    """A positive integer or the word 'exhaustive'."""

    name = 'budget'

    def convert(self, value, param, ctx):
        if isinstance(value, int) or value == 'exhaustive':
            return value
        try:
            number = int(value)
        except (TypeError, ValueError):
            self.fail(f"{value!r} is neither a positive integer nor 'exhaustive'", param, ctx)
        if number < 1:
            self.fail(f"budget must be at least 1, got {number}", param, ctx)
        return number


BUDGET = BudgetType()


def config_option(func):
    return click.option('--config', '-c', 'config_path', type=click.Path(dir_okay=False),
                        help='Experiment configuration JSON (CLI flags override it)')(func)


def seed_option(func):
    return click.option('--seed', '-s', type=click.IntRange(min=0), default=None,
                        help='RNG seed (overrides the config)')(func)


def out_option(help_text):
    def decorator(func):
        return click.option('--out', '-o', type=click.Path(), default=None, help=help_text)(func)
    return decorator


def read_object(path) -> PrimitiveObject:
    """PrimitiveObject from a JSON file written by ``PrimitiveObject.to_dict``."""
    data = read_json(path)
    try:
        return PrimitiveObject.from_dict(data)
    except (DomainError, AttributeError, TypeError) as e:
        raise DataError(f"Invalid object description: {e}", path=str(path))


def pipeline_command(func):
    """
    Run a command body and turn physprim errors into the documented exit codes.

    2 configuration error, 3 data error, 4 numerical failure. Tracebacks
    are shown in verbose mode.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        verbose = (ctx.obj or {}).get('verbose', False)
        try:
            return func(*args, **kwargs)
        except (PhysPrimError, OSError) as e:
            analysis = handle_cli_error(e)
            click.echo(f"❌ {analysis['description']}: {e}", err=True)
            if analysis['suggested_action'] != 'none':
                click.echo(f"💡 Suggested action: {analysis['suggested_action'].replace('_', ' ')}", err=True)
            if verbose:
                click.echo(traceback.format_exc(), err=True)
            ctx.exit(analysis['exit_code'])
    return wrapper
