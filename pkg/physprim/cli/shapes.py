"""
Shape command: fit cuboid primitives to a voxel grid
"""

import click

from .utils import out_option, pipeline_command, read_object
from ..shapefit.fitting import FitConfig, fit_primitives
from ..shapefit.scoring import f1_score
from ..utils.data_processing import write_json
from ..voxels.binvox import load_binvox


@click.command('fit')
@click.argument('binvox_file', type=click.Path(exists=True, dir_okay=False))
@out_option('Write the fitted primitives as JSON')
@click.option('--truth', '-t', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Ground-truth object JSON; prints F1 at IoU 0.5')
@click.option('--min-block-volume', type=click.IntRange(min=1), default=8, show_default=True,
              help='Smallest segment kept as its own block (cells)')
@click.option('--merge-tolerance', type=click.IntRange(min=0), default=1, show_default=True,
              help='Largest layer-outline change (cells) inside one block')
@click.pass_context
@pipeline_command
def fit_command(ctx, binvox_file, out, truth, min_block_volume, merge_tolerance):
    """
    📐 Decompose a voxelized tower into axis-aligned cuboids.

    \b
    Examples:
      physprim fit voxels/tower_0000.binvox
      physprim fit tower.binvox --truth object.json -o fitted.json
    """
    verbose = (ctx.obj or {}).get('verbose', False)
    grid = load_binvox(binvox_file)
    shape = fit_primitives(grid, FitConfig(min_block_volume=min_block_volume,
                                           merge_tolerance=merge_tolerance), verbose=verbose)

    click.echo(f"📐 {len(shape)} primitives:")
    for index, primitive in enumerate(shape):
        size = ", ".join(f"{v:.4f}" for v in primitive.size)
        center = ", ".join(f"{v:.4f}" for v in primitive.translation)
        click.echo(f"   {index}: size ({size}) at ({center})")

    if truth is not None:
        click.echo(f"📊 F1 @ IoU 0.5: {f1_score(shape, read_object(truth)):.4f}")
    if out:
        write_json(out, shape.to_dict())
        click.echo(f"💾 Saved fitted primitives to {out}")
