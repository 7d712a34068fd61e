"""
Data commands: dataset generation, single-object simulation and voxelization
"""

from pathlib import Path

import click

from .utils import config_option, out_option, pipeline_command, read_object, seed_option
from ..core.poses import write_trajectory_csv
from ..dataset.builder import generate_dataset, tower_block_count
from ..physics.simulator import simulate
from ..towers.generator import assign_densities, generate_tower
from ..utils.config import load_experiment_config
from ..utils.data_processing import write_json
from ..voxels.binvox import save_binvox
from ..voxels.grid import voxelize


@click.command('gen')
@config_option
@seed_option
@out_option('Dataset directory (overrides dataset_dir)')
@click.option('--num-towers', '-n', type=click.IntRange(min=1), default=None,
              help='Number of towers (overrides tower.num_towers)')
@click.option('--num-blocks', '-b', type=click.IntRange(2, 5), default=None,
              help='Blocks per tower (overrides tower.num_blocks)')
@click.pass_context
@pipeline_command
def gen_command(ctx, config_path, seed, out, num_towers, num_blocks):
    """
    🏗️ Generate a synthetic block-tower dataset.

    Writes index.jsonl, manifest.json, one binvox file per tower and four
    trajectory CSVs per density configuration. The same config and seed
    always produce byte-identical files.

    \b
    Examples:
      physprim gen --config configs/smoke.json
      physprim gen --seed 7 --num-towers 10 --num-blocks 2 --out data/two_block
    """
    verbose = (ctx.obj or {}).get('verbose', False)
    config = load_experiment_config(config_path, seed=seed)
    if num_towers is not None:
        config.tower.num_towers = num_towers
    if num_blocks is not None:
        config.tower.num_blocks = num_blocks
    out_dir = Path(out or config.dataset_dir)

    manifest = generate_dataset(config, out_dir, verbose=verbose)
    click.echo(f"✅ Generated {manifest['num_records']} records in {out_dir} (seed {config.seed})")


@click.command('simulate')
@click.argument('object_json', required=False, type=click.Path(exists=True, dir_okay=False))
@config_option
@seed_option
@out_option('Output directory for the trajectory CSVs')
@click.option('--interaction', '-i', type=click.IntRange(0, 3), multiple=True,
              help='Interaction index (repeatable; all four if omitted)')
@click.pass_context
@pipeline_command
def simulate_command(ctx, object_json, config_path, seed, out, interaction):
    """
    ⚙️ Simulate an object under the canonical interactions.

    OBJECT_JSON describes primitives with density slots. Without it a tower
    is generated from the seed and saved as object.json next to the
    trajectories.

    \b
    Examples:
      physprim simulate object.json --out runs/object
      physprim simulate --seed 3 -i 0 -i 2 --out runs/seed3
    """
    verbose = (ctx.obj or {}).get('verbose', False)
    config = load_experiment_config(config_path, seed=seed)
    out_dir = Path(out or 'trajectories')

    if object_json is not None:
        obj = read_object(object_json)
    else:
        spec = config.tower_spec(tower_block_count(config, 0), rng_seed=[config.seed, 0])
        tower, _ = generate_tower(spec)
        obj = assign_densities(tower, seed=[config.seed, 0, 1], num_configs=1)[0]
        write_json(out_dir / 'object.json', obj.to_dict())
        if verbose:
            click.echo(f"🏗️ Generated a {len(obj)}-block tower with slots {obj.slots}")

    sim_config = config.sim_config()
    indices = sorted(set(interaction)) or [0, 1, 2, 3]
    for index in indices:
        trajectory = simulate(obj, index, sim_config)
        path = write_trajectory_csv(trajectory, out_dir / f"interaction_{index}.csv")
        if verbose:
            click.echo(f"💾 {path}")
    click.echo(f"✅ Simulated {len(indices)} interactions into {out_dir}")


@click.command('voxelize')
@click.argument('object_json', type=click.Path(exists=True, dir_okay=False))
@out_option('Output binvox file (default: OBJECT_JSON with .binvox suffix)')
@click.option('--resolution', '-r', type=int, default=None,
              help='Grid resolution, a power of two (global voxel_resolution if omitted)')
@click.pass_context
@pipeline_command
def voxelize_command(ctx, object_json, out, resolution):
    """
    🧊 Voxelize an object description into a binvox file.

    \b
    Examples:
      physprim voxelize object.json
      physprim voxelize object.json -r 64 -o object_64.binvox
    """
    obj = read_object(object_json)
    grid = voxelize(obj, resolution)
    path = save_binvox(grid, out or Path(object_json).with_suffix('.binvox'))
    click.echo(f"✅ Wrote {grid.resolution}³ grid with {grid.count()} occupied cells to {path}")
