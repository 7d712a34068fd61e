"""
Tracking command: pose trajectory from a keypoint CSV
"""

from pathlib import Path

import click

from .utils import out_option, pipeline_command
from ..core.poses import Pose, write_trajectory_csv
from ..tracking.extraction import SIMULATION_RATE, extract_trajectory
from ..tracking.keypoints import read_intrinsics, read_keypoints_csv, read_model_points
from ..utils.data_processing import read_json, write_json
from ..utils.error_handling import DataError, DomainError


def read_extrinsics(path) -> Pose:
    """World-to-camera pose from ``{"position": [...], "orientation": [w, x, y, z]}``."""
    data = read_json(path)
    try:
        return Pose(tuple(data['position']), tuple(data.get('orientation', (1.0, 0.0, 0.0, 0.0))))
    except (KeyError, TypeError, DomainError) as e:
        raise DataError(f"Invalid extrinsics: {e}", path=str(path))


@click.command('extract-traj')
@click.argument('keypoints_csv', type=click.Path(exists=True, dir_okay=False))
@click.option('--model', '-m', 'model_json', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Object-frame 3D positions of the tracked points (JSON)')
@click.option('--intrinsics', '-k', 'intrinsics_json', type=click.Path(exists=True, dir_okay=False),
              required=True, help='Camera intrinsics JSON {fx, fy, cx, cy}')
@click.option('--extrinsics', '-e', 'extrinsics_json', type=click.Path(exists=True, dir_okay=False),
              default=None, help='World-to-camera pose JSON; camera-frame poses if omitted')
@click.option('--frame-rate', type=click.FloatRange(min=0.0, min_open=True), default=SIMULATION_RATE,
              show_default=True, help='Video frame rate in Hz')
@click.option('--interaction', '-i', type=click.IntRange(0, 3), default=None,
              help='Interaction index recorded on the trajectory')
@click.option('--parallel/--sequential', default=False,
              help='Solve frames independently instead of warm-starting from the previous pose')
@out_option('Trajectory CSV (default: KEYPOINTS_CSV with a .traj.csv suffix)')
@click.pass_context
@pipeline_command
def extract_command(ctx, keypoints_csv, model_json, intrinsics_json, extrinsics_json,
                    frame_rate, interaction, parallel, out):
    """
    🎥 Reconstruct a pose trajectory from tracked 2D keypoints.

    Keypoint CSV columns: frame,point_id,u,v,visible. The first frame's
    point ids define the correspondence with the model points.

    \b
    Examples:
      physprim extract-traj keypoints.csv -m corners.json -k camera.json
      physprim extract-traj keypoints.csv -m corners.json -k camera.json -e extrinsics.json -o push0.csv
    """
    verbose = (ctx.obj or {}).get('verbose', False)
    frames = read_keypoints_csv(keypoints_csv)
    model_points = read_model_points(model_json)
    intrinsics = read_intrinsics(intrinsics_json)
    extrinsics = read_extrinsics(extrinsics_json) if extrinsics_json else None

    result = extract_trajectory(frames, model_points, intrinsics, extrinsics=extrinsics,
                                frame_rate=frame_rate, parallel=parallel,
                                interaction_id=interaction, verbose=verbose)

    path = Path(out) if out else Path(keypoints_csv).with_suffix('.traj.csv')
    write_trajectory_csv(result.trajectory, path)
    if result.errors:
        click.echo(f"⚠️ {len(result.errors)} frames could not be solved and were interpolated")
        write_json(path.with_suffix('.errors.json'),
                   [{'frame': e.frame, 'message': e.message} for e in result.errors])
    click.echo(f"✅ Extracted {len(result.trajectory)} poses from {len(frames)} frames to {path}")
