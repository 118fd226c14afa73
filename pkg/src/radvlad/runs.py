"""Run-directory persistence: ``<run>/scans/NNNNNN.prsn`` plus ``<run>/poses.csv``."""

from __future__ import annotations

from pathlib import Path

from .errors import IngestError
from .scans import Trajectory, TrajectoryPoses, load_poses, read_prsn, write_poses, write_prsn

SCANS_SUBDIR = "scans"


def scan_filename(index: int) -> str:
    return f"{index:06d}.prsn"


def write_trajectory(run_dir, scans, poses: TrajectoryPoses | None = None) -> Path:
    run_dir = Path(run_dir)
    scan_dir = run_dir / SCANS_SUBDIR
    scan_dir.mkdir(parents=True, exist_ok=True)
    for i, scan in enumerate(scans):
        write_prsn(scan_dir / scan_filename(i), scan)
    if poses is not None:
        write_poses(run_dir / "poses.csv", poses)
    return run_dir


def load_trajectory(run_dir, require_poses: bool = True) -> Trajectory:
    run_dir = Path(run_dir)
    scan_dir = run_dir / SCANS_SUBDIR
    if not scan_dir.is_dir():
        raise IngestError(f"{run_dir}: no '{SCANS_SUBDIR}' directory")
    paths = sorted(scan_dir.glob("*.prsn"))
    if not paths:
        raise IngestError(f"{scan_dir}: no .prsn scans found")
    scans = [read_prsn(p) for p in paths]
    poses_path = run_dir / "poses.csv"
    if poses_path.exists():
        poses = load_poses(poses_path)
    elif require_poses:
        raise IngestError(f"{run_dir}: missing poses.csv")
    else:
        poses = TrajectoryPoses([], [], [])
    return Trajectory(name=run_dir.name, scans=scans, poses=poses)
