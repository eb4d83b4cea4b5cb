"""Shipped fixtures: synthetic reference trajectories and kinematic models.

Two whole-body reference paths are provided, both slow enough to sit well
inside typical velocity limits:

* ``reach_arc``   - tabletop reaching sweep with mild base sway;
* ``ground_pick`` - squat-and-reach profile that lowers the torso and right
                     end-effector toward the floor and closes the gripper.

The CSV files under ``rtgsim/data`` are generated by :func:`write_fixture_files`
and checked in; loading them reproduces the builders exactly.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .action_model import WholeBodyAction, WholeBodyPath, read_trajectory_csv, write_trajectory_csv
from .kinematics import default_whole_body_model, format_model, planar_chain_model
from .pose_math import Pose, rotx, roty, rotz


def fixture_path(name: str) -> Path:
    """Absolute path of a shipped data file."""
    path = resources.files("rtgsim").joinpath("data", name)
    return Path(str(path))


def build_reach_arc(duration: float = 32.0, dt: float = 0.05) -> WholeBodyPath:
    n = int(round(duration / dt)) + 1
    frames = []
    for k in range(n):
        t = k * dt
        sway = 0.04 * np.sin(2.0 * np.pi * t / 16.0)
        eel_p = np.array(
            [
                0.45 + 0.15 * np.sin(2.0 * np.pi * t / 11.0),
                0.25 + 0.10 * np.sin(2.0 * np.pi * t / 9.0 + 0.7),
                0.95 + 0.12 * np.sin(2.0 * np.pi * t / 13.0 + 1.9),
            ]
        )
        eer_p = np.array(
            [
                0.45 + 0.16 * np.sin(2.0 * np.pi * t / 10.0 + 2.1),
                -0.25 + 0.09 * np.sin(2.0 * np.pi * t / 8.0 + 0.3),
                0.95 + 0.11 * np.sin(2.0 * np.pi * t / 12.0 + 4.0),
            ]
        )
        eel_r = rotz(0.25 * np.sin(2.0 * np.pi * t / 14.0)) @ roty(
            0.20 * np.sin(2.0 * np.pi * t / 17.0 + 1.0)
        )
        eer_r = rotz(-0.22 * np.sin(2.0 * np.pi * t / 15.0 + 0.5)) @ rotx(
            0.18 * np.sin(2.0 * np.pi * t / 19.0)
        )
        frames.append(
            WholeBodyAction(
                base=[sway, 0.03 * np.sin(2.0 * np.pi * t / 21.0), 0.06 * np.sin(2.0 * np.pi * t / 18.0)],
                torso=[
                    0.08 * np.sin(2.0 * np.pi * t / 15.0),
                    0.10 * np.sin(2.0 * np.pi * t / 13.0 + 0.4),
                    0.10 * np.sin(2.0 * np.pi * t / 16.0 + 1.1),
                    0.06 * np.sin(2.0 * np.pi * t / 12.0 + 2.0),
                ],
                ee_left=Pose(eel_p, eel_r),
                ee_right=Pose(eer_p, eer_r),
                grip_left=0.5 + 0.2 * np.sin(2.0 * np.pi * t / 9.0),
                grip_right=0.5 + 0.2 * np.sin(2.0 * np.pi * t / 11.0 + 1.0),
                head=[0.15 * np.sin(2.0 * np.pi * t / 14.0), 0.10 * np.sin(2.0 * np.pi * t / 10.0)],
            )
        )
    return WholeBodyPath(frames, t0=0.0, dt=dt)


def build_ground_pick(duration: float = 28.0, dt: float = 0.05) -> WholeBodyPath:
    n = int(round(duration / dt)) + 1
    frames = []
    for k in range(n):
        t = k * dt
        phase = np.clip(t / duration, 0.0, 1.0)
        squat = 0.5 * (1.0 - np.cos(2.0 * np.pi * phase))  # 0 -> 1 -> 0
        approach = 0.35 * 0.5 * (1.0 - np.cos(np.pi * np.clip(2.0 * phase, 0.0, 1.0)))
        eer_z = 0.95 - 0.55 * squat
        grip = 0.8 - 0.6 * squat
        frames.append(
            WholeBodyAction(
                base=[approach, 0.0, 0.05 * np.sin(2.0 * np.pi * phase)],
                torso=[0.0, 0.45 * squat, 0.75 * squat, 0.35 * squat],
                ee_left=Pose([0.30, 0.24, 0.95 - 0.10 * squat], rotz(0.1 * squat)),
                ee_right=Pose(
                    [0.40 + 0.15 * squat, -0.22 + 0.05 * squat, eer_z],
                    roty(0.6 * squat),
                ),
                grip_left=0.7,
                grip_right=float(np.clip(grip, 0.0, 1.0)),
                head=[0.0, 0.35 * squat],
            )
        )
    return WholeBodyPath(frames, t0=0.0, dt=dt)


FIXTURE_BUILDERS = {
    "reach_arc": build_reach_arc,
    "ground_pick": build_ground_pick,
}


def load_reference(name: str) -> WholeBodyPath:
    """Load a shipped reference trajectory by name (from its CSV)."""
    if name not in FIXTURE_BUILDERS:
        raise ValueError(f"unknown reference fixture {name!r}; have {sorted(FIXTURE_BUILDERS)}")
    times, frames = read_trajectory_csv(fixture_path(f"{name}.csv"))
    dt = float(times[1] - times[0])
    return WholeBodyPath(frames, t0=float(times[0]), dt=dt)


def write_fixture_files(out_dir) -> list[Path]:
    """Regenerate all shipped data files into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, builder in FIXTURE_BUILDERS.items():
        path = out_dir / f"{name}.csv"
        ref = builder()
        times = ref.t0 + np.arange(len(ref.frames)) * ref.dt
        write_trajectory_csv(path, ref.frames, times)
        written.append(path)
    models = {
        "whole_body.model": default_whole_body_model(),
        "planar_1link.model": planar_chain_model([1.0]),
        "planar_2link.model": planar_chain_model([1.0, 1.0]),
    }
    for fname, model in models.items():
        path = out_dir / fname
        path.write_text(format_model(model))
        written.append(path)
    return written


if __name__ == "__main__":  # regenerate shipped data in place
    print("\n".join(str(p) for p in write_fixture_files(Path(__file__).parent / "data")))
