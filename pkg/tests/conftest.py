"""Shared builders for synthetic swings and files."""

from __future__ import annotations

import json

import numpy as np
import pytest

from swinglab.pose_io import (
    BallRecord,
    BBox,
    ClubType,
    Joint,
    JointName,
    SwingEvent,
    SwingSequence,
    View,
)

# A plausible face-on address pose in bbox-width units (y down, lead side
# at larger x). Stride 0.40, shoulder width 0.24, hip width 0.16.
ADDRESS_POSE: dict[JointName, tuple[float, float]] = {
    JointName.NOSE: (0.50, 0.16),
    JointName.L_EYE: (0.53, 0.14),
    JointName.R_EYE: (0.47, 0.14),
    JointName.L_EAR: (0.55, 0.17),
    JointName.R_EAR: (0.45, 0.17),
    JointName.L_SHOULDER: (0.62, 0.35),
    JointName.R_SHOULDER: (0.38, 0.35),
    JointName.L_ELBOW: (0.58, 0.52),
    JointName.R_ELBOW: (0.42, 0.52),
    JointName.L_WRIST: (0.52, 0.68),
    JointName.R_WRIST: (0.48, 0.68),
    JointName.L_HIP: (0.58, 0.78),
    JointName.R_HIP: (0.42, 0.78),
    JointName.L_KNEE: (0.60, 1.05),
    JointName.R_KNEE: (0.40, 1.05),
    JointName.L_ANKLE: (0.70, 1.32),
    JointName.R_ANKLE: (0.30, 1.32),
}


def joint_set(pose: dict[JointName, tuple[float, float]], confidence: float = 0.9):
    return {
        name: Joint(name, float(x), float(y), confidence)
        for name, (x, y) in pose.items()
    }


def make_sequence(
    swing_id: str = "s1",
    golfer_id: str = "g1",
    view: View = View.FACEON,
    bbox: BBox = BBox(0.0, 0.0, 1.0, 1.5),
    event_poses: list[dict[JointName, tuple[float, float]]] | None = None,
) -> SwingSequence:
    """A sequence from 8 explicit poses (default: address pose repeated)."""
    if event_poses is None:
        event_poses = [ADDRESS_POSE] * 8
    assert len(event_poses) == 8
    return SwingSequence(
        swing_id=swing_id,
        golfer_id=golfer_id,
        view=view,
        bbox=bbox,
        events=tuple(joint_set(p) for p in event_poses),
    )


def random_sequence(
    rng: np.random.Generator,
    swing_id: str = "r1",
    view: View = View.FACEON,
    bbox: BBox = BBox(0.0, 0.0, 1.0, 1.5),
) -> SwingSequence:
    """Joints jittered around the address template; degenerate configs are
    measure-zero and the jitter keeps strides/segments well away from 0."""
    events = []
    for _ in range(8):
        pose = {
            name: (x + rng.uniform(-0.08, 0.08), y + rng.uniform(-0.08, 0.08))
            for name, (x, y) in ADDRESS_POSE.items()
        }
        events.append(pose)
    return make_sequence(swing_id=swing_id, view=view, bbox=bbox, event_poses=events)


def sequence_json_obj(
    swing_id: str = "s1",
    golfer_id: str = "g1",
    view: str = "FACEON",
    bbox: tuple[float, float, float, float] = (100.0, 50.0, 200.0, 320.0),
    jitter: float = 0.0,
    rng: np.random.Generator | None = None,
) -> dict:
    """A raw keypoint JSON object built from the address template."""
    bx, by, w, _ = bbox
    events = {}
    for event in SwingEvent:
        triples = []
        for name in JointName:
            x, y = ADDRESS_POSE[name]
            if jitter and rng is not None:
                x += rng.uniform(-jitter, jitter)
                y += rng.uniform(-jitter, jitter)
            triples.append([bx + x * w, by + y * w, 0.9])
        events[event.key] = triples
    return {
        "swing_id": swing_id,
        "golfer_id": golfer_id,
        "view": view,
        "bbox": list(bbox),
        "events": events,
    }


def write_keypoints(path, objs) -> str:
    path.write_text(json.dumps(objs), encoding="utf-8")
    return str(path)


def make_ball(
    swing_id: str = "s1",
    direction_angle: float = 0.0,
    spin_axis: float = 0.0,
    ball_speed: float = 150.0,
    lr_distance_out: float = 0.0,
    club: ClubType = ClubType.W1,
) -> BallRecord:
    return BallRecord(
        swing_id=swing_id,
        club_type=club,
        distance=250.0,
        carry=240.0,
        lr_distance_out=lr_distance_out,
        direction_angle=direction_angle,
        spin_axis=spin_axis,
        ball_speed=ball_speed,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
