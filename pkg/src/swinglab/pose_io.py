"""Ingestion and validation of keypoint sequences and ball records.

File formats
------------
Keypoint JSON: a top-level array of swing objects::

    {
      "swing_id": "s001",
      "golfer_id": "g01",
      "view": "FACEON",            // or "DTL"
      "bbox": [x, y, width, height],
      "events": {
        "address":        [[x, y, confidence] * 17],
        "takeaway":       ...,
        "backswing":      ...,
        "top":            ...,
        "downswing":      ...,
        "impact":         ...,
        "follow_through": ...,
        "finish":         ...
      }
    }

Joint triples follow the fixed 17-joint order of ``JointName``.

Ball CSV: header row (exact, lowercase)::

    swing_id,club_type,distance,carry,lr_distance_out,direction_angle,spin_axis,ball_speed

Parsing and normalization are pure functions over immutable inputs; files can
be processed in parallel without shared state.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateBBox,
    DuplicateSwingId,
    EmptyDataset,
    InvariantViolation,
    MalformedFile,
    SchemaViolation,
    UnknownClubType,
)
from .geometry import Point2

logger = logging.getLogger(__name__)


class JointName(enum.IntEnum):
    """The 17 pose joints, in fixed serialization order."""

    NOSE = 0
    L_EYE = 1
    R_EYE = 2
    L_EAR = 3
    R_EAR = 4
    L_SHOULDER = 5
    R_SHOULDER = 6
    L_ELBOW = 7
    R_ELBOW = 8
    L_WRIST = 9
    R_WRIST = 10
    L_HIP = 11
    R_HIP = 12
    L_KNEE = 13
    R_KNEE = 14
    L_ANKLE = 15
    R_ANKLE = 16

    @property
    def label(self) -> str:
        return _JOINT_LABELS[self]

    @property
    def mirrored(self) -> "JointName":
        """The opposite-side joint (identity for the nose)."""
        return _MIRROR_JOINT[self]


_JOINT_LABELS = {
    JointName.NOSE: "Nose",
    JointName.L_EYE: "L_Eye",
    JointName.R_EYE: "R_Eye",
    JointName.L_EAR: "L_Ear",
    JointName.R_EAR: "R_Ear",
    JointName.L_SHOULDER: "L_Shoulder",
    JointName.R_SHOULDER: "R_Shoulder",
    JointName.L_ELBOW: "L_Elbow",
    JointName.R_ELBOW: "R_Elbow",
    JointName.L_WRIST: "L_Wrist",
    JointName.R_WRIST: "R_Wrist",
    JointName.L_HIP: "L_Hip",
    JointName.R_HIP: "R_Hip",
    JointName.L_KNEE: "L_Knee",
    JointName.R_KNEE: "R_Knee",
    JointName.L_ANKLE: "L_Ankle",
    JointName.R_ANKLE: "R_Ankle",
}

_MIRROR_JOINT = {
    JointName.NOSE: JointName.NOSE,
    JointName.L_EYE: JointName.R_EYE,
    JointName.R_EYE: JointName.L_EYE,
    JointName.L_EAR: JointName.R_EAR,
    JointName.R_EAR: JointName.L_EAR,
    JointName.L_SHOULDER: JointName.R_SHOULDER,
    JointName.R_SHOULDER: JointName.L_SHOULDER,
    JointName.L_ELBOW: JointName.R_ELBOW,
    JointName.R_ELBOW: JointName.L_ELBOW,
    JointName.L_WRIST: JointName.R_WRIST,
    JointName.R_WRIST: JointName.L_WRIST,
    JointName.L_HIP: JointName.R_HIP,
    JointName.R_HIP: JointName.L_HIP,
    JointName.L_KNEE: JointName.R_KNEE,
    JointName.R_KNEE: JointName.L_KNEE,
    JointName.L_ANKLE: JointName.R_ANKLE,
    JointName.R_ANKLE: JointName.L_ANKLE,
}


class SwingEvent(enum.IntEnum):
    """The eight canonical swing phases, indexed 0-7."""

    ADDRESS = 0
    TAKEAWAY = 1
    BACKSWING = 2
    TOP = 3
    DOWNSWING = 4
    IMPACT = 5
    FOLLOW_THROUGH = 6
    FINISH = 7

    @property
    def key(self) -> str:
        """JSON object key for this event."""
        return self.name.lower()


class View(enum.Enum):
    FACEON = "FACEON"
    DTL = "DTL"


class ClubType(enum.Enum):
    W1 = "W1"
    W3 = "W3"
    I4 = "I4"
    I5 = "I5"
    I6 = "I6"
    I7 = "I7"
    I8 = "I8"
    I9 = "I9"


class Joint(NamedTuple):
    name: JointName
    x: float
    y: float
    confidence: float

    @property
    def point(self) -> Point2:
        return Point2(self.x, self.y)


class BBox(NamedTuple):
    x: float
    y: float
    width: float
    height: float


JointSet = dict[JointName, Joint]


@dataclass(frozen=True)
class SwingSequence:
    """Eight per-event joint sets plus view and bounding box for one shot."""

    swing_id: str
    golfer_id: str
    view: View
    bbox: BBox
    events: tuple[JointSet, ...]  # exactly 8, indexed by SwingEvent

    def joints(self, event: SwingEvent) -> JointSet:
        return self.events[event]


@dataclass(frozen=True)
class BallRecord:
    """Per-shot launch-monitor outputs.

    Sign conventions: negative direction_angle = ball starts left of target;
    negative spin_axis = clockwise tilt (ball curves left); negative
    lr_distance_out = landed left of target.
    """

    swing_id: str
    club_type: ClubType
    distance: float
    carry: float
    lr_distance_out: float
    direction_angle: float
    spin_axis: float
    ball_speed: float


@dataclass(frozen=True)
class PairedShot:
    sequence: SwingSequence
    ball: BallRecord

    def __post_init__(self) -> None:
        if self.sequence.swing_id != self.ball.swing_id:
            raise InvariantViolation(
                f"paired shot ids differ: sequence {self.sequence.swing_id!r}"
                f" vs ball {self.ball.swing_id!r}"
            )


BALL_CSV_HEADER = [
    "swing_id",
    "club_type",
    "distance",
    "carry",
    "lr_distance_out",
    "direction_angle",
    "spin_axis",
    "ball_speed",
]


# --------------------------------------------------------------------------
# keypoint JSON
# --------------------------------------------------------------------------

def _parse_joint_triple(
    raw: object, swing_id: str, event: SwingEvent, index: int
) -> Joint:
    path = f"swing {swing_id!r}, event '{event.key}', joint {index}"
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise SchemaViolation(f"{path}: expected [x, y, confidence]")
    try:
        x, y, c = (float(v) for v in raw)
    except (TypeError, ValueError):
        raise SchemaViolation(f"{path}: non-numeric entry") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise SchemaViolation(f"{path}: non-finite coordinate")
    if not (0.0 <= c <= 1.0):
        raise SchemaViolation(f"{path}: confidence {c} outside [0, 1]")
    return Joint(JointName(index), x, y, c)


def _parse_swing_obj(obj: object, position: int) -> SwingSequence:
    if not isinstance(obj, dict):
        raise SchemaViolation(f"entry {position}: expected a swing object")
    swing_id = obj.get("swing_id")
    if not isinstance(swing_id, str) or not swing_id:
        raise SchemaViolation(f"entry {position}: missing or empty 'swing_id'")
    golfer_id = obj.get("golfer_id")
    if not isinstance(golfer_id, str):
        raise SchemaViolation(f"swing {swing_id!r}: missing 'golfer_id'")
    try:
        view = View(obj.get("view"))
    except ValueError:
        raise SchemaViolation(
            f"swing {swing_id!r}: 'view' must be 'FACEON' or 'DTL'"
        ) from None

    raw_bbox = obj.get("bbox")
    if not isinstance(raw_bbox, (list, tuple)) or len(raw_bbox) != 4:
        raise SchemaViolation(f"swing {swing_id!r}: 'bbox' must be [x, y, w, h]")
    try:
        bbox = BBox(*(float(v) for v in raw_bbox))
    except (TypeError, ValueError):
        raise SchemaViolation(f"swing {swing_id!r}: non-numeric bbox") from None
    if not all(math.isfinite(v) for v in bbox):
        raise SchemaViolation(f"swing {swing_id!r}: non-finite bbox")
    if bbox.width <= 0 or bbox.height <= 0:
        raise SchemaViolation(f"swing {swing_id!r}: bbox width/height must be > 0")

    raw_events = obj.get("events")
    if not isinstance(raw_events, dict):
        raise SchemaViolation(f"swing {swing_id!r}: missing 'events' object")
    extra = set(raw_events) - {e.key for e in SwingEvent}
    if extra:
        raise SchemaViolation(
            f"swing {swing_id!r}: unknown event keys {sorted(extra)}"
        )

    events: list[JointSet] = []
    for event in SwingEvent:
        raw_joints = raw_events.get(event.key)
        if raw_joints is None:
            raise SchemaViolation(f"swing {swing_id!r}: missing event '{event.key}'")
        if not isinstance(raw_joints, list) or len(raw_joints) != 17:
            count = len(raw_joints) if isinstance(raw_joints, list) else "non-list"
            raise SchemaViolation(
                f"swing {swing_id!r}, event '{event.key}': expected 17 joints,"
                f" got {count}"
            )
        joint_set: JointSet = {}
        for i, triple in enumerate(raw_joints):
            joint = _parse_joint_triple(triple, swing_id, event, i)
            joint_set[joint.name] = joint
        events.append(joint_set)

    return SwingSequence(swing_id, golfer_id, view, bbox, tuple(events))


def parse_keypoint_file(
    path: str, min_confidence: float = 0.0
) -> list[SwingSequence]:
    """Parse a keypoint JSON file into validated SwingSequences.

    Sequences containing any joint below ``min_confidence`` are dropped with
    a logged warning (the default 0.0 disables the gate). Raises
    MalformedFile on syntax errors, SchemaViolation on structural problems,
    DuplicateSwingId on repeated ids.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(data, list):
        raise MalformedFile(f"{path}: top level must be an array of swings")

    sequences: list[SwingSequence] = []
    seen: set[str] = set()
    for position, obj in enumerate(data):
        seq = _parse_swing_obj(obj, position)
        if seq.swing_id in seen:
            raise DuplicateSwingId(f"swing_id {seq.swing_id!r} appears twice in {path}")
        seen.add(seq.swing_id)
        if min_confidence > 0.0:
            worst = min(
                j.confidence for joints in seq.events for j in joints.values()
            )
            if worst < min_confidence:
                logger.warning(
                    "dropping swing %r: joint confidence %.3f below gate %.3f",
                    seq.swing_id, worst, min_confidence,
                )
                continue
        sequences.append(seq)
    return sequences


def sequences_to_json(sequences: Iterable[SwingSequence]) -> list[dict]:
    """Re-serialize sequences into the keypoint JSON structure."""
    out = []
    for seq in sequences:
        events = {
            event.key: [
                [joints[name].x, joints[name].y, joints[name].confidence]
                for name in JointName
            ]
            for event, joints in zip(SwingEvent, seq.events)
        }
        out.append(
            {
                "swing_id": seq.swing_id,
                "golfer_id": seq.golfer_id,
                "view": seq.view.value,
                "bbox": list(seq.bbox),
                "events": events,
            }
        )
    return out


def write_keypoint_file(path: str, sequences: Iterable[SwingSequence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sequences_to_json(sequences), fh, indent=1)


# --------------------------------------------------------------------------
# ball CSV
# --------------------------------------------------------------------------

def parse_ball_csv(path: str) -> list[BallRecord]:
    """Parse launch-monitor ball records from CSV.

    Raises MalformedFile for header/field-count/numeric problems,
    UnknownClubType for unsupported clubs, and InvariantViolation (with the
    1-based data row number) when a record is internally inconsistent.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedFile(f"{path}: empty file, expected header row") from None
        if [h.strip() for h in header] != BALL_CSV_HEADER:
            raise MalformedFile(
                f"{path}: header must be exactly {','.join(BALL_CSV_HEADER)}"
            )
        records: list[BallRecord] = []
        for row_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(BALL_CSV_HEADER):
                raise MalformedFile(
                    f"{path} row {row_no}: expected {len(BALL_CSV_HEADER)} fields,"
                    f" got {len(row)}"
                )
            swing_id = row[0].strip()
            club_raw = row[1].strip()
            try:
                club = ClubType(club_raw)
            except ValueError:
                raise UnknownClubType(
                    f"{path} row {row_no}: unknown club_type {club_raw!r}"
                ) from None
            try:
                nums = [float(v) for v in row[2:]]
            except ValueError:
                raise MalformedFile(
                    f"{path} row {row_no}: non-numeric field"
                ) from None
            distance, carry, lr_out, direction, spin, speed = nums
            if not all(math.isfinite(v) for v in nums):
                raise InvariantViolation(f"{path} row {row_no}: non-finite value")
            if distance < 0 or carry < 0:
                raise InvariantViolation(
                    f"{path} row {row_no}: distance/carry must be >= 0"
                )
            if carry > distance:
                raise InvariantViolation(
                    f"{path} row {row_no}: carry {carry} exceeds distance {distance}"
                )
            if speed <= 0:
                raise InvariantViolation(
                    f"{path} row {row_no}: ball_speed must be > 0"
                )
            records.append(
                BallRecord(swing_id, club, distance, carry, lr_out, direction, spin, speed)
            )
    return records


def write_ball_csv(path: str, records: Iterable[BallRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BALL_CSV_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.swing_id,
                    r.club_type.value,
                    repr(float(r.distance)),
                    repr(float(r.carry)),
                    repr(float(r.lr_distance_out)),
                    repr(float(r.direction_angle)),
                    repr(float(r.spin_axis)),
                    repr(float(r.ball_speed)),
                ]
            )


# --------------------------------------------------------------------------
# pairing, normalization, mirroring, splitting
# --------------------------------------------------------------------------

def pair_records(
    sequences: Sequence[SwingSequence], balls: Sequence[BallRecord]
) -> tuple[list[PairedShot], list[str]]:
    """Pair sequences with ball records by exact swing_id.

    Each id is used at most once; unmatched ids from both sides are returned
    (an unmatched id is a normal outcome, not an error).
    """
    by_id: dict[str, BallRecord] = {}
    unmatched: list[str] = []
    for ball in balls:
        if ball.swing_id in by_id:
            unmatched.append(ball.swing_id)
        else:
            by_id[ball.swing_id] = ball
    pairs: list[PairedShot] = []
    for seq in sequences:
        ball = by_id.pop(seq.swing_id, None)
        if ball is None:
            unmatched.append(seq.swing_id)
        else:
            pairs.append(PairedShot(seq, ball))
    unmatched.extend(by_id.keys())
    return pairs, unmatched


def normalize_sequence(seq: SwingSequence) -> SwingSequence:
    """Rescale a sequence into the bbox-width coordinate frame.

    Every joint is translated by (-bbox.x, -bbox.y) and divided by
    bbox.width; the bbox becomes (0, 0, 1, height/width). Idempotent on
    input that is already in the unit-width frame.
    """
    bbox = seq.bbox
    if bbox.width <= 0:
        raise DegenerateBBox(f"swing {seq.swing_id!r}: bbox width {bbox.width}")
    w = bbox.width
    events = tuple(
        {
            name: Joint(name, (j.x - bbox.x) / w, (j.y - bbox.y) / w, j.confidence)
            for name, j in joints.items()
        }
        for joints in seq.events
    )
    return replace(seq, bbox=BBox(0.0, 0.0, 1.0, bbox.height / w), events=events)


def mirror_sequence(seq: SwingSequence, swap_sides: bool = True) -> SwingSequence:
    """Reflect x-coordinates about the bbox center.

    With ``swap_sides=True`` (the ingest option for left-handed golfers)
    L/R joint names are also exchanged so the lead side lands in the L_*
    slots. ``swap_sides=False`` is the purely geometric reflection used by
    symmetry diagnostics.
    """
    pivot = 2.0 * seq.bbox.x + seq.bbox.width  # x -> pivot - x
    events = []
    for joints in seq.events:
        mirrored: JointSet = {}
        for name, j in joints.items():
            new_name = name.mirrored if swap_sides else name
            mirrored[new_name] = Joint(new_name, pivot - j.x, j.y, j.confidence)
        events.append(mirrored)
    return replace(seq, events=tuple(events))


def split_dataset(shots: Sequence, train_fraction: float, seed: int) -> tuple[list, list]:
    """Deterministic shuffled train/test partition.

    |train| = round(train_fraction * N) with half-up rounding; the shuffle is
    a PCG64 permutation seeded by ``seed``. Works on any sequence type.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(shots)
    if n == 0:
        raise EmptyDataset("cannot split an empty dataset")
    n_train = int(math.floor(train_fraction * n + 0.5))
    order = np.random.default_rng(seed).permutation(n)
    train = [shots[i] for i in order[:n_train]]
    test = [shots[i] for i in order[n_train:]]
    return train, test
