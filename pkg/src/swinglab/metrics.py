"""The 15 face-on and 9 down-the-line swing metrics.

Each metric is computed from one event's normalized joints, with the Address
event supplying the reference frame for "relative to Address" quantities.
The formulas below, including every sign convention, are the package's
single source of truth:

Face-on (right-handed golfer, target toward +x; see ``geometry`` module):

- SHOULDER-ANGLE   line angle of the shoulder segment off horizontal;
                   positive = lead (left) shoulder higher.
- UPPER-TILT       lower-body length / upper-body length, where lower body is
                   hip-mid -> ankle-mid and upper body is shoulder-mid -> hip-mid.
- STANCE-RATIO     ankle x-separation / shoulder x-separation, both at the
                   measured event.
- HEAD-LOC         x-shift of the ear midpoint since Address, / Address stride;
                   negative = head moved toward the trail side (off the ball).
- SHOULDER-LOC     lead-shoulder x relative to the Address lead ankle, / stride.
- LEFT/RIGHT-ARM-ANGLE   interior angle shoulder-elbow-wrist.
- HIP-ROTATION     arccos of the apparent hip-width ratio vs Address, clamped
                   to [0, 90] degrees (2-D foreshortening proxy).
- HIP-SHIFTED      x-shift of the hip midpoint since Address, / stride.
- RIGHT-LEG-ANGLE  interior angle hip-knee-ankle on the trail side.
- SHOULDER/HIP-HANGING-BACK  lead shoulder (hip) x minus lead ankle x, / stride;
                   negative = hanging back on the trail side.
- RIGHT-ARMPIT-ANGLE  interior angle elbow-shoulder-hip on the trail side.
- WEIGHT-SHIFT     lean of the lead hip over the lead ankle off vertical;
                   positive = toward the target.
- FINISH-ANGLE     lean of the trail hip over the lead ankle off vertical.

DTL:

- SPINE-ANGLE      line angle of shoulder-mid -> hip-mid off horizontal.
- LOWER-ANGLE      interior angle of trail hip-knee-ankle.
- SHOULDER-ANGLE, LEFT/RIGHT-ARM-ANGLE  as face-on.
- HIP-LINE         x-shift of the hip midpoint since Address, / stride.
- HIP-ANGLE        apparent-width rotation proxy, as HIP-ROTATION.
- RIGHT-DISTANCE   trail elbow to hip-mid distance, / stride.
- LEFT-LEG-ANGLE   interior angle of lead hip-knee-ankle.

Ratio denominators use the Address stride (|L_Ankle.x - R_Ankle.x| at
Address) so the reference frame itself is fixed at Address. All functions
are pure; per-swing computation is safe to parallelize.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from .errors import DegenerateStride
from .geometry import (
    Point2,
    angle_from_horizontal,
    angle_from_vertical,
    distance,
    midpoint,
    vertex_angle,
)
from .pose_io import JointName, JointSet, SwingEvent, SwingSequence, View


class Unit(enum.Enum):
    DEGREE = "degree"
    RATIO = "ratio"


class MetricId(enum.Enum):
    """All swing metrics; value = (display name, unit, camera view)."""

    # face-on
    SHOULDER_ANGLE = ("SHOULDER-ANGLE", Unit.DEGREE, View.FACEON)
    UPPER_TILT = ("UPPER-TILT", Unit.RATIO, View.FACEON)
    STANCE_RATIO = ("STANCE-RATIO", Unit.RATIO, View.FACEON)
    HEAD_LOC = ("HEAD-LOC", Unit.RATIO, View.FACEON)
    SHOULDER_LOC = ("SHOULDER-LOC", Unit.RATIO, View.FACEON)
    LEFT_ARM_ANGLE = ("LEFT-ARM-ANGLE", Unit.DEGREE, View.FACEON)
    RIGHT_ARM_ANGLE = ("RIGHT-ARM-ANGLE", Unit.DEGREE, View.FACEON)
    HIP_ROTATION = ("HIP-ROTATION", Unit.DEGREE, View.FACEON)
    HIP_SHIFTED = ("HIP-SHIFTED", Unit.RATIO, View.FACEON)
    RIGHT_LEG_ANGLE = ("RIGHT-LEG-ANGLE", Unit.DEGREE, View.FACEON)
    SHOULDER_HANGING_BACK = ("SHOULDER-HANGING-BACK", Unit.RATIO, View.FACEON)
    HIP_HANGING_BACK = ("HIP-HANGING-BACK", Unit.RATIO, View.FACEON)
    RIGHT_ARMPIT_ANGLE = ("RIGHT-ARMPIT-ANGLE", Unit.DEGREE, View.FACEON)
    WEIGHT_SHIFT = ("WEIGHT-SHIFT", Unit.DEGREE, View.FACEON)
    FINISH_ANGLE = ("FINISH-ANGLE", Unit.DEGREE, View.FACEON)
    # down the line
    SPINE_ANGLE = ("SPINE-ANGLE", Unit.DEGREE, View.DTL)
    LOWER_ANGLE = ("LOWER-ANGLE", Unit.DEGREE, View.DTL)
    DTL_SHOULDER_ANGLE = ("SHOULDER-ANGLE", Unit.DEGREE, View.DTL)
    DTL_LEFT_ARM_ANGLE = ("LEFT-ARM-ANGLE", Unit.DEGREE, View.DTL)
    DTL_RIGHT_ARM_ANGLE = ("RIGHT-ARM-ANGLE", Unit.DEGREE, View.DTL)
    HIP_LINE = ("HIP-LINE", Unit.RATIO, View.DTL)
    HIP_ANGLE = ("HIP-ANGLE", Unit.DEGREE, View.DTL)
    RIGHT_DISTANCE = ("RIGHT-DISTANCE", Unit.RATIO, View.DTL)
    LEFT_LEG_ANGLE = ("LEFT-LEG-ANGLE", Unit.DEGREE, View.DTL)

    @property
    def display(self) -> str:
        return self.value[0]

    @property
    def unit(self) -> Unit:
        return self.value[1]

    @property
    def view(self) -> View:
        return self.value[2]


def metrics_for_view(view: View) -> list[MetricId]:
    return [m for m in MetricId if m.view is view]


def metric_from_name(name: str, view: View) -> MetricId:
    """Resolve a metric by display name ('HEAD-LOC'), member name, or either
    with '-'/'_' interchanged, within one view."""
    folded = name.strip().upper().replace("-", "_")
    for m in metrics_for_view(view):
        if folded in (m.name, m.display.replace("-", "_")):
            return m
    raise KeyError(f"unknown {view.value} metric {name!r}")


@dataclass(frozen=True)
class MetricValue:
    metric: MetricId
    event: SwingEvent
    value: float


def _pt(joints: JointSet, name: JointName) -> Point2:
    return joints[name].point


def _x(joints: JointSet, name: JointName) -> float:
    return joints[name].x


def _stride(joints: JointSet) -> float:
    return abs(_x(joints, JointName.L_ANKLE) - _x(joints, JointName.R_ANKLE))


def _address_stride(address: JointSet) -> float:
    stride = _stride(address)
    if stride == 0.0:
        raise DegenerateStride("zero ankle separation at Address")
    return stride


def _shoulder_mid(joints: JointSet) -> Point2:
    return midpoint(_pt(joints, JointName.L_SHOULDER), _pt(joints, JointName.R_SHOULDER))


def _hip_mid(joints: JointSet) -> Point2:
    return midpoint(_pt(joints, JointName.L_HIP), _pt(joints, JointName.R_HIP))


def _ankle_mid(joints: JointSet) -> Point2:
    return midpoint(_pt(joints, JointName.L_ANKLE), _pt(joints, JointName.R_ANKLE))


def _head(joints: JointSet) -> Point2:
    # ear midpoint: the nose occludes under rotation, the ears do not
    return midpoint(_pt(joints, JointName.L_EAR), _pt(joints, JointName.R_EAR))


def _shoulder_angle(ev: JointSet, addr: JointSet) -> float:
    return angle_from_horizontal(
        _pt(ev, JointName.L_SHOULDER), _pt(ev, JointName.R_SHOULDER)
    )


def _upper_tilt(ev: JointSet, addr: JointSet) -> float:
    lower = distance(_hip_mid(ev), _ankle_mid(ev))
    upper = distance(_shoulder_mid(ev), _hip_mid(ev))
    if upper == 0.0:
        raise DegenerateStride("zero shoulder-to-hip length")
    return lower / upper


def _stance_ratio(ev: JointSet, addr: JointSet) -> float:
    shoulder_width = abs(
        _x(ev, JointName.L_SHOULDER) - _x(ev, JointName.R_SHOULDER)
    )
    if shoulder_width == 0.0:
        raise DegenerateStride("zero apparent shoulder width")
    return _stride(ev) / shoulder_width


def _head_loc(ev: JointSet, addr: JointSet) -> float:
    return (_head(ev).x - _head(addr).x) / _address_stride(addr)


def _shoulder_loc(ev: JointSet, addr: JointSet) -> float:
    lead_ankle_x = _x(addr, JointName.L_ANKLE)
    return (_x(ev, JointName.L_SHOULDER) - lead_ankle_x) / _address_stride(addr)


def _left_arm_angle(ev: JointSet, addr: JointSet) -> float:
    return vertex_angle(
        _pt(ev, JointName.L_SHOULDER), _pt(ev, JointName.L_ELBOW), _pt(ev, JointName.L_WRIST)
    )


def _right_arm_angle(ev: JointSet, addr: JointSet) -> float:
    return vertex_angle(
        _pt(ev, JointName.R_SHOULDER), _pt(ev, JointName.R_ELBOW), _pt(ev, JointName.R_WRIST)
    )


def _hip_rotation(ev: JointSet, addr: JointSet) -> float:
    width_addr = abs(_x(addr, JointName.L_HIP) - _x(addr, JointName.R_HIP))
    if width_addr == 0.0:
        raise DegenerateStride("zero hip width at Address")
    width_now = abs(_x(ev, JointName.L_HIP) - _x(ev, JointName.R_HIP))
    ratio = min(max(width_now / width_addr, 0.0), 1.0)
    return math.degrees(math.acos(ratio))


def _hip_shifted(ev: JointSet, addr: JointSet) -> float:
    return (_hip_mid(ev).x - _hip_mid(addr).x) / _address_stride(addr)


def _right_leg_angle(ev: JointSet, addr: JointSet) -> float:
    return vertex_angle(
        _pt(ev, JointName.R_HIP), _pt(ev, JointName.R_KNEE), _pt(ev, JointName.R_ANKLE)
    )


def _shoulder_hanging_back(ev: JointSet, addr: JointSet) -> float:
    offset = _x(ev, JointName.L_SHOULDER) - _x(ev, JointName.L_ANKLE)
    return offset / _address_stride(addr)


def _hip_hanging_back(ev: JointSet, addr: JointSet) -> float:
    offset = _x(ev, JointName.L_HIP) - _x(ev, JointName.L_ANKLE)
    return offset / _address_stride(addr)


def _right_armpit_angle(ev: JointSet, addr: JointSet) -> float:
    return vertex_angle(
        _pt(ev, JointName.R_ELBOW), _pt(ev, JointName.R_SHOULDER), _pt(ev, JointName.R_HIP)
    )


def _weight_shift(ev: JointSet, addr: JointSet) -> float:
    return angle_from_vertical(_pt(ev, JointName.L_HIP), _pt(ev, JointName.L_ANKLE))


def _finish_angle(ev: JointSet, addr: JointSet) -> float:
    return angle_from_vertical(_pt(ev, JointName.R_HIP), _pt(ev, JointName.L_ANKLE))


def _spine_angle(ev: JointSet, addr: JointSet) -> float:
    return angle_from_horizontal(_shoulder_mid(ev), _hip_mid(ev))


def _right_distance(ev: JointSet, addr: JointSet) -> float:
    gap = distance(_pt(ev, JointName.R_ELBOW), _hip_mid(ev))
    return gap / _address_stride(addr)


def _left_leg_angle(ev: JointSet, addr: JointSet) -> float:
    return vertex_angle(
        _pt(ev, JointName.L_HIP), _pt(ev, JointName.L_KNEE), _pt(ev, JointName.L_ANKLE)
    )


_FORMULAS: dict[MetricId, Callable[[JointSet, JointSet], float]] = {
    MetricId.SHOULDER_ANGLE: _shoulder_angle,
    MetricId.UPPER_TILT: _upper_tilt,
    MetricId.STANCE_RATIO: _stance_ratio,
    MetricId.HEAD_LOC: _head_loc,
    MetricId.SHOULDER_LOC: _shoulder_loc,
    MetricId.LEFT_ARM_ANGLE: _left_arm_angle,
    MetricId.RIGHT_ARM_ANGLE: _right_arm_angle,
    MetricId.HIP_ROTATION: _hip_rotation,
    MetricId.HIP_SHIFTED: _hip_shifted,
    MetricId.RIGHT_LEG_ANGLE: _right_leg_angle,
    MetricId.SHOULDER_HANGING_BACK: _shoulder_hanging_back,
    MetricId.HIP_HANGING_BACK: _hip_hanging_back,
    MetricId.RIGHT_ARMPIT_ANGLE: _right_armpit_angle,
    MetricId.WEIGHT_SHIFT: _weight_shift,
    MetricId.FINISH_ANGLE: _finish_angle,
    MetricId.SPINE_ANGLE: _spine_angle,
    MetricId.LOWER_ANGLE: _right_leg_angle,
    MetricId.DTL_SHOULDER_ANGLE: _shoulder_angle,
    MetricId.DTL_LEFT_ARM_ANGLE: _left_arm_angle,
    MetricId.DTL_RIGHT_ARM_ANGLE: _right_arm_angle,
    MetricId.HIP_LINE: _hip_shifted,
    MetricId.HIP_ANGLE: _hip_rotation,
    MetricId.RIGHT_DISTANCE: _right_distance,
    MetricId.LEFT_LEG_ANGLE: _left_leg_angle,
}


def compute_metric(
    metric: MetricId,
    event: SwingEvent,
    event_joints: JointSet,
    address_joints: JointSet,
) -> MetricValue:
    """Compute one metric for one event of a normalized sequence.

    ``address_joints`` supplies the reference frame for relative metrics and
    the stride denominator for ratios. Degenerate inputs raise
    DegenerateStride/DegenerateAngle/DegenerateSegment.
    """
    value = _FORMULAS[metric](event_joints, address_joints)
    return MetricValue(metric, event, value)


def compute_all(seq: SwingSequence) -> list[MetricValue]:
    """All metrics of the sequence's view, for all 8 events.

    Expects a normalized sequence (see ``pose_io.normalize_sequence``).
    Returns 15 x 8 values for FACEON, 9 x 8 for DTL, ordered event-major.
    """
    address = seq.joints(SwingEvent.ADDRESS)
    metric_ids = metrics_for_view(seq.view)
    values: list[MetricValue] = []
    try:
        for event in SwingEvent:
            joints = seq.joints(event)
            for metric in metric_ids:
                values.append(compute_metric(metric, event, joints, address))
    except DegenerateStride as exc:
        raise DegenerateStride(f"swing {seq.swing_id!r}: {exc}") from exc
    return values
