"""Planar seven-link body model.

The body is modeled as a sagittal-plane chain of seven rigid links:

    0 foot, 1 shank, 2 thigh, 3 trunk (with pelvis), 4 head and neck,
    5 upper arm, 6 forearm and hand

Limb links combine left and right sides, so the chain is a single serial
mechanism rooted at the ankle. Angles follow one convention everywhere:
an absolute angle of 0 points along +x, counterclockwise is positive, +y
is up and gravity acts along -y. All positions are meters, angles radians.

A pose stores six joint angles. theta_1..theta_3 are successive relative
angles walking up the leg (ankle, knee, hip). theta_4 (head) and theta_5
(shoulder) are both measured from the trunk direction, since head and arm
attach to the same link. theta_6 is the elbow angle relative to the upper
arm. The foot's own world orientation is a separate pose field that
defaults to 0 (flat on the ground, toes along +x); it exists so a pose can
be rotated rigidly as a whole.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from .errors import DegenerateVelocity, IndexOutOfRange

FOOT, SHANK, THIGH, TRUNK, HEAD, UPPER_ARM, FOREARM = range(7)

SEGMENT_NAMES = (
    "foot", "shank", "thigh", "trunk_pelvis", "head_neck",
    "upper_arm", "forearm_hand",
)

# Non-arm links must carry 90..95% of body mass for a default-like build.
NONARM_BAND = (0.90, 0.95)
MASS_CLOSURE_RTOL = 1e-9
DEGENERATE_SPEED = 1e-9


@dataclass(frozen=True)
class Vec2:
    """Planar vector (meters unless stated otherwise)."""

    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def __mul__(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        """z component of the 3D cross product; sign tells left/right."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def angle(self) -> float:
        """World angle in (-pi, pi], 0 along +x, counterclockwise positive."""
        return math.atan2(self.y, self.x)

    def perp(self) -> "Vec2":
        """Rotation by +90 degrees."""
        return Vec2(-self.y, self.x)

    def normalized(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero vector")
        return Vec2(self.x / n, self.y / n)

    def rotated(self, phi: float, about: "Vec2 | None" = None) -> "Vec2":
        c, s = math.cos(phi), math.sin(phi)
        px, py = (self.x, self.y) if about is None else (self.x - about.x, self.y - about.y)
        rx, ry = c * px - s * py, s * px + c * py
        if about is None:
            return Vec2(rx, ry)
        return Vec2(rx + about.x, ry + about.y)


def unit(angle: float) -> Vec2:
    """Unit vector at a world angle."""
    return Vec2(math.cos(angle), math.sin(angle))


@dataclass(frozen=True)
class LinkSegment:
    """One rigid link.

    com_fraction locates the segment COM along the link, measured from the
    chain-proximal joint (the joint nearer the ankle) divided by length.
    """

    index: int
    name: str
    length: float
    mass: float
    com_fraction: float


@dataclass(frozen=True)
class SegmentSet:
    """The seven links plus the expected whole-body mass.

    total_mass is carried separately so that mass bookkeeping can be
    checked: validation requires the seven segment masses to close to
    total_mass within 1e-9 relative.
    """

    segments: tuple[LinkSegment, ...]
    total_mass: float

    def __post_init__(self) -> None:
        if len(self.segments) != 7:
            raise ValueError(f"expected 7 segments, got {len(self.segments)}")
        for i, seg in enumerate(self.segments):
            if seg.index != i:
                raise ValueError(f"segment {i} carries index {seg.index}")

    def length(self, i: int) -> float:
        return self.segments[i].length

    def mass(self, i: int) -> float:
        return self.segments[i].mass

    @property
    def nonarm_mass(self) -> float:
        return sum(self.segments[i].mass for i in range(UPPER_ARM))

    @property
    def nonarm_fraction(self) -> float:
        return self.nonarm_mass / self.total_mass

    @property
    def arm_reach(self) -> float:
        return self.length(UPPER_ARM) + self.length(FOREARM)


def default_segments() -> SegmentSet:
    """Packaged 60 kg anthropometry (editable data file)."""
    with resources.files("handleopt").joinpath("data", "anthropometry_60kg.json").open() as fh:
        raw = json.load(fh)
    segs = tuple(
        LinkSegment(
            index=i,
            name=entry["name"],
            length=float(entry["length_m"]),
            mass=float(entry["mass_kg"]),
            com_fraction=float(entry["com_fraction"]),
        )
        for i, entry in enumerate(raw["segments"])
    )
    return SegmentSet(segments=segs, total_mass=float(raw["total_mass_kg"]))


@dataclass(frozen=True)
class BodyPose:
    """Configuration of the chain at one instant.

    theta holds (theta_1 .. theta_6). theta_1 is the ankle angle of the
    shank over the foot, theta_2 the knee, theta_3 the hip; theta_4 and
    theta_5 are head and shoulder angles from the trunk direction;
    theta_6 is the elbow angle from the upper arm. foot_angle is the
    foot's world orientation (0 = flat, toes along +x). Pose angles are
    unrestricted; joint limits apply only during optimization.
    """

    base: Vec2
    theta: tuple[float, float, float, float, float, float]
    foot_angle: float = 0.0

    def rotated(self, phi: float, about: Vec2 | None = None) -> "BodyPose":
        """Rigid rotation of the whole pose, foot included."""
        pivot = about if about is not None else self.base
        return BodyPose(
            base=self.base.rotated(phi, about=pivot),
            theta=self.theta,
            foot_angle=self.foot_angle + phi,
        )

    def translated(self, d: Vec2) -> "BodyPose":
        return BodyPose(base=self.base + d, theta=self.theta, foot_angle=self.foot_angle)


def absolute_link_angles(pose: BodyPose) -> tuple[float, ...]:
    """World angle of each link, accumulated proximal to distal."""
    t1, t2, t3, t4, t5, t6 = pose.theta
    a0 = pose.foot_angle
    a1 = a0 + t1
    a2 = a1 + t2
    a3 = a2 + t3          # trunk
    a4 = a3 + t4          # head, from the trunk direction
    a5 = a3 + t5          # upper arm, also from the trunk direction
    a6 = a5 + t6          # forearm
    return (a0, a1, a2, a3, a4, a5, a6)


@dataclass(frozen=True)
class PoseFrame:
    pose: BodyPose
    time: float


@dataclass(frozen=True)
class BodyGeometry:
    """Joint positions and per-segment COM points for one pose."""

    toe: Vec2
    ankle: Vec2
    knee: Vec2
    hip: Vec2
    shoulder: Vec2
    head_end: Vec2
    elbow: Vec2
    wrist: Vec2
    segment_coms: tuple[Vec2, ...]
    trunk_angle: float

    @property
    def trunk_origin(self) -> Vec2:
        """Origin of the trunk-attached frame: the shoulder joint."""
        return self.shoulder


def forward_kinematics(pose: BodyPose, segments: SegmentSet) -> BodyGeometry:
    """Joint positions: joint_k = joint_{k-1} + length_k * unit(angle_k).

    The ankle carries both the foot link (toward the toe) and the leg
    chain (toward the knee). Segment COMs interpolate proximal to distal
    by each link's com_fraction.
    """
    a = absolute_link_angles(pose)
    ankle = pose.base
    toe = ankle + segments.length(FOOT) * unit(a[FOOT])
    knee = ankle + segments.length(SHANK) * unit(a[SHANK])
    hip = knee + segments.length(THIGH) * unit(a[THIGH])
    shoulder = hip + segments.length(TRUNK) * unit(a[TRUNK])
    head_end = shoulder + segments.length(HEAD) * unit(a[HEAD])
    elbow = shoulder + segments.length(UPPER_ARM) * unit(a[UPPER_ARM])
    wrist = elbow + segments.length(FOREARM) * unit(a[FOREARM])

    ends = (
        (ankle, toe),        # foot
        (ankle, knee),       # shank
        (knee, hip),         # thigh
        (hip, shoulder),     # trunk
        (shoulder, head_end),
        (shoulder, elbow),
        (elbow, wrist),
    )
    coms = tuple(
        prox + segments.segments[i].com_fraction * (dist - prox)
        for i, (prox, dist) in enumerate(ends)
    )
    return BodyGeometry(
        toe=toe, ankle=ankle, knee=knee, hip=hip, shoulder=shoulder,
        head_end=head_end, elbow=elbow, wrist=wrist,
        segment_coms=coms, trunk_angle=a[TRUNK],
    )


def nonarm_com(pose: BodyPose, segments: SegmentSet, renormalize: bool = False) -> Vec2:
    """Consolidated COM of the five non-arm links (indices 0..4).

    The default divisor is the whole-body mass, not the five-link mass,
    so the point is the five-link weighted sum scaled by the non-arm mass
    fraction. renormalize=True divides by the five-link mass instead,
    giving the true centroid of those links.
    """
    geom = forward_kinematics(pose, segments)
    sx = sy = 0.0
    for i in range(UPPER_ARM):
        m = segments.mass(i)
        c = geom.segment_coms[i]
        sx += m * c.x
        sy += m * c.y
    divisor = segments.nonarm_mass if renormalize else segments.total_mass
    return Vec2(sx / divisor, sy / divisor)


@dataclass(frozen=True)
class ComState:
    """COM position plus its motion direction at one frame.

    direction is unit length; speed is the raw central-difference
    magnitude in m/s.
    """

    position: Vec2
    direction: Vec2
    speed: float


def com_velocity(
    frames: Sequence[PoseFrame],
    segments: SegmentSet,
    index: int,
    renormalize: bool = False,
) -> ComState:
    """Central-difference COM velocity at an interior frame.

    raw = (com(i+1) - com(i-1)) / (t(i+1) - t(i-1)). Raises
    IndexOutOfRange when index has no neighbors on both sides and
    DegenerateVelocity when the raw speed is below 1e-9 m/s.
    """
    if len(frames) < 3 or not 0 < index < len(frames) - 1:
        raise IndexOutOfRange(
            f"central difference needs an interior frame: index {index} of {len(frames)}"
        )
    dt = frames[index + 1].time - frames[index - 1].time
    if dt <= 0.0:
        raise ValueError("frame times must be strictly increasing")
    before = nonarm_com(frames[index - 1].pose, segments, renormalize)
    after = nonarm_com(frames[index + 1].pose, segments, renormalize)
    raw = (after - before) * (1.0 / dt)
    speed = raw.norm()
    if speed < DEGENERATE_SPEED:
        raise DegenerateVelocity(
            f"COM speed {speed:.3e} m/s at frame {index} is below {DEGENERATE_SPEED:.0e}"
        )
    return ComState(
        position=nonarm_com(frames[index].pose, segments, renormalize),
        direction=raw * (1.0 / speed),
        speed=speed,
    )


def shoulder_frame(pose: BodyPose, segments: SegmentSet) -> tuple[Vec2, float]:
    """Origin and world angle of the trunk-attached frame.

    The frame sits at the shoulder joint. Its angle theta_04 is the
    trunk's absolute angle, so a shoulder angle theta_5 measured from the
    trunk converts to a world angle as theta_04 + theta_5.
    """
    geom = forward_kinematics(pose, segments)
    return geom.shoulder, geom.trunk_angle
