"""SVG rendering of scenario frames and objective landscapes.

Pure-string SVG assembly, no drawing dependency. Scenes use a single
documented world-to-canvas transform: x grows right, y grows up in
world space, so the canvas y axis is flipped once here and nowhere
else. Scene bounds never depend on the optional placement overlay, so
two renders of the same frame differ only inside the arm and handle
groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .body_model import (
    BodyGeometry,
    Vec2,
    com_velocity,
    forward_kinematics,
    nonarm_com,
    unit,
)
from .errors import DegenerateVelocity, IndexOutOfRange
from .placement_opt import ObjectiveLandscape, Placement, argmax_lexicographic


@dataclass(frozen=True)
class RenderStyle:
    scale: float = 240.0  # px per meter
    margin: float = 0.18  # meters of padding around the scene bounds
    body_color: str = "#1f3a5f"
    arm_color: str = "#c0392b"
    com_color: str = "#7d3c98"
    velocity_color: str = "#1e8449"
    handle_color: str = "#b7950b"
    background: str = "#ffffff"
    floor_color: str = "#888888"
    body_width: float = 5.0
    arm_width: float = 4.0
    joint_radius: float = 4.0

    def width_mm(self, width_px: float) -> float:
        """Physical width at the CSS reference of 96 px per inch."""
        return width_px * 25.4 / 96.0


VELOCITY_ARROW_PX = 55.0


def _fmt(v: float) -> str:
    """Fixed-point with trailing zeros stripped; stable across platforms."""
    s = f"{v:.10f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    """World-to-canvas transform for one scene."""

    def __init__(self, xmin: float, xmax: float, ymin: float, ymax: float, style: RenderStyle):
        self.xmin = xmin
        self.ymax = ymax
        self.scale = style.scale
        self.margin_px = style.margin * style.scale
        self.width = 2.0 * self.margin_px + (xmax - xmin) * self.scale
        self.height = 2.0 * self.margin_px + (ymax - ymin) * self.scale

    def x(self, wx: float) -> float:
        return self.margin_px + (wx - self.xmin) * self.scale

    def y(self, wy: float) -> float:
        return self.margin_px + (self.ymax - wy) * self.scale

    def point(self, p: Vec2) -> str:
        return f"{_fmt(self.x(p.x))},{_fmt(self.y(p.y))}"


def _polyline(points, color: str, width: float) -> str:
    return (
        f'<polyline points="{" ".join(points)}" fill="none" '
        f'stroke="{color}" stroke-width="{_fmt(width)}" '
        'stroke-linecap="round" stroke-linejoin="round"/>'
    )


def _circle(cx: float, cy: float, r: float, fill: str, extra: str = "") -> str:
    return f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{fill}"{extra}/>'


def _scene_bounds(geom: BodyGeometry, com: Vec2, arm_reach: float, floor_y: float):
    """Bounds from the body, the COM, and the full arm-reach disc.

    The reach disc makes the bounds independent of where the arm or a
    handle overlay ends up, so overlays never move the viewport.
    """
    pts = [geom.toe, geom.ankle, geom.knee, geom.hip, geom.shoulder, geom.head_end, com]
    xs = [p.x for p in pts] + [geom.shoulder.x - arm_reach, geom.shoulder.x + arm_reach]
    ys = [p.y for p in pts] + [geom.shoulder.y - arm_reach, geom.shoulder.y + arm_reach, floor_y]
    return min(xs), max(xs), min(ys), max(ys)


def render_scene(scenario, frame_index: int, placement: Placement | None = None,
                 style: RenderStyle | None = None) -> str:
    """SVG for one frame; pass a placement to overlay the solved arm."""
    style = style or RenderStyle()
    frame = scenario.frames[frame_index]
    geom = forward_kinematics(frame.pose, scenario.segments)
    com = nonarm_com(frame.pose, scenario.segments)
    cv = _Canvas(*_scene_bounds(geom, com, scenario.segments.arm_reach, scenario.floor_y), style)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(cv.width)}" '
        f'height="{_fmt(cv.height)}" viewBox="0 0 {_fmt(cv.width)} {_fmt(cv.height)}">',
        f'<rect width="100%" height="100%" fill="{style.background}"/>',
        f'<line x1="0" y1="{_fmt(cv.y(scenario.floor_y))}" x2="{_fmt(cv.width)}" '
        f'y2="{_fmt(cv.y(scenario.floor_y))}" stroke="{style.floor_color}" stroke-width="2" '
        'stroke-dasharray="8 5"/>',
    ]

    body_joints = (geom.toe, geom.ankle, geom.knee, geom.hip, geom.shoulder, geom.head_end)
    lines.append('<g id="body">')
    lines.append(_polyline([cv.point(p) for p in body_joints], style.body_color, style.body_width))
    for p in body_joints:
        lines.append(_circle(cv.x(p.x), cv.y(p.y), style.joint_radius, style.body_color))
    lines.append("</g>")

    if placement is None:
        elbow, hand = geom.elbow, geom.wrist
    else:
        a5 = geom.trunk_angle + placement.theta5_opt
        elbow = geom.shoulder + unit(a5) * scenario.segments.length(5)
        hand = elbow + unit(a5 + placement.theta6_opt) * scenario.segments.length(6)
    lines.append('<g id="arm">')
    lines.append(_polyline([cv.point(p) for p in (geom.shoulder, elbow, hand)],
                           style.arm_color, style.arm_width))
    for p in (elbow, hand):
        lines.append(_circle(cv.x(p.x), cv.y(p.y), style.joint_radius, style.arm_color))
    lines.append("</g>")

    if placement is not None:
        h = placement.handle
        bar_w = scenario.robot.handle_length * style.scale
        bar_h = max(2.0, scenario.robot.handle_diameter * style.scale)
        lines.append('<g id="handle">')
        lines.append(
            f'<rect x="{_fmt(cv.x(h.x) - bar_w / 2.0)}" y="{_fmt(cv.y(h.y) - bar_h / 2.0)}" '
            f'width="{_fmt(bar_w)}" height="{_fmt(bar_h)}" fill="{style.handle_color}" '
            'fill-opacity="0.45"/>'
        )
        lines.append(_circle(cv.x(h.x), cv.y(h.y), max(3.0, bar_h / 2.0), style.handle_color))
        lines.append("</g>")

    lines.append('<g id="com-marker">')
    lines.append(_circle(cv.x(com.x), cv.y(com.y), 6.0, style.com_color,
                         ' stroke="#ffffff" stroke-width="1.5"'))
    lines.append("</g>")

    speed_text = ""
    try:
        state = com_velocity(scenario.frames, scenario.segments, frame_index)
    except (DegenerateVelocity, IndexOutOfRange):
        state = None
    if state is not None:
        tip_x = cv.x(com.x) + state.direction.x * VELOCITY_ARROW_PX
        tip_y = cv.y(com.y) - state.direction.y * VELOCITY_ARROW_PX
        head = 8.0
        ang = math.atan2(tip_y - cv.y(com.y), tip_x - cv.x(com.x))
        left = (tip_x - head * math.cos(ang - 0.45), tip_y - head * math.sin(ang - 0.45))
        right = (tip_x - head * math.cos(ang + 0.45), tip_y - head * math.sin(ang + 0.45))
        lines.append('<g id="velocity">')
        lines.append(
            f'<line x1="{_fmt(cv.x(com.x))}" y1="{_fmt(cv.y(com.y))}" x2="{_fmt(tip_x)}" '
            f'y2="{_fmt(tip_y)}" stroke="{style.velocity_color}" stroke-width="3"/>'
        )
        lines.append(
            f'<polygon points="{_fmt(tip_x)},{_fmt(tip_y)} {_fmt(left[0])},{_fmt(left[1])} '
            f'{_fmt(right[0])},{_fmt(right[1])}" fill="{style.velocity_color}"/>'
        )
        lines.append("</g>")
        speed_text = f"|v| = {state.speed:.4f} m/s"

    lines.append('<g id="labels" font-family="sans-serif" font-size="14" fill="#333333">')
    lines.append(
        f'<text x="12" y="20">{scenario.name}  frame {frame_index}  '
        f't = {frame.time:.3f} s</text>'
    )
    if speed_text:
        lines.append(f'<text x="12" y="40">{speed_text}</text>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


_HEAT_LOW = (27, 42, 107)
_HEAT_HIGH = (245, 215, 66)
_INELIGIBLE_FILL = "#c8c8c8"


def _heat_color(t: float) -> str:
    r = round(_HEAT_LOW[0] + t * (_HEAT_HIGH[0] - _HEAT_LOW[0]))
    g = round(_HEAT_LOW[1] + t * (_HEAT_HIGH[1] - _HEAT_LOW[1]))
    b = round(_HEAT_LOW[2] + t * (_HEAT_HIGH[2] - _HEAT_LOW[2]))
    return f"#{r:02x}{g:02x}{b:02x}"


def render_landscape(landscape: ObjectiveLandscape, style: RenderStyle | None = None) -> str:
    """Heat map of the objective over the joint grid; theta6 grows upward."""
    n5 = int(landscape.theta5.size)
    n6 = int(landscape.theta6.size)
    cell = max(2, min(20, 900 // max(n5, 1)))
    left, top, right, bottom = 70, 46, 24, 54
    width = left + n5 * cell + right
    height = top + n6 * cell + bottom

    vals = landscape.objective[landscape.eligible]
    has_vals = vals.size > 0
    vmin = float(np.min(vals)) if has_vals else 0.0
    vmax = float(np.max(vals)) if has_vals else 0.0
    span = vmax - vmin

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        '<g font-family="sans-serif" font-size="13" fill="#333333">',
        f'<text x="{left}" y="20">objective landscape '
        f'({n5} x {n6} cells)</text>',
    ]
    if has_vals:
        lines.append(
            f'<text x="{left}" y="{top - 8}" font-size="11">min = {vmin:.6g}, '
            f'max = {vmax:.6g}</text>'
        )
    lines.append("</g>")

    obj = landscape.objective
    elig = landscape.eligible
    rows = []
    for i5 in range(n5):
        x = left + i5 * cell
        for i6 in range(n6):
            y = top + (n6 - 1 - i6) * cell
            if elig[i5, i6]:
                t = (float(obj[i5, i6]) - vmin) / span if span > 0.0 else 0.5
                fill = _heat_color(min(1.0, max(0.0, t)))
            else:
                fill = _INELIGIBLE_FILL
            rows.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>')
    lines.append('<g id="cells">')
    lines.extend(rows)
    lines.append("</g>")

    if has_vals:
        i5, i6 = argmax_lexicographic(landscape)
        x = left + i5 * cell
        y = top + (n6 - 1 - i6) * cell
        lines.append(
            f'<rect id="argmax" x="{x}" y="{y}" width="{cell}" height="{cell}" '
            'fill="none" stroke="#e74c3c" stroke-width="2"/>'
        )

    def deg(v: float) -> str:
        return f"{math.degrees(v):.1f}"

    axis_y = top + n6 * cell
    lines.append('<g font-family="sans-serif" font-size="11" fill="#333333">')
    lines.append(f'<text x="{left}" y="{axis_y + 16}">{deg(float(landscape.theta5[0]))}</text>')
    lines.append(
        f'<text x="{left + n5 * cell}" y="{axis_y + 16}" text-anchor="end">'
        f'{deg(float(landscape.theta5[-1]))}</text>'
    )
    lines.append(
        f'<text x="{left + n5 * cell // 2}" y="{axis_y + 34}" text-anchor="middle">'
        'shoulder angle theta5 (deg)</text>'
    )
    lines.append(
        f'<text x="{left - 6}" y="{axis_y}" text-anchor="end">'
        f'{deg(float(landscape.theta6[0]))}</text>'
    )
    lines.append(
        f'<text x="{left - 6}" y="{top + 10}" text-anchor="end">'
        f'{deg(float(landscape.theta6[-1]))}</text>'
    )
    lines.append(
        f'<text x="16" y="{top + n6 * cell // 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + n6 * cell // 2})">elbow angle theta6 (deg)</text>'
    )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
