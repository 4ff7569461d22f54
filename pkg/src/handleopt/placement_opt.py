"""Grid-search optimization of the handle placement.

The decision variables are the shoulder and elbow angles (theta_5,
theta_6); every pair maps to a handle position through the arm. The
objective rewards the arm force component along the body's motion
direction and penalizes nearly straight or fully folded elbows:

    J(theta_5, theta_6) = F_arm . v_com  -  a * |cos theta_6|

with torque signs chosen per joint so every force term pushes along
v_com. The search is an exhaustive scan of a fixed grid; evaluation is
vectorized in blocks, and the reduction is a pure elementwise argmax
with a lexicographic tie-break (smaller theta_6, then smaller theta_5),
so results do not depend on evaluation order or chunk size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .arm_kinetics import (
    COND_LIMIT,
    EPS_SINGULAR,
    TorqueSet,
    VirtualChain,
    arm_force_expanded,
    arm_force_lsq,
    build_chain,
)
from .body_model import FOREARM, UPPER_ARM, SegmentSet, Vec2, unit
from .errors import NoFeasiblePoint

FORCE_MODELS = ("expanded", "lsq")

# The elbow grid must keep at least this margin from 0 and +-pi.
ELBOW_LIMIT_MARGIN = math.radians(2.0)

# Cells evaluated per vectorized block; bounds peak memory, not results.
_BLOCK_CELLS = 1_500_000


@dataclass(frozen=True)
class JointLimits:
    """Inclusive optimizer bounds for theta_5 and theta_6, radians."""

    theta5_min: float = math.radians(-60.0)
    theta5_max: float = math.radians(185.0)
    theta6_min: float = math.radians(5.0)
    theta6_max: float = math.radians(175.0)


@dataclass(frozen=True)
class ObjectiveConfig:
    """Objective and search parameters.

    torque_magnitudes is (|tau_5|, |tau_6|, |tau_7|) in newton meters;
    signs are chosen per grid point. grid_step is radians.
    """

    a: float = 0.2
    torque_magnitudes: tuple[float, float, float] = (1.0, 1.0, 1.0)
    force_model: str = "expanded"
    grid_step: float = math.radians(0.5)
    tie_break: str = "lexicographic"


@dataclass(frozen=True)
class RobotParams:
    """Support-robot geometry used by the feasibility report.

    handle_height_range is (min, max) height of the handle above the
    floor. The handlebar itself is 0.46 m long and 0.038 m in diameter,
    and the arm can hold it up to 0.44 m from the robot's base point.
    """

    reach_limit: float = 0.44
    handle_height_range: tuple[float, float] = (0.15, 1.60)
    handle_length: float = 0.46
    handle_diameter: float = 0.038


@dataclass(frozen=True)
class Violation:
    """One feasibility finding; value exceeded (or fell outside) limit."""

    kind: str
    message: str
    value: float
    limit: float


@dataclass(frozen=True)
class PlacementContext:
    """Everything the objective needs about the body at max effort."""

    shoulder: Vec2
    theta_04: float
    com: Vec2
    v: Vec2
    upper_len: float
    fore_len: float

    def rotated(self, phi: float) -> "PlacementContext":
        """World frame rotated about the origin; used by equivariance tests."""
        return PlacementContext(
            shoulder=self.shoulder.rotated(phi),
            theta_04=self.theta_04 + phi,
            com=self.com.rotated(phi),
            v=self.v.rotated(phi),
            upper_len=self.upper_len,
            fore_len=self.fore_len,
        )


@dataclass(frozen=True)
class ObjectiveLandscape:
    """Objective samples over the full grid.

    objective[i5, i6] pairs theta5[i5] with theta6[i6]; singular cells
    hold NaN. eligible marks cells that took part in the argmax.
    """

    theta5: np.ndarray
    theta6: np.ndarray
    objective: np.ndarray
    eligible: np.ndarray


@dataclass(frozen=True)
class Placement:
    """Optimization result at the max-effort frame."""

    theta5_opt: float
    theta6_opt: float
    handle: Vec2
    objective_value: float
    f_arm: Vec2
    torque_signs: tuple[int, int, int]
    feasibility: tuple[Violation, ...]


def context_chain(ctx: PlacementContext, theta5: float, theta6: float) -> VirtualChain:
    return build_chain(
        ctx.shoulder, ctx.theta_04, theta5, theta6, ctx.upper_len, ctx.fore_len, ctx.com
    )


def torque_signs(chain: VirtualChain, v: Vec2, magnitudes: tuple[float, float, float]) -> TorqueSet:
    """Signed torques that make every per-joint force term push along v.

    Each sign is +1 when that joint's lever-sum unit direction has a
    non-negative dot product with v, else -1, so each term of F.v is
    s_i * |tau_i| / lever_i * |u_i . v| >= 0.
    """
    u5, u6, u7 = chain.unit_directions()
    s5 = 1.0 if u5.dot(v) >= 0.0 else -1.0
    s6 = 1.0 if u6.dot(v) >= 0.0 else -1.0
    s7 = 1.0 if u7.dot(v) >= 0.0 else -1.0
    return TorqueSet(s5 * magnitudes[0], s6 * magnitudes[1], s7 * magnitudes[2])


def objective(theta5: float, theta6: float, ctx: PlacementContext, config: ObjectiveConfig) -> float:
    """Single-point objective; raises SingularChain on degenerate levers."""
    chain = context_chain(ctx, theta5, theta6)
    torques = torque_signs(chain, ctx.v, config.torque_magnitudes)
    if config.force_model == "lsq":
        force = arm_force_lsq(chain, torques)
    else:
        force = arm_force_expanded(chain, torques)
    return force.dot(ctx.v) - config.a * abs(math.cos(theta6))


def grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid lo, lo+step, ... reaching hi when the span divides."""
    if step <= 0.0:
        raise ValueError("grid step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1 if hi > lo else 1
    return lo + step * np.arange(n, dtype=float)


def evaluate_grid(
    ctx: PlacementContext,
    limits: JointLimits,
    config: ObjectiveConfig,
    robot: RobotParams | None = None,
    floor_y: float = 0.0,
    robot_base: Vec2 | None = None,
    constrained: bool = False,
) -> ObjectiveLandscape:
    """Evaluate the objective over the full (theta_5, theta_6) grid.

    Singular cells are recorded as ineligible (NaN objective) instead of
    raising. With constrained=True, cells whose handle violates the robot
    reach or height window are evaluated but excluded from eligibility.
    """
    t5 = grid_axis(limits.theta5_min, limits.theta5_max, config.grid_step)
    t6 = grid_axis(limits.theta6_min, limits.theta6_max, config.grid_step)
    n5, n6 = t5.size, t6.size

    obj = np.empty((n5, n6), dtype=float)
    eligible = np.empty((n5, n6), dtype=bool)

    sx, sy = ctx.shoulder.x, ctx.shoulder.y
    cx, cy = ctx.com.x, ctx.com.y
    vx, vy = ctx.v.x, ctx.v.y
    l5, l6 = ctx.upper_len, ctx.fore_len
    m5, m6, m7 = config.torque_magnitudes
    use_lsq = config.force_model == "lsq"

    # Shoulder lever does not depend on the grid point.
    rcx, rcy = cx - sx, cy - sy
    d5 = math.hypot(rcx, rcy)
    theta_com = math.atan2(rcy, rcx)
    t5_raw = -math.sin(theta_com) * vx + math.cos(theta_com) * vy
    t5_term = abs(t5_raw)

    if d5 < EPS_SINGULAR:
        obj.fill(np.nan)
        eligible.fill(False)
        return ObjectiveLandscape(theta5=t5, theta6=t6, objective=obj, eligible=eligible)

    pen = config.a * np.abs(np.cos(t6))[None, :]

    rows_per_block = max(1, _BLOCK_CELLS // max(n6, 1))
    for lo in range(0, n5, rows_per_block):
        hi = min(lo + rows_per_block, n5)
        phi5 = (ctx.theta_04 + t5[lo:hi])[:, None]
        phi6 = phi5 + t6[None, :]
        ex = sx + l5 * np.cos(phi5)
        ey = sy + l5 * np.sin(phi5)
        hx = ex + l6 * np.cos(phi6)
        hy = ey + l6 * np.sin(phi6)

        d6 = np.hypot(cx - ex, cy - ey)
        d7 = np.hypot(cx - hx, cy - hy)
        singular = (d6 < EPS_SINGULAR) | (d7 < EPS_SINGULAR)
        d6s = np.where(singular, 1.0, np.broadcast_to(d6, singular.shape))
        d7s = np.where(singular, 1.0, d7)

        c6 = np.clip((l5 * l5 + d6 * d6 - d5 * d5) / (2.0 * l5 * d6s), -1.0, 1.0)
        c7 = np.clip((l6 * l6 + d7 * d7 - d6 * d6) / (2.0 * l6 * d7s), -1.0, 1.0)
        th6c = phi5 - math.pi - np.arccos(c6)
        th7c = phi6 - math.pi + np.arccos(c7)
        t6_term = -np.sin(th6c) * vx + np.cos(th6c) * vy
        t7_term = -np.sin(th7c) * vx + np.cos(th7c) * vy

        ok = ~singular
        if use_lsq:
            s5t = 1.0 if t5_raw >= 0.0 else -1.0
            s6t = np.where(t6_term >= 0.0, 1.0, -1.0)
            s7t = np.where(t7_term >= 0.0, 1.0, -1.0)
            # Jacobian columns, each the +90 degree rotation of joint-to-COM.
            c5x, c5y = -(cy - sy), cx - sx
            c6x, c6y = -(cy - ey), cx - ex
            c7x, c7y = -(cy - hy), cx - hx
            a11 = c5x * c5x + c6x * c6x + c7x * c7x
            a12 = c5x * c5y + c6x * c6y + c7x * c7y
            a22 = c5y * c5y + c6y * c6y + c7y * c7y
            bx = m5 * s5t * c5x + m6 * s6t * c6x + m7 * s7t * c7x
            by = m5 * s5t * c5y + m6 * s6t * c6y + m7 * s7t * c7y
            tr = a11 + a22
            disc = np.sqrt((a11 - a22) ** 2 + 4.0 * a12 * a12)
            lam_min = 0.5 * (tr - disc)
            lam_max = 0.5 * (tr + disc)
            ok &= lam_min > 0.0
            ok &= lam_max <= COND_LIMIT * np.where(lam_min > 0.0, lam_min, 1.0)
            det = np.where(ok, a11 * a22 - a12 * a12, 1.0)
            fx = (a22 * bx - a12 * by) / det
            fy = (a11 * by - a12 * bx) / det
            fv = fx * vx + fy * vy
        else:
            fv = m5 / d5 * t5_term + m6 / d6s * np.abs(t6_term) + m7 / d7s * np.abs(t7_term)

        block = fv - pen
        block[~ok] = np.nan
        if constrained and robot is not None:
            lo_h = floor_y + robot.handle_height_range[0]
            hi_h = floor_y + robot.handle_height_range[1]
            ok = ok & (hy >= lo_h) & (hy <= hi_h)
            if robot_base is not None:
                ok = ok & (np.hypot(hx - robot_base.x, hy - robot_base.y) <= robot.reach_limit)
        obj[lo:hi] = block
        eligible[lo:hi] = ok

    return ObjectiveLandscape(theta5=t5, theta6=t6, objective=obj, eligible=eligible)


def argmax_lexicographic(landscape: ObjectiveLandscape) -> tuple[int, int]:
    """Indices of the best eligible cell.

    Exact-value ties resolve to the smallest theta_6, then the smallest
    theta_5, matching a sequential scan in that order regardless of how
    the grid was evaluated.
    """
    vals = np.where(landscape.eligible, landscape.objective, -np.inf)
    best = vals.max() if vals.size else -np.inf
    if not np.isfinite(best):
        raise NoFeasiblePoint("every grid point is singular or excluded")
    i5s, i6s = np.nonzero(vals == best)
    k = np.lexsort((i5s, i6s))[0]
    return int(i5s[k]), int(i6s[k])


def handle_position(
    shoulder: Vec2, theta_04: float, theta5: float, theta6: float, segments: SegmentSet
) -> Vec2:
    """Handle point implied by the arm angles: shoulder + r5 + r6."""
    phi5 = theta_04 + theta5
    return (
        shoulder
        + segments.length(UPPER_ARM) * unit(phi5)
        + segments.length(FOREARM) * unit(phi5 + theta6)
    )


def feasibility_check(
    placement: Placement,
    robot: RobotParams,
    floor_y: float,
    shoulder: Vec2 | None = None,
    arm_reach: float | None = None,
    robot_base: Vec2 | None = None,
) -> list[Violation]:
    """Robot-side feasibility findings for a placement.

    The reach check runs only when a robot base point is supplied; a
    mobile base can otherwise relocate freely. Findings never alter the
    optimum; constrained search handles that during evaluation.
    """
    out: list[Violation] = []
    h = placement.handle
    height = h.y - floor_y
    lo, hi = robot.handle_height_range
    if height < lo or height > hi:
        out.append(Violation(
            kind="handle_height",
            message=f"handle {height:.3f} m above floor is outside [{lo:.3f}, {hi:.3f}] m",
            value=height,
            limit=lo if height < lo else hi,
        ))
    if robot_base is not None:
        dist = (h - robot_base).norm()
        if dist > robot.reach_limit:
            out.append(Violation(
                kind="robot_reach",
                message=f"handle is {dist:.3f} m from the robot base, beyond {robot.reach_limit:.3f} m",
                value=dist,
                limit=robot.reach_limit,
            ))
    if shoulder is not None and arm_reach is not None:
        dist = (h - shoulder).norm()
        if dist > arm_reach + 1e-9:
            out.append(Violation(
                kind="arm_reach",
                message=f"handle is {dist:.3f} m from the shoulder, beyond the {arm_reach:.3f} m arm",
                value=dist,
                limit=arm_reach,
            ))
    return out


def optimize_placement(
    ctx: PlacementContext,
    limits: JointLimits,
    config: ObjectiveConfig,
    robot: RobotParams | None = None,
    floor_y: float = 0.0,
    robot_base: Vec2 | None = None,
    constrained: bool = False,
) -> tuple[Placement, ObjectiveLandscape]:
    """Exhaustive grid search for the best handle placement.

    Returns the placement together with the full landscape so reports and
    renderings can reuse the evaluations. The placement's objective_value
    is the grid maximum itself, so it dominates every eligible cell
    exactly.
    """
    landscape = evaluate_grid(
        ctx, limits, config,
        robot=robot, floor_y=floor_y, robot_base=robot_base, constrained=constrained,
    )
    i5, i6 = argmax_lexicographic(landscape)
    theta5 = float(landscape.theta5[i5])
    theta6 = float(landscape.theta6[i6])

    chain = context_chain(ctx, theta5, theta6)
    torques = torque_signs(chain, ctx.v, config.torque_magnitudes)
    if config.force_model == "lsq":
        force = arm_force_lsq(chain, torques)
    else:
        force = arm_force_expanded(chain, torques)
    signs = (
        1 if torques.tau5 >= 0 else -1,
        1 if torques.tau6 >= 0 else -1,
        1 if torques.tau7 >= 0 else -1,
    )
    placement = Placement(
        theta5_opt=theta5,
        theta6_opt=theta6,
        handle=chain.handle,
        objective_value=float(landscape.objective[i5, i6]),
        f_arm=force,
        torque_signs=signs,
        feasibility=(),
    )
    arm_reach = ctx.upper_len + ctx.fore_len
    if robot is not None:
        placement = replace(placement, feasibility=tuple(feasibility_check(
            placement, robot, floor_y,
            shoulder=ctx.shoulder, arm_reach=arm_reach, robot_base=robot_base,
        )))
    assert (placement.handle - ctx.shoulder).norm() <= arm_reach + 1e-12
    return placement, landscape
