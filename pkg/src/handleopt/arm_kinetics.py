"""Static force analysis of the handle-anchored arm linkage.

Once a handle position is fixed, the grasping arm plus a virtual link
from the shoulder to the consolidated body COM form a planar three-bar
chain whose base joint sits at the handle. Joint torques at the handle
(tau_7), elbow (tau_6) and shoulder (tau_5) then produce a force at the
COM. Two force models are provided:

* arm_force_expanded: per-joint lever sum. Each torque contributes
  (tau_i / lever_i) along the unit direction (-sin a_i, cos a_i), where
  a_i is a subsidiary angle built from the chain geometry via the law of
  cosines. This is the model the optimizer uses by default.
* arm_force_lsq: least-squares solution F = (J J^T)^-1 J tau of the
  overdetermined statics J^T F = tau, with J the 2x3 chain Jacobian.

The two maps are not algebraically identical for a general chain; tests
record their ratio but the package does not pretend they agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .body_model import FOREARM, UPPER_ARM, SegmentSet, Vec2, unit
from .errors import IllConditioned, SingularChain, ZeroTorque

# Levers and law-of-cosines denominators below this are treated as singular.
EPS_SINGULAR = 1e-6
# Condition-number ceiling for the 2x2 least-squares system.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class TorqueSet:
    """Signed joint torques in newton meters."""

    tau5: float
    tau6: float
    tau7: float

    def norm(self) -> float:
        return math.sqrt(self.tau5 ** 2 + self.tau6 ** 2 + self.tau7 ** 2)


@dataclass(frozen=True)
class VirtualChain:
    """Geometry of the three-bar chain for one arm configuration.

    r5 runs shoulder to elbow, r6 elbow to handle, r_com shoulder to COM.
    lever5/6/7 are the distances from shoulder, elbow and handle to the
    COM. theta_com is the world angle of r_com; theta_6com and theta_7com
    are the subsidiary lever angles for the elbow and handle torque terms.
    """

    shoulder: Vec2
    theta_04: float
    theta5: float
    theta6: float
    r5: Vec2
    r6: Vec2
    r_com: Vec2
    handle: Vec2
    lever5: float
    lever6: float
    lever7: float
    theta_com: float
    theta_6com: float
    theta_7com: float

    @property
    def elbow(self) -> Vec2:
        return self.shoulder + self.r5

    @property
    def com(self) -> Vec2:
        return self.shoulder + self.r_com

    def unit_directions(self) -> tuple[Vec2, Vec2, Vec2]:
        """Force direction of each torque term (shoulder, elbow, handle)."""
        return (
            Vec2(-math.sin(self.theta_com), math.cos(self.theta_com)),
            Vec2(-math.sin(self.theta_6com), math.cos(self.theta_6com)),
            Vec2(-math.sin(self.theta_7com), math.cos(self.theta_7com)),
        )


def _subsidiary_angles(
    theta_04: float,
    theta5: float,
    theta6: float,
    upper_len: float,
    fore_len: float,
    lever5: float,
    lever6: float,
    lever7: float,
) -> tuple[float, float]:
    """Lever angles for the elbow and handle terms via the law of cosines.

    Arguments to arccos are clamped to [-1, 1]; degenerate triangles land
    on the boundary instead of raising.
    """
    den6 = 2.0 * upper_len * lever6
    den7 = 2.0 * fore_len * lever7
    if den6 < EPS_SINGULAR or den7 < EPS_SINGULAR:
        raise SingularChain(
            f"law-of-cosines denominator collapsed (den6={den6:.3e}, den7={den7:.3e})"
        )
    c6 = (upper_len ** 2 + lever6 ** 2 - lever5 ** 2) / den6
    c7 = (fore_len ** 2 + lever7 ** 2 - lever6 ** 2) / den7
    c6 = min(1.0, max(-1.0, c6))
    c7 = min(1.0, max(-1.0, c7))
    theta_6com = theta_04 + theta5 - math.pi - math.acos(c6)
    theta_7com = theta_04 + theta5 + theta6 - math.pi + math.acos(c7)
    return theta_6com, theta_7com


def build_chain(
    shoulder: Vec2,
    theta_04: float,
    theta5: float,
    theta6: float,
    upper_len: float,
    fore_len: float,
    com: Vec2,
) -> VirtualChain:
    """Assemble the chain from explicit arm lengths."""
    phi5 = theta_04 + theta5
    phi6 = phi5 + theta6
    r5 = upper_len * unit(phi5)
    r6 = fore_len * unit(phi6)
    r_com = com - shoulder
    handle = shoulder + r5 + r6

    lever5 = r_com.norm()
    lever6 = (r_com - r5).norm()
    lever7 = (r_com - r5 - r6).norm()
    for name, lever in (("shoulder", lever5), ("elbow", lever6), ("handle", lever7)):
        if lever < EPS_SINGULAR:
            raise SingularChain(f"{name}-to-COM lever {lever:.3e} m is below {EPS_SINGULAR:.0e}")

    theta_6com, theta_7com = _subsidiary_angles(
        theta_04, theta5, theta6, upper_len, fore_len, lever5, lever6, lever7
    )
    return VirtualChain(
        shoulder=shoulder, theta_04=theta_04, theta5=theta5, theta6=theta6,
        r5=r5, r6=r6, r_com=r_com, handle=handle,
        lever5=lever5, lever6=lever6, lever7=lever7,
        theta_com=r_com.angle(), theta_6com=theta_6com, theta_7com=theta_7com,
    )


def build_virtual_chain(
    shoulder: Vec2,
    theta_04: float,
    theta5: float,
    theta6: float,
    segments: SegmentSet,
    com: Vec2,
) -> VirtualChain:
    """Assemble the chain using the arm lengths of a segment set."""
    return build_chain(
        shoulder, theta_04, theta5, theta6,
        segments.length(UPPER_ARM), segments.length(FOREARM), com,
    )


def com_link_angles(chain: VirtualChain) -> tuple[float, float]:
    """Recompute (theta_6com, theta_7com) from the chain's stored geometry."""
    return _subsidiary_angles(
        chain.theta_04, chain.theta5, chain.theta6,
        chain.r5.norm(), chain.r6.norm(),
        chain.lever5, chain.lever6, chain.lever7,
    )


def arm_force_expanded(chain: VirtualChain, torques: TorqueSet) -> Vec2:
    """Per-joint lever sum: F = sum_i (tau_i / lever_i) * u_i."""
    u5, u6, u7 = chain.unit_directions()
    return (
        (torques.tau5 / chain.lever5) * u5
        + (torques.tau6 / chain.lever6) * u6
        + (torques.tau7 / chain.lever7) * u7
    )


def arm_jacobian(chain: VirtualChain) -> np.ndarray:
    """2x3 Jacobian of the COM point w.r.t. the chain's joint angles.

    The chain is anchored at the handle, so the columns are ordered
    (handle joint, elbow, shoulder) to match a torque vector
    (tau_7, tau_6, tau_5). Each column is the +90 degree rotation of the
    vector from that joint to the COM; its magnitude equals the lever.
    """
    com = chain.com
    cols = (com - chain.handle, com - chain.elbow, com - chain.shoulder)
    return np.array(
        [[-c.y for c in cols], [c.x for c in cols]], dtype=float
    )


def arm_force_lsq(chain: VirtualChain, torques: TorqueSet) -> Vec2:
    """Least-squares force: F = (J J^T)^-1 J tau, tau = (tau_7, tau_6, tau_5)."""
    jac = arm_jacobian(chain)
    tau = np.array([torques.tau7, torques.tau6, torques.tau5])
    jjt = jac @ jac.T
    if np.linalg.cond(jjt) > COND_LIMIT:
        raise IllConditioned(
            f"J J^T condition number exceeds {COND_LIMIT:.0e}; levers are nearly parallel"
        )
    f = np.linalg.solve(jjt, jac @ tau)
    return Vec2(float(f[0]), float(f[1]))


def mechanical_advantage(force: Vec2, torques: TorqueSet) -> float:
    """Force magnitude per unit torque magnitude, |F| / |tau|."""
    n = torques.norm()
    if n == 0.0:
        raise ZeroTorque("mechanical advantage is undefined for zero torques")
    return force.norm() / n


def directed_advantage(force: Vec2, v: Vec2) -> float:
    """Force component along a unit direction v, as the inner product F.v."""
    assert abs(v.norm() - 1.0) <= 1e-9, "v must be unit length"
    value = force.dot(v)
    # Self-check: the inner product must match |F||v|cos(angle between).
    theta_vf = force.angle() - v.angle()
    assert abs(value - force.norm() * v.norm() * math.cos(theta_vf)) <= 1e-9
    return value
