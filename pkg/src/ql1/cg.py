"""Projected conjugate gradient on the orthant model over the free subspace.

A cycle is anchored at the point where it starts: the anchor's sign
vector defines a smooth quadratic model that agrees with the objective
everywhere on the anchor's orthant, and the anchor's zero coordinates
define the subspace the iteration is projected onto. The residual
recurrence keeps the model gradient available at every iterate, so
objective values, subgradients, and the gradient handed back to the
first-order phase all cost zero extra matrix-vector products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ql1.problem import CountingOperator


class CurvatureBreak(Exception):
    """Raised when d'Ad is numerically nonpositive; the cycle must end."""


@dataclass
class CGState:
    x: np.ndarray          # current iterate; zero wherever the anchor is zero
    r: np.ndarray          # Ax - b + tau*sign(anchor), maintained by recurrence
    rho: np.ndarray        # r projected onto the free subspace
    d: np.ndarray          # search direction, supported on the free subspace
    anchor: np.ndarray     # point where the cycle started
    anchor_sign: np.ndarray
    rho_dot: float         # cached r'rho = ||rho||^2
    last_ad: np.ndarray | None = None   # A d of the step that produced this state
    last_alpha: float = 0.0             # steplength of that step

    def smooth_grad(self, b: np.ndarray, tau: float) -> np.ndarray:
        """Gradient Ax - b at the current iterate, from the cached residual."""
        return self.r - tau * self.anchor_sign

    def objective(self, b: np.ndarray, tau: float) -> float:
        """F at the current iterate with zero extra matrix-vector products."""
        ax = self.r + b - tau * self.anchor_sign
        return 0.5 * float(self.x @ ax) - float(b @ self.x) + tau * float(np.abs(self.x).sum())


def init_cg_cycle(x, g, tau: float) -> CGState:
    """Start a cycle at x with smooth gradient g = Ax - b already known."""
    x = np.asarray(x, dtype=np.float64).copy()
    g = np.asarray(g, dtype=np.float64)
    sign = np.sign(x)
    r = g + tau * sign
    rho = np.where(x == 0.0, 0.0, r)
    return CGState(
        x=x,
        r=r,
        rho=rho,
        d=-rho,
        anchor=x.copy(),
        anchor_sign=sign,
        rho_dot=float(rho @ rho),
    )


def cg_step(s: CGState, op: CountingOperator, curv_tol: float = 0.0):
    """One projected CG step; costs exactly one matrix-vector product.

    Returns ``(s_next, crossed)`` where ``crossed`` is True when the new
    iterate's sign pattern differs from the anchor's anywhere (a
    coordinate landing exactly at zero counts as a sign change).
    Raises :class:`CurvatureBreak` when d'Ad <= curv_tol * ||d||^2.
    """
    ad = op.apply(s.d)
    dad = float(s.d @ ad)
    if dad <= curv_tol * float(s.d @ s.d):
        raise CurvatureBreak(f"d'Ad = {dad:.3e} below curvature guard")
    alpha = s.rho_dot / dad
    x_new = s.x + alpha * s.d
    r_new = s.r + alpha * ad
    rho_new = np.where(s.anchor == 0.0, 0.0, r_new)
    rho_dot_new = float(r_new @ rho_new)
    beta = rho_dot_new / s.rho_dot
    d_new = -rho_new + beta * s.d
    crossed = bool(np.any(np.sign(x_new) != s.anchor_sign))
    s_next = CGState(
        x=x_new,
        r=r_new,
        rho=rho_new,
        d=d_new,
        anchor=s.anchor,
        anchor_sign=s.anchor_sign,
        rho_dot=rho_dot_new,
        last_ad=ad,
        last_alpha=alpha,
    )
    return s_next, crossed


def cutback_alpha(x_k, anchor, d) -> tuple[float, np.ndarray, bool]:
    """Largest steplength along d that keeps x_k on the anchor's closed orthant.

    Returns ``(alpha_b, snap_mask, moved)``. ``moved`` is False when x_k
    has already left the anchor's orthant, in which case the point is
    kept unchanged. ``snap_mask`` marks the coordinates that reach the
    orthant boundary at alpha_b and must land at exactly 0.0. With no
    boundary-bound coordinate the full step alpha_b = 1 is returned.
    """
    x_k = np.asarray(x_k, dtype=np.float64)
    anchor = np.asarray(anchor, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    anchor_sign = np.sign(anchor)
    if np.any(np.sign(x_k) != anchor_sign):
        return 0.0, np.zeros(x_k.shape, dtype=bool), False
    crossing = (anchor != 0.0) & (np.sign(d) == -anchor_sign) & (x_k * d < 0.0)
    if not np.any(crossing):
        return 1.0, np.zeros(x_k.shape, dtype=bool), True
    ratios = np.full(x_k.shape, np.inf)
    ratios[crossing] = -x_k[crossing] / d[crossing]
    alpha_b = float(ratios[crossing].min())
    snap = crossing & (ratios <= alpha_b * (1.0 + 1e-12))
    return alpha_b, snap, True


def cutback(x_k, anchor, d) -> np.ndarray:
    """Truncate a rejected crossing step to the anchor orthant's boundary.

    If x_k itself still lies on the anchor's orthant, the result is
    x_k + alpha_b*d for the largest sign-preserving alpha_b, with the
    boundary-hitting coordinates snapped to exactly 0.0; otherwise x_k
    is returned unchanged.
    """
    x_k = np.asarray(x_k, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    alpha_b, snap, moved = cutback_alpha(x_k, anchor, d)
    if not moved:
        return x_k.copy()
    out = x_k + alpha_b * d
    out[snap] = 0.0
    return out


def orthant_model_value(x, anchor, ax, b, tau: float) -> float:
    """Model value 1/2 x'(Ax) + (-b + tau*sign(anchor))'x; Ax supplied, no products.

    Equals F(x) whenever sign(x) matches sign(anchor).
    """
    x = np.asarray(x, dtype=np.float64)
    ax = np.asarray(ax, dtype=np.float64)
    shifted = -np.asarray(b, dtype=np.float64) + tau * np.sign(anchor)
    return 0.5 * float(x @ ax) + float(shifted @ x)


def sufficient_decrease(f_next: float, f_curr: float, v_curr, c: float) -> bool:
    """True iff f_next <= f_curr - c * ||v_curr||^2."""
    v_curr = np.asarray(v_curr, dtype=np.float64)
    return f_next <= f_curr - c * float(v_curr @ v_curr)
