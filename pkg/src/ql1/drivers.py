"""Full solver loops, termination policies, and trace recording.

Four solvers share one work metric: every record in a trace corresponds
to one accepted constitutive step, and its ``mv`` field is the running
matrix-vector-product count (including spectral-norm estimation and
rejected line-search trials, which consume products without producing
records). For the interleaved solvers the residual recurrence of the CG
cycle supplies gradients and objective values for free, so each CG step
and each line-search trial costs exactly one product.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ql1.cg import (
    CurvatureBreak,
    cg_step,
    cutback_alpha,
    init_cg_cycle,
    sufficient_decrease,
)
from ql1.first_order import LineSearchMemory, bb_ls_step, ista_step, subspace_ista_step
from ql1.problem import CountingOperator, QuadraticProblem
from ql1.rng import Rng
from ql1.subgrad import (
    gradient_balance,
    min_norm_subgrad,
    release_grad,
    support_grad,
    support_grad_map,
)

ALGORITHMS = ("iicg1", "iicg2", "fista", "istabb")

STEP_ISTA = "ISTA"
STEP_SUBISTA = "SUBISTA"
STEP_CG = "CG"
STEP_CUTBACK = "CUTBACK"
STEP_LSFALLBACK = "LSFALLBACK"

STATUS_CONVERGED = "converged"
STATUS_BUDGET = "budget"
STATUS_STALLED = "stalled"

_STALL_EPS = 1e-16
_STALL_MV = 1000


@dataclass
class SolverConfig:
    """Solver selection and tolerances.

    ``termination`` is "vnorm" (stop when the inf-norm of the
    minimum-norm subgradient falls below tol * max(1, its value at x0))
    or "fstar" (stop when the accuracy ratio against ``f_star`` is at
    most tol; ``f_star`` must then be supplied). ``alpha_policy`` of
    None picks the per-algorithm default: constant 1/L for FISTA, BB
    line search otherwise. ``l_value`` injects an exact largest
    eigenvalue and skips power iteration (theory-check runs).
    """

    algorithm: str = "iicg2"
    tol: float = 1e-6
    termination: str = "vnorm"
    f_star: float | None = None
    c: float = 1e-4
    alpha_policy: str | None = None
    alpha_bal: float | None = None
    bal_factor: float = 1.0
    mv_budget: int = 50000
    ls_window: int = 5
    ls_xi: float = 0.005
    ls_max_halvings: int = 60
    theory_checks: bool = False
    l_value: float | None = None
    l_seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.termination not in ("vnorm", "fstar"):
            raise ValueError(f"unknown termination {self.termination!r}")
        if self.termination == "fstar" and self.f_star is None:
            raise ValueError("fstar termination requires f_star")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.mv_budget < 1:
            raise ValueError("mv_budget must be at least 1")

    def policy(self) -> str:
        if self.alpha_policy is not None:
            return self.alpha_policy
        return "constant" if self.algorithm == "fista" else "bb"


@dataclass
class TraceRecord:
    mv: int
    k: int
    f: float
    nnz: int
    step: str


@dataclass
class RunTrace:
    """Per-step history of one solve plus its outcome."""

    records: list[TraceRecord]
    final_x: np.ndarray
    status: str
    mv_setup: int
    f0: float
    v0_norm: float
    l_est: float
    xs: list[np.ndarray] | None = None

    @property
    def mv_total(self) -> int:
        return self.records[-1].mv if self.records else self.mv_setup

    @property
    def f_final(self) -> float:
        return self.records[-1].f if self.records else self.f0

    @property
    def f_best(self) -> float:
        return min((r.f for r in self.records), default=self.f0)


def accuracy(f_k: float, f_star: float) -> float:
    """(f_k - f_star) / max(|f_star|, 1e-12)."""
    return (f_k - f_star) / max(abs(f_star), 1e-12)


def estimate_max_eig(op: CountingOperator, seed: int = 0) -> float:
    """Largest-eigenvalue estimate by power iteration, times a 1.01 safety factor.

    Starts from a seeded random unit vector and stops when the Rayleigh
    quotient's relative change is at most 1e-4, or after 200 iterations.
    Every product is charged to the operator's counter. A zero operator
    yields 1.0 (any steplength is then valid).
    """
    if op.n < 1:
        raise ValueError("operator dimension must be at least 1")
    rng = Rng(seed)
    v = rng.normals(op.n)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        v = np.ones(op.n)
        norm = float(np.linalg.norm(v))
    v /= norm
    rq = 0.0
    rq_prev = None
    for _ in range(200):
        w = op.apply(v)
        rq = float(v @ w)
        wnorm = float(np.linalg.norm(w))
        if wnorm == 0.0:
            return 1.0
        if rq_prev is not None and abs(rq - rq_prev) <= 1e-4 * abs(rq):
            break
        rq_prev = rq
        v = w / wnorm
    if rq <= 0.0:
        return 1.0
    return 1.01 * rq


class _Run:
    """Bookkeeping shared by the solver loops: records, stop tests, best point."""

    def __init__(self, problem: QuadraticProblem, cfg: SolverConfig):
        self.problem = problem
        self.cfg = cfg
        self.mv_start = problem.op.mv_count
        self.records: list[TraceRecord] = []
        self.xs: list[np.ndarray] | None = [] if cfg.theory_checks else None
        self.k = 0
        self.status: str | None = None
        self.mv_setup = 0
        self.f0 = 0.0
        self.v0_norm = 0.0
        self.l_est = 1.0
        self.best_f = np.inf
        self.best_x: np.ndarray | None = None
        self.last_x: np.ndarray | None = None
        self._stall_f = 0.0
        self._stall_mv = 0

    @property
    def mv(self) -> int:
        return self.problem.op.mv_count - self.mv_start

    def begin(self, x0: np.ndarray, f0: float, g0: np.ndarray) -> None:
        self.mv_setup = self.mv
        self.f0 = f0
        v0 = min_norm_subgrad(x0, g0, self.problem.tau)
        self.v0_norm = float(np.abs(v0).max()) if v0.size else 0.0
        self.best_f = f0
        self.best_x = x0.copy()
        self.last_x = x0.copy()
        self._stall_f = f0
        self._stall_mv = self.mv

    def record(self, x: np.ndarray, f: float, step: str) -> None:
        self.k += 1
        self.records.append(
            TraceRecord(mv=self.mv, k=self.k, f=f, nnz=int(np.count_nonzero(x)), step=step)
        )
        if self.xs is not None:
            self.xs.append(x.copy())
        if f < self.best_f:
            self.best_f = f
            self.best_x = x.copy()
        self.last_x = x

    def converged(self, x: np.ndarray, g: np.ndarray, f: float) -> bool:
        cfg = self.cfg
        if cfg.termination == "fstar":
            return accuracy(f, cfg.f_star) <= cfg.tol
        v = min_norm_subgrad(x, g, self.problem.tau)
        vnorm = float(np.abs(v).max()) if v.size else 0.0
        return vnorm <= cfg.tol * max(1.0, self.v0_norm)

    def check_stop(self, x: np.ndarray, g: np.ndarray, f: float) -> bool:
        """Updates status after a step; True means the solve is over."""
        if self.converged(x, g, f):
            self.status = STATUS_CONVERGED
            return True
        if abs(f - self._stall_f) >= _STALL_EPS * max(1.0, abs(self._stall_f)):
            self._stall_f = f
            self._stall_mv = self.mv
        elif self.mv - self._stall_mv >= _STALL_MV:
            self.status = STATUS_STALLED
            return True
        if self.mv >= self.cfg.mv_budget:
            self.status = STATUS_BUDGET
            return True
        return False

    def finish(self) -> RunTrace:
        if self.status == STATUS_CONVERGED:
            final_x = self.last_x
        else:
            final_x = self.best_x
        return RunTrace(
            records=self.records,
            final_x=np.asarray(final_x, dtype=np.float64).copy(),
            status=self.status,
            mv_setup=self.mv_setup,
            f0=self.f0,
            v0_norm=self.v0_norm,
            l_est=self.l_est,
            xs=self.xs,
        )


def _start_point(problem: QuadraticProblem, run: _Run, x0) -> tuple[np.ndarray, np.ndarray, float]:
    """Initial iterate with its gradient and objective.

    The default start x0 = 0 has F(0) = 0 and g(0) = -b with no operator
    application; an explicit warm start pays one product.
    """
    if x0 is None:
        x = np.zeros(problem.n)
        return x, -problem.b.copy(), 0.0
    x = np.asarray(x0, dtype=np.float64).copy()
    ax = problem.op.apply(x)
    return x, ax - problem.b, problem.objective(x, ax=ax)


def _setup(problem: QuadraticProblem, cfg: SolverConfig, x0):
    run = _Run(problem, cfg)
    x, g, f = _start_point(problem, run, x0)
    l_est = cfg.l_value if cfg.l_value is not None else estimate_max_eig(problem.op, cfg.l_seed)
    run.l_est = l_est
    run.begin(x, f, g)
    return run, x, g, f, l_est


def _solve_iicg(problem: QuadraticProblem, cfg: SolverConfig, variant: int, x0=None) -> RunTrace:
    op, b, tau = problem.op, problem.b, problem.tau
    run, x, g, f, l_est = _setup(problem, cfg, x0)
    alpha_const = 1.0 / l_est
    alpha_bal = cfg.alpha_bal if cfg.alpha_bal is not None else 1.0 / (cfg.bal_factor * l_est)
    curv_tol = 1e-14 * l_est
    rho_tol = 1e-14 * (1.0 + float(np.linalg.norm(b)))
    if run.check_stop(x, g, f):
        return run.finish()

    mem = LineSearchMemory(m=cfg.ls_window, xi=cfg.ls_xi, max_halvings=cfg.ls_max_halvings)
    mem.seed(f)
    use_bb = cfg.policy() == "bb"
    x_prev: np.ndarray | None = None
    g_prev: np.ndarray | None = None

    while run.status is None:
        # First-order phase. Variant 2 refines the current support when
        # the balance condition holds and releases variables otherwise;
        # variant 1 always takes the full step.
        if variant == 2:
            rel = release_grad(x, g, tau)
            smap = support_grad_map(x, g, tau, alpha_bal)
            mode = "subspace" if gradient_balance(rel, smap) else "full"
        else:
            mode = "full"
        if use_bb:
            res = bb_ls_step(problem, x, g, x_prev, g_prev, mode, mem, alpha_const)
            x_prev, g_prev = x, g
            x, g, f = res.x, res.g, res.f
            if res.fallback:
                step_name = STEP_LSFALLBACK
            else:
                step_name = STEP_SUBISTA if mode == "subspace" else STEP_ISTA
        else:
            stepper = subspace_ista_step if mode == "subspace" else ista_step
            x_new = stepper(x, g, tau, alpha_const)
            ax_new = op.apply(x_new)
            x_prev, g_prev = x, g
            f = problem.objective(x_new, ax=ax_new)
            g = ax_new - b
            x = x_new
            step_name = STEP_SUBISTA if mode == "subspace" else STEP_ISTA
        run.record(x, f, step_name)
        if run.check_stop(x, g, f):
            break

        # Subspace CG cycle anchored at the fresh first-order point.
        st = init_cg_cycle(x, g, tau)
        while run.status is None:
            g_cur = st.smooth_grad(b, tau)
            rel = release_grad(st.x, g_cur, tau)
            smap = support_grad_map(st.x, g_cur, tau, alpha_bal)
            if not gradient_balance(rel, smap):
                break
            if float(np.linalg.norm(st.rho)) <= rho_tol:
                break
            v_pre = rel + support_grad(st.x, g_cur, tau)
            f_pre = f
            try:
                st_new, crossed = cg_step(st, op, curv_tol)
            except CurvatureBreak:
                break
            f_new = st_new.objective(b, tau)
            if crossed and not sufficient_decrease(f_new, f_pre, v_pre, cfg.c):
                alpha_b, snap, moved = cutback_alpha(st.x, st.anchor, st.d)
                if moved:
                    x_c = st.x + alpha_b * st.d
                    x_c[snap] = 0.0
                else:
                    x_c = st.x.copy()
                r_c = st.r + alpha_b * st_new.last_ad
                x_prev, g_prev = x, g
                x = x_c
                g = r_c - tau * st.anchor_sign
                ax_c = r_c + b - tau * st.anchor_sign
                f = 0.5 * float(x @ ax_c) - float(b @ x) + tau * float(np.abs(x).sum())
                run.record(x, f, STEP_CUTBACK)
                run.check_stop(x, g, f)
                break
            x_prev, g_prev = x, g
            st = st_new
            x = st.x
            g = st.smooth_grad(b, tau)
            f = f_new
            run.record(x, f, STEP_CG)
            if run.check_stop(x, g, f):
                break

    return run.finish()


def _solve_fista(problem: QuadraticProblem, cfg: SolverConfig, x0=None) -> RunTrace:
    op, b, tau = problem.op, problem.b, problem.tau
    run, x, g, f, l_est = _setup(problem, cfg, x0)
    alpha = 1.0 / l_est
    if run.check_stop(x, g, f):
        return run.finish()

    # A y is carried through the momentum recurrence, so each iteration
    # costs the single product A x_new.
    ax = g + b
    y = x.copy()
    y_ax = ax.copy()
    t = 1.0
    while run.status is None:
        g_y = y_ax - b
        x_new = ista_step(y, g_y, tau, alpha)
        ax_new = op.apply(x_new)
        f_new = problem.objective(x_new, ax=ax_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        theta = (t - 1.0) / t_new
        y = x_new + theta * (x_new - x)
        y_ax = (1.0 + theta) * ax_new - theta * ax
        x, ax, t = x_new, ax_new, t_new
        g_x = ax - b
        run.record(x, f_new, STEP_ISTA)
        if run.check_stop(x, g_x, f_new):
            break
    return run.finish()


def _solve_istabb(problem: QuadraticProblem, cfg: SolverConfig, x0=None) -> RunTrace:
    run, x, g, f, l_est = _setup(problem, cfg, x0)
    alpha_const = 1.0 / l_est
    if run.check_stop(x, g, f):
        return run.finish()
    mem = LineSearchMemory(m=cfg.ls_window, xi=cfg.ls_xi, max_halvings=cfg.ls_max_halvings)
    mem.seed(f)
    x_prev: np.ndarray | None = None
    g_prev: np.ndarray | None = None
    while run.status is None:
        res = bb_ls_step(problem, x, g, x_prev, g_prev, "full", mem, alpha_const)
        x_prev, g_prev = x, g
        x, g, f = res.x, res.g, res.f
        run.record(x, f, STEP_LSFALLBACK if res.fallback else STEP_ISTA)
        if run.check_stop(x, g, f):
            break
    return run.finish()


def solve(problem: QuadraticProblem, cfg: SolverConfig, x0=None) -> RunTrace:
    """Run the configured solver from x0 (default: the zero vector)."""
    if cfg.algorithm == "iicg1":
        return _solve_iicg(problem, cfg, variant=1, x0=x0)
    if cfg.algorithm == "iicg2":
        return _solve_iicg(problem, cfg, variant=2, x0=x0)
    if cfg.algorithm == "fista":
        return _solve_fista(problem, cfg, x0=x0)
    return _solve_istabb(problem, cfg, x0=x0)


def solve_iicg1(problem: QuadraticProblem, cfg: SolverConfig, x0=None) -> RunTrace:
    return _solve_iicg(problem, cfg, variant=1, x0=x0)


def solve_iicg2(problem: QuadraticProblem, cfg: SolverConfig, x0=None) -> RunTrace:
    return _solve_iicg(problem, cfg, variant=2, x0=x0)


def solve_fista(problem: QuadraticProblem, cfg: SolverConfig, x0=None) -> RunTrace:
    return _solve_fista(problem, cfg, x0=x0)


def solve_istabb(problem: QuadraticProblem, cfg: SolverConfig, x0=None) -> RunTrace:
    return _solve_istabb(problem, cfg, x0=x0)


def reference_objective(problem: QuadraticProblem, mv_budget: int = 50000) -> float:
    """Best-known objective from a high-accuracy reference solve.

    Runs iiCG-2 with subgradient-norm termination at tol 1e-13 and four
    times the given budget, and returns the best objective seen.
    """
    cfg = SolverConfig(
        algorithm="iicg2",
        termination="vnorm",
        tol=1e-13,
        mv_budget=4 * mv_budget,
    )
    trace = solve(problem, cfg)
    return trace.f_best


def write_trace_csv(trace: RunTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mv", "k", "F", "nnz", "step"])
        for rec in trace.records:
            writer.writerow([rec.mv, rec.k, f"{rec.f:.17g}", rec.nnz, rec.step])


def read_trace_records(path) -> list[TraceRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                TraceRecord(
                    mv=int(row["mv"]),
                    k=int(row["k"]),
                    f=float(row["F"]),
                    nnz=int(row["nnz"]),
                    step=row["step"],
                )
            )
    return records
