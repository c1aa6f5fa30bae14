"""Semidefinite solvers and dual certificates for the two bound programs.

Two problem families are handled: unit-diagonal correlation programs
(maximize a symmetric bilinear form over the elliptope) and moment-matrix
programs built by :mod:`tempora.moment`.  Two independent backends solve
them: a dense primal-dual interior-point method with Nesterov-Todd scaling
and a Mehrotra-style predictor-corrector (small and medium instances), and
an operator-splitting method (ADMM) whose per-iteration cost is a single
eigendecomposition plus a class-averaging pass (large moment matrices).

Every solve carries a dual matrix lying (exactly, by construction) in the
normal space of the affine constraints.  ``verify_dual_certificate``
re-projects that matrix, measures the most negative eigenvalue of its
slack against the objective and shifts the dual value by that amount times
a rigorous trace bound (the matrix dimension for moment programs, whose
feasible diagonals sit in [0, 1]; the dimension for unit-diagonal
programs), yielding a certified upper bound that does not rely on solver
convergence claims.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .exceptions import SolverError
from .moment import MomentProblem


@dataclass(frozen=True)
class CorrelationProblem:
    """Maximize sum_ij lam_ij X_ij over unit-diagonal PSD X.

    ``coefficients`` is symmetric with zero diagonal; any diagonal weight
    is a constant (X_ii = 1) and lives in ``offset``.
    """

    coefficients: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        lam = np.asarray(self.coefficients, dtype=float)
        if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
            raise ValueError("coefficient matrix must be square")
        if not np.isfinite(lam).all():
            raise ValueError("coefficient matrix has non-finite entries")
        if np.abs(lam - lam.T).max(initial=0.0) > 1e-12 * max(
            1.0, np.abs(lam).max(initial=0.0)
        ):
            raise ValueError("coefficient matrix must be symmetric")
        if np.abs(np.diag(lam)).max(initial=0.0) > 0.0:
            raise ValueError(
                "diagonal coefficients must be folded into offset; "
                "use CorrelationProblem.from_matrix"
            )
        object.__setattr__(self, "coefficients", lam)

    @classmethod
    def from_matrix(cls, matrix) -> "CorrelationProblem":
        """Symmetrize and split the diagonal into the constant offset."""
        lam = np.asarray(matrix, dtype=float)
        lam = (lam + lam.T) / 2.0
        off = float(np.trace(lam))
        return cls(lam - np.diag(np.diag(lam)), off)

    @property
    def size(self) -> int:
        return self.coefficients.shape[0]


@dataclass
class SdpSolution:
    """Solver output: primal matrix, values, dual data and diagnostics.

    ``dual_certificate`` is a matrix in the constraint normal space whose
    slack against the objective certifies the bound; ``trace_bound`` is
    the rigorous trace cap used for certification.
    """

    matrix: np.ndarray
    primal_value: float
    dual_value: float
    dual_variables: np.ndarray | None
    dual_certificate: np.ndarray | None
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    trace_bound: float
    solver: str
    tolerance: float

    @property
    def gap(self) -> float:
        return self.dual_value - self.primal_value


@dataclass(frozen=True)
class CertificateReport:
    """Independent a-posteriori check of a dual certificate."""

    dual_value: float
    slack_min_eig: float
    trace_bound: float
    certified_bound: float
    normal_residual: float
    primal_value: float
    gap: float
    ok: bool


class _LinearMap:
    """Sparse family of symmetric constraint matrices <A_k, X> = b_k."""

    def __init__(self, m, rows, cols, vals, ids, nconstraints, b):
        self.m = m
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.vals = np.asarray(vals, dtype=float)
        self.ids = np.asarray(ids, dtype=np.int64)
        self.K = nconstraints
        self.b = np.asarray(b, dtype=float)
        self.flat = self.rows * m + self.cols

    def apply(self, X) -> np.ndarray:
        return np.bincount(
            self.ids, weights=self.vals * X.ravel()[self.flat], minlength=self.K
        )

    def adjoint(self, y) -> np.ndarray:
        out = np.bincount(
            self.flat, weights=self.vals * y[self.ids], minlength=self.m * self.m
        )
        return out.reshape(self.m, self.m)

    def schur(self, W) -> np.ndarray:
        """Dense Schur matrix H_kl = Tr(A_k W A_l W) for symmetric W."""
        r, c, v, g = self.rows, self.cols, self.vals, self.ids
        E, K = v.size, self.K
        H = np.zeros(K * K)
        block = max(1, int(4_000_000 // max(E, 1)))
        for s in range(0, E, block):
            sl = slice(s, min(E, s + block))
            left = W[np.ix_(c[sl], r)]
            right = W[np.ix_(r[sl], c)]
            T = (v[sl][:, None] * v[None, :]) * left * right
            keys = g[sl][:, None] * np.int64(K) + g[None, :]
            H += np.bincount(keys.ravel(), weights=T.ravel(), minlength=K * K)
        H = H.reshape(K, K)
        return (H + H.T) / 2.0


def _entry_triplets(i, j):
    """Triplets of the symmetric indicator with <A, X> = X_ij."""
    if i == j:
        return [(i, i, 1.0)]
    return [(i, j, 0.5), (j, i, 0.5)]


def _correlation_map(n: int) -> _LinearMap:
    idx = np.arange(n)
    return _LinearMap(n, idx, idx, np.ones(n), idx, n, np.ones(n))


def _moment_map(problem: MomentProblem) -> _LinearMap:
    rows, cols, vals, ids, b = [], [], [], [], []

    def push(k, triplets, sign):
        for (i, j, v) in triplets:
            rows.append(i)
            cols.append(j)
            vals.append(sign * v)
            ids.append(k)

    k = 0
    push(k, _entry_triplets(0, 0), 1.0)
    b.append(1.0)
    k += 1
    for (i, j) in problem.zero_entries:
        push(k, _entry_triplets(i, j), 1.0)
        b.append(0.0)
        k += 1
    for key in problem.class_keys:
        if key == ():
            continue
        positions = problem.classes[key]
        anchor = positions[0]
        for other in positions[1:]:
            push(k, _entry_triplets(*anchor), 1.0)
            push(k, _entry_triplets(*other), -1.0)
            b.append(0.0)
            k += 1
    return _LinearMap(problem.size, rows, cols, vals, ids, k, b)


def _half_powers(matrix, floor_rel=1e-14):
    """(M^{1/2}, M^{-1/2}) of a (nearly) PD symmetric matrix via its eigs."""
    w, v = numerics.sym_eig((matrix + matrix.T) / 2.0)
    floor = max(w[-1], 0.0) * floor_rel + 1e-300
    w = np.maximum(w, floor)
    sq = np.sqrt(w)
    half = (v * sq) @ v.T
    invh = (v / sq) @ v.T
    return (half + half.T) / 2.0, (invh + invh.T) / 2.0


def _max_step(inv_half, direction) -> float:
    """Largest alpha with M + alpha*D still PSD, given M^{-1/2}."""
    g = inv_half @ direction @ inv_half
    w, _ = numerics.sym_eig((g + g.T) / 2.0)
    lam = float(w[0])
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _solve_schur(H, rhs) -> np.ndarray:
    ridge = 0.0
    scale = max(float(np.trace(H)) / max(H.shape[0], 1), 1e-30)
    for attempt in range(4):
        try:
            Hr = H if ridge == 0.0 else H + ridge * np.eye(H.shape[0])
            d = numerics.solve_linear(Hr, rhs)
            # one pass of iterative refinement; keep it only if it helps
            r = rhs - Hr @ d
            try:
                d2 = d + numerics.solve_linear(Hr, r)
                if np.linalg.norm(rhs - Hr @ d2) < np.linalg.norm(r):
                    d = d2
            except ValueError:
                pass
            return d
        except ValueError:
            ridge = scale * (1e-12 if ridge == 0.0 else 0.0) + ridge * 1000.0
    raise SolverError("Schur system is numerically singular")


def _ipm_solve(C, lin, tol, max_iter, project=None):
    """NT-scaled predictor-corrector interior-point iteration.

    Maximizes <C, X> subject to lin(X) = b, X PSD; infeasible start from
    scaled identities.  Returns a state dict; convergence is judged on
    scaled primal/dual infeasibility, the relative primal-dual gap and
    complementarity.

    ``project``, when given, is the exact orthogonal projection onto the
    affine subspace {lin(X) = b}.  It is applied once on exit: the returned
    matrix then satisfies the equalities to machine precision and the
    reported primal infeasibility is its PSD deficit (max(0, -eigmin)).
    The projector also rescues late-stage primal stalls, where the dual is
    fully converged but raw equality residuals plateau near sqrt(eps).
    """
    m = C.shape[0]
    b = lin.b
    norm_b = float(np.linalg.norm(b))
    norm_c = float(np.linalg.norm(C))
    X = np.eye(m) * max(1.0, float(np.abs(b).max(initial=0.0)))
    Z = np.eye(m) * (1.0 + norm_c / max(1.0, np.sqrt(m)))
    y = np.zeros(lin.K)

    def finish(X, y, Z, it, converged):
        pv = float(np.sum(C * X))
        dv = float(b @ y)
        rp = b - lin.apply(X)
        RD = C - lin.adjoint(y) + Z
        pinf = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        dinf = float(np.linalg.norm(RD)) / (1.0 + norm_c)
        if project is not None:
            Xp = project(X)
            w, _ = numerics.sym_eig((Xp + Xp.T) / 2.0)
            psd_def = max(0.0, -float(w[0]))
            aff = float(np.linalg.norm(b - lin.apply(Xp))) / (1.0 + norm_b)
            pinf_p = max(aff, psd_def)
            if pinf_p <= max(pinf, tol):
                X = Xp
                pv = float(np.sum(C * X))
                pinf = pinf_p
        gap = abs(pv - dv) / max(1.0, abs(pv))
        converged = converged or (pinf <= tol and dinf <= tol and gap <= tol)
        return dict(
            X=X, y=y, Z=Z, pv=pv, dv=dv, pinf=pinf, dinf=dinf,
            iterations=it, converged=converged,
        )

    pinf_hist: list = []
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - lin.apply(X)
        RD = C - lin.adjoint(y) + Z
        pv = float(np.sum(C * X))
        dv = float(b @ y)
        mu = float(np.sum(X * Z)) / m
        pinf = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        dinf = float(np.linalg.norm(RD)) / (1.0 + norm_c)
        gap = abs(pv - dv) / max(1.0, abs(pv))
        if (
            pinf <= tol
            and dinf <= tol
            and gap <= tol
            and mu <= tol * max(1.0, abs(pv))
        ):
            return finish(X, y, Z, it - 1, True)
        # primal stall: dual side fully converged, equality residual no
        # longer improving -- hand over to the exact affine projection
        pinf_hist.append(pinf)
        if (
            project is not None
            and len(pinf_hist) > 12
            and dinf <= tol
            and gap <= tol
            and mu <= tol * max(1.0, abs(pv))
            and pinf > tol
            and pinf > 0.5 * pinf_hist[-12]
        ):
            return finish(X, y, Z, it - 1, False)

        Xh, Xmh = _half_powers(X)
        _, Zmh = _half_powers(Z)
        Zi = Zmh @ Zmh
        S = Xh @ Z @ Xh
        _, Smh = _half_powers(S)
        W = Xh @ Smh @ Xh
        W = (W + W.T) / 2.0

        H = lin.schur(W)
        WRDW = W @ RD @ W

        # predictor: pure Newton step towards complementarity zero
        Rc = -X
        dy = _solve_schur(H, lin.apply(Rc + WRDW) - rp)
        dZ = lin.adjoint(dy) - RD
        dX = Rc - W @ dZ @ W
        dX = (dX + dX.T) / 2.0
        ap = min(1.0, 0.98 * _max_step(Xmh, dX))
        ad = min(1.0, 0.98 * _max_step(Zmh, dZ))
        mu_aff = float(np.sum((X + ap * dX) * (Z + ad * dZ))) / m
        sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu) ** 3))

        # corrector: recentered step with the second-order term
        corr = dX @ dZ @ Zi
        Rc = sigma * mu * Zi - X - (corr + corr.T) / 2.0
        dy = _solve_schur(H, lin.apply(Rc + WRDW) - rp)
        dZ = lin.adjoint(dy) - RD
        dX = Rc - W @ dZ @ W
        dX = (dX + dX.T) / 2.0
        ap = min(1.0, 0.98 * _max_step(Xmh, dX))
        ad = min(1.0, 0.98 * _max_step(Zmh, dZ))

        X = (X + ap * dX + (X + ap * dX).T) / 2.0
        y = y + ad * dy
        Z = (Z + ad * dZ + (Z + ad * dZ).T) / 2.0

    return finish(X, y, Z, it, False)


def solve_correlation(
    problem: CorrelationProblem, tol: float = 1e-8, max_iter: int = 200
) -> SdpSolution:
    """Solve the unit-diagonal correlation program with the interior-point
    backend.  Raises :class:`SolverError` (with the best iterate attached)
    when the iteration cap is hit before reaching ``tol``."""
    n = problem.size

    def unit_diagonal(X):
        Xp = (X + X.T) / 2.0
        np.fill_diagonal(Xp, 1.0)
        return Xp

    lin = _correlation_map(n)
    state = _ipm_solve(problem.coefficients, lin, tol, max_iter, project=unit_diagonal)
    sol = SdpSolution(
        matrix=state["X"],
        primal_value=state["pv"] + problem.offset,
        dual_value=state["dv"] + problem.offset,
        dual_variables=state["y"],
        dual_certificate=np.diag(state["y"]),
        primal_residual=state["pinf"],
        dual_residual=state["dinf"],
        iterations=state["iterations"],
        converged=state["converged"],
        trace_bound=float(n),
        solver="ipm",
        tolerance=tol,
    )
    if not state["converged"]:
        raise SolverError(
            f"interior-point iteration cap {max_iter} reached "
            f"(pinf {state['pinf']:.2e}, dinf {state['dinf']:.2e})",
            solution=sol,
        )
    return sol


def solve_moment_ipm(
    problem: MomentProblem,
    tol: float = 1e-6,
    max_iter: int = 200,
    size_cap: int = 300,
) -> SdpSolution:
    """Interior-point solve of a moment program (dense; small indices).

    The default tolerance matches the splitting backend; tighter values
    are accepted but late-stage primal progress on degenerate optimal
    faces may halt near 1e-7, in which case the solver raises with the
    best (certified) iterate attached.
    """
    m = problem.size
    if m > size_cap:
        raise SolverError(
            f"index size {m} exceeds the interior-point cap {size_cap}; "
            "use solve_moment_admm"
        )
    def affine(X):
        flat = numerics.class_project(
            ((X + X.T) / 2.0).ravel(),
            problem.class_of.ravel(),
            problem.class_sizes,
            problem.class_pins,
        )
        Xp = flat.reshape(m, m)
        return (Xp + Xp.T) / 2.0

    lin = _moment_map(problem)
    state = _ipm_solve(problem.objective_matrix, lin, tol, max_iter, project=affine)
    sol = SdpSolution(
        matrix=state["X"],
        primal_value=state["pv"],
        dual_value=state["dv"],
        dual_variables=state["y"],
        dual_certificate=lin.adjoint(state["y"]),
        primal_residual=state["pinf"],
        dual_residual=state["dinf"],
        iterations=state["iterations"],
        converged=state["converged"],
        trace_bound=float(m),
        solver="ipm",
        tolerance=tol,
    )
    if not state["converged"]:
        raise SolverError(
            f"interior-point iteration cap {max_iter} reached "
            f"(pinf {state['pinf']:.2e}, dinf {state['dinf']:.2e})",
            solution=sol,
        )
    return sol


def solve_moment_admm(
    problem: MomentProblem,
    tol: float = 1e-6,
    max_iter: int = 50_000,
    rho: float | None = None,
    over_relaxation: float = 1.6,
) -> SdpSolution:
    """Operator-splitting solve of a moment program.

    Alternates the exact affine projection (class averaging plus pins)
    with the PSD projection, over-relaxed and with residual-balancing
    updates of the penalty.  On hitting the iteration cap the best iterate
    is returned flagged ``converged=False`` instead of raising.  The
    returned matrix satisfies the affine constraints exactly (final
    projection) and is PSD up to the reported primal residual.
    """
    C = problem.objective_matrix
    m = problem.size
    ids = problem.class_of.ravel().astype(np.int32)
    counts = problem.class_sizes
    pins = problem.class_pins
    if rho is None:
        rho = max(1.0, float(np.linalg.norm(C)) / m)
    alpha = over_relaxation

    X = numerics.class_project(np.zeros(m * m), ids, counts, pins).reshape(m, m)
    S = numerics.psd_project(X)
    V = np.zeros((m, m))

    rp = rd = np.inf
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        T = S - V + C / rho
        X = numerics.class_project(T.ravel(), ids, counts, pins).reshape(m, m)
        Xr = alpha * X + (1.0 - alpha) * S
        S_new = numerics.psd_project(Xr + V)
        V = V + Xr - S_new
        rp_abs = float(np.linalg.norm(X - S_new))
        rd_abs = rho * float(np.linalg.norm(S_new - S))
        S = S_new
        rp = rp_abs / (1.0 + max(
            float(np.linalg.norm(X)), float(np.linalg.norm(S))
        ))
        rd = rd_abs / (1.0 + rho * float(np.linalg.norm(V)))
        if rp <= tol and rd <= tol:
            converged = True
            break
        if it % 50 == 0:
            if rp > 10.0 * rd:
                rho *= 2.0
                V /= 2.0
            elif rd > 10.0 * rp:
                rho /= 2.0
                V *= 2.0

    # final exact affine pass; the projection residual is the certificate
    T = S - V + C / rho
    X = numerics.class_project(T.ravel(), ids, counts, pins).reshape(m, m)
    G = rho * (T - X)
    G = (G + G.T) / 2.0
    return SdpSolution(
        matrix=X,
        primal_value=float(np.sum(C * X)),
        dual_value=float(G[0, 0]),
        dual_variables=None,
        dual_certificate=G,
        primal_residual=rp,
        dual_residual=rd,
        iterations=it,
        converged=converged,
        trace_bound=float(m),
        solver="admm",
        tolerance=tol,
    )


def _project_normal_moment(problem: MomentProblem, G: np.ndarray):
    """Exact projection onto the span of the constraint matrices: zero the
    mean of every free class; pinned classes are unconstrained."""
    flat = G.ravel()
    ids = problem.class_of.ravel()
    sums = np.bincount(ids, weights=flat, minlength=problem.class_pins.size)
    means = sums / np.maximum(problem.class_sizes, 1)
    free = np.isnan(problem.class_pins)
    adjust = np.where(free[ids], means[ids], 0.0)
    Gp = (flat - adjust).reshape(G.shape)
    return Gp, float(np.linalg.norm(adjust))


def verify_dual_certificate(
    problem, solution: SdpSolution, tol: float = 1e-6
) -> CertificateReport:
    """Re-check a solution's dual certificate from scratch.

    The dual matrix is projected exactly onto the constraint normal space,
    the slack eigenvalue floor is measured, and the certified bound is the
    dual value shifted by that floor times the trace bound.  ``ok`` states
    that the certificate is consistent: certified bound not below the
    primal value beyond ``tol`` noise, and the projection adjustment small.
    """
    G = solution.dual_certificate
    if G is None:
        raise SolverError("solution carries no dual certificate")
    G = np.asarray(G, dtype=float)
    if isinstance(problem, CorrelationProblem):
        Gp = np.diag(np.diag(G))
        normal_residual = float(np.linalg.norm(G - Gp))
        dual_value = float(np.trace(Gp)) + problem.offset
        slack = Gp - problem.coefficients
        trace_bound = float(problem.size)
    elif isinstance(problem, MomentProblem):
        Gp, normal_residual = _project_normal_moment(problem, G)
        dual_value = float(Gp[0, 0])
        slack = Gp - problem.objective_matrix
        trace_bound = float(problem.size)
    else:
        raise TypeError(f"unsupported problem type {type(problem).__name__}")

    w, _ = numerics.sym_eig((slack + slack.T) / 2.0)
    slack_min = float(w[0])
    certified = dual_value - min(0.0, slack_min) * trace_bound
    gap = certified - solution.primal_value
    scale = max(1.0, abs(solution.primal_value))
    ok = gap >= -10.0 * tol * scale and normal_residual <= np.sqrt(tol) * scale
    return CertificateReport(
        dual_value=dual_value,
        slack_min_eig=slack_min,
        trace_bound=trace_bound,
        certified_bound=certified,
        normal_residual=normal_residual,
        primal_value=solution.primal_value,
        gap=gap,
        ok=ok,
    )
