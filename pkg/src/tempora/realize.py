"""Explicit quantum realizations and a sequential-measurement simulator.

Two constructions produce realizations: observables built on Clifford
generators from the Gram vectors of a unit-diagonal correlation matrix
(every elliptope point is reachable, state-independently), and a
GNS-style reconstruction that factors a feasible moment matrix into a
Hilbert space, a state and projectors reproducing its probabilities.
The simulator evaluates sequential probabilities and correlators by the
projective update rule and is the independent check used by round-trip
tests and the command line verifier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .exceptions import RealizationError, ScenarioError
from .moment import MomentProblem, Scenario, build_index, class_residual
from .opalg import Letter, dropped_outcome


@dataclass(frozen=True)
class QuantumRealization:
    """Hilbert-space dimension, initial state, projectors per (setting, outcome)."""

    dimension: int
    state: np.ndarray
    projectors: dict
    info: dict = field(default_factory=dict)

    def outcome_count(self, setting: int) -> int:
        count = sum(1 for s, _ in self.projectors if s == setting)
        if count == 0:
            raise ScenarioError(f"realization has no setting {setting}")
        return count

    def settings(self) -> tuple[int, ...]:
        return tuple(sorted({s for s, _ in self.projectors}))


def validate_realization(r: QuantumRealization, tol: float = 1e-8) -> QuantumRealization:
    """Check state and projector invariants, returning ``r`` unchanged."""
    d = r.dimension
    rho = np.asarray(r.state)
    if rho.shape != (d, d):
        raise RealizationError("state dimension mismatch")
    if np.linalg.norm(rho - rho.conj().T) > tol:
        raise RealizationError("state is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise RealizationError("state trace differs from 1")
    if float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0]) < -tol:
        raise RealizationError("state is not positive semidefinite")
    eye = np.eye(d)
    for setting in r.settings():
        total = np.zeros((d, d), dtype=complex)
        projs = [
            (out, np.asarray(p))
            for (s, out), p in sorted(r.projectors.items())
            if s == setting
        ]
        for out, p in projs:
            if p.shape != (d, d):
                raise RealizationError(f"projector ({setting},{out}): shape mismatch")
            if np.linalg.norm(p - p.conj().T) > tol:
                raise RealizationError(f"projector ({setting},{out}) is not Hermitian")
            if np.linalg.norm(p @ p - p) > tol:
                raise RealizationError(f"projector ({setting},{out}) is not idempotent")
            total += p
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.linalg.norm(projs[i][1] @ projs[j][1]) > tol:
                    raise RealizationError(
                        f"setting {setting}: projectors {projs[i][0]} and "
                        f"{projs[j][0]} are not orthogonal"
                    )
        if np.linalg.norm(total - eye) > tol:
            raise RealizationError(f"setting {setting}: projectors do not sum to identity")
    return r


@dataclass(frozen=True)
class GramVectors:
    """Unit vectors whose pairwise inner products realize a correlation matrix."""

    vectors: np.ndarray  # shape (count, dim)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def count(self) -> int:
        return int(self.vectors.shape[0])


def gram_vectors(matrix, rank_tol: float = 1e-10) -> GramVectors:
    """Factor a unit-diagonal PSD matrix into unit vectors x_i with
    (x_i, x_j) = X_ij; the vector dimension is the numerical rank."""
    X = np.asarray(matrix, dtype=float)
    diag = np.diag(X)
    if np.max(np.abs(diag - 1.0)) > 1e-6:
        raise ValueError("matrix is not unit-diagonal")
    F = numerics.sqrt_psd(X, rank_tol=rank_tol)  # (rank, n), F^T F = X
    vectors = F.T.copy()
    norms = np.linalg.norm(vectors, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        raise ValueError("factor norms deviate from the unit diagonal")
    vectors /= norms[:, None]
    return GramVectors(vectors=vectors)


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def clifford_generators(d: int) -> list:
    """d Hermitian involutions with {G_j, G_k} = 2 delta_jk, dimension 2^ceil(d/2).

    Tensor-product construction: generator 2k (2k+1) is Z^k (x) X (Y) (x) 1.
    """
    if not 1 <= d <= 12:
        raise ValueError("generator count must be in 1..12")
    pairs = (d + 1) // 2
    dim = 2 ** pairs
    out = []
    for k in range(d):
        site, which = divmod(k, 2)
        mats = [_PAULI_Z] * site + [_PAULI_X if which == 0 else _PAULI_Y]
        mats += [np.eye(2, dtype=complex)] * (pairs - site - 1)
        g = mats[0]
        for m in mats[1:]:
            g = np.kron(g, m)
        out.append(g)
    return out


def observables_from_vectors(v: GramVectors) -> QuantumRealization:
    """Binary observables A_i = sum_k x_i[k] G_k with projectors (1 +- A_i)/2
    and the maximally mixed state; sequential two-point correlators then
    equal the Gram inner products for every initial state."""
    gens = clifford_generators(max(v.dim, 1))
    dim = gens[0].shape[0]
    eye = np.eye(dim, dtype=complex)
    projectors = {}
    for i in range(v.count):
        a = np.zeros((dim, dim), dtype=complex)
        for k in range(v.dim):
            a += v.vectors[i, k] * gens[k]
        projectors[(i, 0)] = (eye + a) / 2.0
        projectors[(i, 1)] = (eye - a) / 2.0
    return validate_realization(
        QuantumRealization(
            dimension=dim,
            state=eye / dim,
            projectors=projectors,
            info={"construction": "clifford", "gram_dim": v.dim},
        )
    )


def _orthonormal_columns(cols: np.ndarray, tol: float) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    basis: list = []
    for v in cols.T:
        w = v.astype(float).copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        nrm = float(np.linalg.norm(w))
        if nrm > tol:
            basis.append(w / nrm)
    if not basis:
        return np.zeros((cols.shape[0], 0))
    return np.stack(basis, axis=1)


def gns_from_moments(
    solution, problem: MomentProblem, scenario: Scenario,
    rank_tol: float = 1e-8,
) -> QuantumRealization:
    """Rebuild a realization from a (near-)feasible moment matrix.

    The matrix is averaged over its equality classes and PSD-projected,
    then factored into Gram vectors e_u.  The kept projector of outcome
    (s, r) projects onto the span of the vectors of words ending in that
    letter; the dropped outcome follows from completeness.  The state is
    the rank-one projector onto the identity-word vector.
    """
    M = np.asarray(solution.matrix if hasattr(solution, "matrix") else solution,
                   dtype=float)
    if M.shape != (problem.size, problem.size):
        raise ValueError("moment matrix dimension does not match the problem")
    raw_residual = class_residual(problem, M)
    if raw_residual > 1e-4:
        raise RealizationError(
            f"moment matrix infeasible: class residual {raw_residual:.2e}"
        )
    flat = numerics.class_project(
        ((M + M.T) / 2.0).ravel(),
        problem.class_of.ravel(),
        problem.class_sizes,
        problem.class_pins,
    )
    repaired = numerics.psd_project(flat.reshape(M.shape))
    perturbation = float(np.linalg.norm(repaired - M))

    F = numerics.sqrt_psd(repaired, rank_tol=rank_tol)  # (rank, size)
    rank = F.shape[0]
    if rank == 0:
        raise RealizationError("moment matrix has numerical rank 0")
    index = build_index(scenario)
    scale = float(np.linalg.norm(F, axis=0).max())

    eye = np.eye(rank, dtype=complex)
    projectors = {}
    for s, count in enumerate(scenario.settings):
        total = np.zeros((rank, rank), dtype=complex)
        # outcome spans of one setting are orthogonal in exact arithmetic
        # (their cross monomials annihilate); orthogonalize sequentially so
        # the identity survives solver noise and the complement stays a
        # projector
        basis = np.zeros((rank, 0))
        for out in range(count - 1):
            letter = Letter(s, out)
            cols = [
                pos for pos, word in enumerate(index.words)
                if word.letters and word.letters[-1] == letter
            ]
            P = np.zeros((rank, rank), dtype=complex)
            if cols:
                block = F[:, cols] - basis @ (basis.T @ F[:, cols])
                B = _orthonormal_columns(block, tol=rank_tol * scale)
                if B.shape[1]:
                    P = (B @ B.T).astype(complex)
                    basis = np.hstack([basis, B])
            projectors[(s, out)] = P
            total += P
        projectors[(s, dropped_outcome(scenario, s))] = eye - total

    # the identity word sits at position 0 with squared norm M_00 = 1
    e0 = F[:, 0]
    nrm = float(np.linalg.norm(e0))
    if nrm < 1e-8:
        raise RealizationError("identity-word vector has vanishing norm")
    e0 = e0 / nrm
    state = np.outer(e0, e0).astype(complex)

    return validate_realization(
        QuantumRealization(
            dimension=rank,
            state=state,
            projectors=projectors,
            info={
                "construction": "gns",
                "class_residual": raw_residual,
                "repair_norm": perturbation,
            },
        ),
        tol=1e-6,
    )


def sequential_probability(r: QuantumRealization, outcomes, settings) -> float:
    """P(outcomes | settings) for one measurement sequence (first first)."""
    if len(outcomes) != len(settings):
        raise ScenarioError("outcomes and settings must have equal length")
    d = r.dimension
    pi = np.eye(d, dtype=complex)
    for s, out in zip(settings, outcomes):
        key = (int(s), int(out))
        if key not in r.projectors:
            raise ScenarioError(f"no projector for setting {s} outcome {out}")
        pi = pi @ np.asarray(r.projectors[key])
    rho = np.asarray(r.state)
    return float(np.trace(pi @ pi.conj().T @ rho).real)


def sequential_correlator(r: QuantumRealization, settings) -> float:
    """Mean product of +-1 outcome values over a measurement sequence."""
    counts = []
    for s in settings:
        c = r.outcome_count(int(s))
        if c != 2:
            raise ScenarioError("correlators need binary settings")
        counts.append(c)
    total = 0.0
    for bits in np.ndindex(*(2,) * len(list(settings))):
        sign = 1.0
        for b in bits:
            sign *= 1.0 - 2.0 * b
        total += sign * sequential_probability(r, bits, settings)
    return total


def simulate_objective(r: QuantumRealization, scenario: Scenario) -> float:
    """Objective value of a scenario evaluated on a realization."""
    total = 0.0
    for term in scenario.objective:
        if term.kind == "probability":
            total += term.coefficient * sequential_probability(
                r, term.outcomes, term.sequence)
        else:
            total += term.coefficient * sequential_correlator(r, term.sequence)
    return total


def realization_moment_matrix(r: QuantumRealization, scenario: Scenario) -> np.ndarray:
    """The (real part of the) moment matrix this realization induces."""
    index = build_index(scenario)
    d = r.dimension
    ops = []
    for word in index.words:
        op = np.eye(d, dtype=complex)
        for letter in word.letters:
            op = op @ np.asarray(r.projectors[(letter.setting, letter.outcome)])
        ops.append(op)
    rho = np.asarray(r.state)
    m = index.size
    out = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            out[i, j] = float(np.trace(ops[i] @ ops[j].conj().T @ rho).real)
    return (out + out.T) / 2.0


def realization_to_dict(r: QuantumRealization) -> dict:
    return {
        "dimension": r.dimension,
        "state": {
            "re": np.asarray(r.state).real.tolist(),
            "im": np.asarray(r.state).imag.tolist(),
        },
        "projectors": [
            {
                "setting": int(s),
                "outcome": int(o),
                "re": np.asarray(p).real.tolist(),
                "im": np.asarray(p).imag.tolist(),
            }
            for (s, o), p in sorted(r.projectors.items())
        ],
    }


def realization_from_dict(doc: dict) -> QuantumRealization:
    try:
        d = int(doc["dimension"])
        state = np.array(doc["state"]["re"], dtype=float) \
            + 1j * np.array(doc["state"]["im"], dtype=float)
        projectors = {}
        for item in doc["projectors"]:
            key = (int(item["setting"]), int(item["outcome"]))
            projectors[key] = np.array(item["re"], dtype=float) \
                + 1j * np.array(item["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise RealizationError(f"malformed realization document: {exc}") from exc
    return QuantumRealization(dimension=d, state=state, projectors=projectors)


def save_realization(r: QuantumRealization, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(realization_to_dict(r), fh)
        fh.write("\n")


def load_realization(path) -> QuantumRealization:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise RealizationError(f"cannot read realization file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RealizationError(f"realization file is not valid JSON: {exc}") from exc
    return realization_from_dict(doc)
