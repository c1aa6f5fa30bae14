"""Moment-matrix programs for sequences of projective measurements.

A scenario fixes the measurement settings (with outcome counts), the
sequence length n and a linear objective in sequential probabilities and
two-point sequential correlators.  The moment matrix is indexed by all
canonical projector words of length at most n; its entries are tied
together whenever two index pairs produce the same reduced word monomial
``u . reverse(v)``, the (0,0) entry is pinned to 1, and entries whose
monomial annihilates are pinned to 0.  Any objective term expands through
outcome projectors into a quadratic form on that matrix, so the bound is
the maximum of a linear functional over the resulting spectrahedron.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .exceptions import ScenarioError
from .opalg import (
    IDENTITY,
    Letter,
    Word,
    concat_reduce,
    expand_outcome,
    kept_letters,
    reduce_letters,
    reverse,
)


@dataclass(frozen=True)
class ObjectiveTerm:
    """One additive objective term.

    kind
        ``"correlator"`` for a product of +-1 outcome values over the
        sequence (outcome 0 counts as +1, outcome 1 as -1; binary settings
        only), ``"probability"`` for one outcome tuple of one sequence.
    sequence
        Setting ids in temporal order, first measurement first.
    outcomes
        Outcome indices for probability terms, ``None`` for correlators.
    """

    kind: str
    sequence: tuple[int, ...]
    outcomes: tuple[int, ...] | None = None
    coefficient: float = 1.0


@dataclass(frozen=True)
class Scenario:
    """Measurement scenario: settings, sequence length, objective.

    ``settings[s]`` is the outcome count of setting id ``s``; ids are
    contiguous from 0.  ``reference_values`` carries optional literature
    values for reporting only; it never influences the solvers.
    """

    name: str
    settings: tuple[int, ...]
    sequence_length: int
    objective: tuple[ObjectiveTerm, ...]
    reference_values: dict = field(default_factory=dict)


def validate_scenario(scenario: Scenario) -> Scenario:
    """Check a scenario's structural invariants, returning it unchanged."""
    if not scenario.settings:
        raise ScenarioError("scenario needs at least one setting")
    for s, count in enumerate(scenario.settings):
        if count < 2:
            raise ScenarioError(f"setting {s}: outcome count must be >= 2")
    n = scenario.sequence_length
    if n < 1:
        raise ScenarioError("sequence_length must be >= 1")
    k = len(scenario.settings)
    for idx, term in enumerate(scenario.objective):
        where = f"objective[{idx}]"
        if term.kind not in ("correlator", "probability"):
            raise ScenarioError(f"{where}: unknown kind {term.kind!r}")
        if not term.sequence:
            raise ScenarioError(f"{where}: empty sequence")
        if len(term.sequence) > n:
            raise ScenarioError(
                f"{where}: sequence longer than sequence_length {n}"
            )
        for s in term.sequence:
            if not 0 <= s < k:
                raise ScenarioError(f"{where}: unknown setting {s}")
        if not np.isfinite(term.coefficient):
            raise ScenarioError(f"{where}: non-finite coefficient")
        if term.kind == "correlator":
            if term.outcomes is not None:
                raise ScenarioError(f"{where}: correlator carries no outcomes")
            for s in term.sequence:
                if scenario.settings[s] != 2:
                    raise ScenarioError(f"{where}: correlator requires binary setting")
        else:
            if term.outcomes is None or len(term.outcomes) != len(term.sequence):
                raise ScenarioError(
                    f"{where}: outcomes must match the sequence length"
                )
            for s, r in zip(term.sequence, term.outcomes):
                if not 0 <= r < scenario.settings[s]:
                    raise ScenarioError(
                        f"{where}: outcome {r} out of range for setting {s}"
                    )
    return scenario


@dataclass(frozen=True)
class MomentIndex:
    """Canonical words of length <= n: identity first, then by length and
    lexicographic letter order.  ``position`` inverts ``words``."""

    words: tuple[Word, ...]
    position: dict

    @property
    def size(self) -> int:
        return len(self.words)


def build_index(scenario: Scenario) -> MomentIndex:
    """Enumerate all canonical nonzero words up to the sequence length.

    A canonical word extends only by letters of a different setting than
    its last letter, so each word is generated exactly once.
    """
    validate_scenario(scenario)
    letters = kept_letters(scenario)
    words: list[Word] = [IDENTITY]
    layer: list[Word] = [IDENTITY]
    for _ in range(scenario.sequence_length):
        nxt = [
            Word(w.letters + (lt,))
            for w in layer
            for lt in letters
            if not w.letters or w.letters[-1].setting != lt.setting
        ]
        nxt.sort(key=lambda w: w.letters)
        words.extend(nxt)
        layer = nxt
    position = {w: i for i, w in enumerate(words)}
    return MomentIndex(tuple(words), position)


@dataclass
class MomentProblem:
    """A built moment program, ready for either SDP backend.

    ``classes`` maps each canonical monomial to the upper-triangle entry
    positions sharing it; ``zero_entries`` lists positions whose monomial
    annihilates.  The flattened ``class_of`` map (one id per matrix entry,
    both triangles) plus ``class_sizes``/``class_pins`` drive the solvers:
    ``class_pins`` holds 1.0 for the normalization class of entry (0,0),
    0.0 for the zero pseudo-class, and NaN for free classes.
    """

    scenario: Scenario
    index: MomentIndex
    classes: dict
    zero_entries: tuple
    objective_matrix: np.ndarray
    class_of: np.ndarray
    class_sizes: np.ndarray
    class_pins: np.ndarray
    class_keys: tuple

    @property
    def size(self) -> int:
        return self.index.size

    @property
    def normalization(self) -> float:
        """Pinned value of the identity-word diagonal entry."""
        return 1.0


def build_problem(scenario: Scenario) -> MomentProblem:
    """Index the scenario and assemble classes, pins and the objective."""
    index = build_index(scenario)
    words = index.words
    rev_words = [reverse(w) for w in words]
    m = index.size

    classes: dict[tuple, list] = {}
    zeros: list[tuple[int, int]] = []
    for i in range(m):
        wi = words[i]
        for j in range(i, m):
            w = concat_reduce(wi, rev_words[j])
            if w.is_zero:
                zeros.append((i, j))
                continue
            key = min(w.letters, w.letters[::-1])
            classes.setdefault(key, []).append((i, j))

    keys = sorted(classes, key=lambda k: (len(k), k))
    if keys[0] != ():
        raise AssertionError("identity class missing from the index")
    ncls = len(keys)
    class_of = np.full((m, m), ncls, dtype=np.int32)  # default: zero pseudo-class
    for cid, key in enumerate(keys):
        for (i, j) in classes[key]:
            class_of[i, j] = cid
            class_of[j, i] = cid
    class_sizes = np.bincount(class_of.ravel(), minlength=ncls + 1).astype(float)
    class_pins = np.full(ncls + 1, np.nan)
    class_pins[0] = 1.0
    class_pins[ncls] = 0.0

    objective = _objective_matrix(scenario, index)
    return MomentProblem(
        scenario=scenario,
        index=index,
        classes={k: tuple(v) for k, v in classes.items()},
        zero_entries=tuple(zeros),
        objective_matrix=objective,
        class_of=class_of,
        class_sizes=class_sizes,
        class_pins=class_pins,
        class_keys=tuple(keys),
    )


def expansion_vector(
    scenario: Scenario, index: MomentIndex, sequence, outcomes
) -> np.ndarray:
    """Coefficient vector a with P(outcomes | sequence) = a^T M a.

    The outcome-projector product expands factor by factor; each factor is
    either a single letter or identity minus the kept letters of its
    setting, and every surviving product reduces to an indexed word.
    """
    factors = [
        list(expand_outcome(s, r, scenario).items())
        for s, r in zip(sequence, outcomes)
    ]
    vec = np.zeros(index.size)
    for combo in product(*factors):
        coeff = 1.0
        letters: list[Letter] = []
        for w, c in combo:
            coeff *= c
            letters.extend(w.letters)
        word = reduce_letters(letters)
        if word.is_zero:
            continue
        vec[index.position[word]] += coeff
    return vec


def _objective_matrix(scenario: Scenario, index: MomentIndex) -> np.ndarray:
    m = index.size
    C = np.zeros((m, m))

    def add_outer(vec: np.ndarray, weight: float) -> None:
        nz = np.nonzero(vec)[0]
        if nz.size == 0:
            return
        sub = vec[nz]
        C[np.ix_(nz, nz)] += weight * np.outer(sub, sub)

    for term in scenario.objective:
        if term.kind == "probability":
            vec = expansion_vector(scenario, index, term.sequence, term.outcomes)
            add_outer(vec, term.coefficient)
        else:
            for outs in product((0, 1), repeat=len(term.sequence)):
                sign = 1.0
                for r in outs:
                    sign *= 1.0 - 2.0 * r
                vec = expansion_vector(scenario, index, term.sequence, outs)
                add_outer(vec, term.coefficient * sign)
    return (C + C.T) / 2.0


def evaluate_objective(problem: MomentProblem, matrix: np.ndarray) -> float:
    """Objective value <C, X> of a candidate moment matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != problem.objective_matrix.shape:
        raise ValueError(
            f"matrix shape {matrix.shape} does not match index size {problem.size}"
        )
    return float(np.sum(problem.objective_matrix * matrix))


def class_residual(problem: MomentProblem, matrix: np.ndarray) -> float:
    """Largest deviation of any entry from its class mean / pinned value."""
    flat = np.asarray(matrix, dtype=float).ravel()
    ids = problem.class_of.ravel()
    sums = np.bincount(ids, weights=flat, minlength=problem.class_pins.size)
    counts = np.maximum(problem.class_sizes, 1)
    means = sums / counts
    pinned = ~np.isnan(problem.class_pins)
    means[pinned] = problem.class_pins[pinned]
    return float(np.max(np.abs(flat - means[ids]))) if flat.size else 0.0


def extract_probabilities(solution, scenario: Scenario, tol: float = 1e-6) -> dict:
    """All sequential probabilities up to the sequence length.

    Returns ``{(sequence, outcomes): value}`` read off the solution matrix.
    Values may undershoot 0 or overshoot 1 by up to ``tol`` (solver noise,
    reported as-is); anything beyond that raises ``ValueError``.
    """
    index = build_index(scenario)
    X = np.asarray(solution.matrix, dtype=float)
    if X.shape != (index.size, index.size):
        raise ValueError("solution dimension does not match the scenario index")
    out: dict = {}
    k = len(scenario.settings)
    for length in range(1, scenario.sequence_length + 1):
        for seq in product(range(k), repeat=length):
            ranges = [range(scenario.settings[s]) for s in seq]
            for outs in product(*ranges):
                a = expansion_vector(scenario, index, seq, outs)
                v = float(a @ X @ a)
                if v < -tol or v > 1.0 + tol:
                    raise ValueError(
                        f"probability {v:.3e} for {outs}|{seq} outside [-tol, 1+tol]"
                    )
                out[(seq, outs)] = v
    return out
