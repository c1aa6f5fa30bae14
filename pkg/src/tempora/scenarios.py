"""Built-in scenario catalog, analytic cycle bounds and scenario files.

Builtins cover the cyclic correlator inequalities (any length, with the
3-cycle doubling as the Leggett-Garg combination), the 13-ray Yu-Oh
scenario with its state-dependent objective, and the four-term
guess-your-neighbour's-input adaptation to length-3 sequences.  Scenario
files are strict JSON: unknown keys are rejected so that typos surface as
errors instead of silently changing the problem.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ScenarioError
from .moment import ObjectiveTerm, Scenario, validate_scenario
from .sdp import CorrelationProblem


@dataclass(frozen=True)
class NCycleSpec:
    """Cyclic sign pattern: objective sum_i signs[i] <A_i A_{i+1 mod N}>_seq."""

    n: int
    signs: tuple[int, ...]

    def __post_init__(self):
        if self.n < 3:
            raise ScenarioError("cycle length must be >= 3")
        if len(self.signs) != self.n:
            raise ScenarioError("need one sign per cycle edge")
        if any(g not in (-1, 1) for g in self.signs):
            raise ScenarioError("signs must be +-1")
        if sum(1 for g in self.signs if g == -1) % 2 == 0:
            raise ScenarioError("need an odd number of -1 signs")

    @classmethod
    def canonical(cls, n: int) -> "NCycleSpec":
        return cls(n, (1,) * (n - 1) + (-1,))


def _as_cycle_spec(spec) -> NCycleSpec:
    if isinstance(spec, NCycleSpec):
        return spec
    return NCycleSpec.canonical(int(spec))


def ncycle(spec) -> CorrelationProblem:
    """Correlation program of a signed cycle (accepts N for canonical signs)."""
    cyc = _as_cycle_spec(spec)
    n = cyc.n
    lam = np.zeros((n, n))
    for i, g in enumerate(cyc.signs):
        j = (i + 1) % n
        lam[i, j] += g / 2.0
        lam[j, i] += g / 2.0
    return CorrelationProblem(coefficients=lam)


def ncycle_bound(n: int) -> float:
    """Quantum sequential maximum of the canonical cycle: N cos(pi/N)."""
    if n < 3:
        raise ScenarioError("cycle length must be >= 3")
    return n * math.cos(math.pi / n)


def ncycle_scenario(spec, name: str | None = None) -> Scenario:
    """The same signed cycle as a moment-method scenario (n = 2)."""
    cyc = _as_cycle_spec(spec)
    terms = tuple(
        ObjectiveTerm("correlator", (i, (i + 1) % cyc.n), None, float(g))
        for i, g in enumerate(cyc.signs)
    )
    return validate_scenario(
        Scenario(
            name=name or f"ncycle{cyc.n}",
            settings=(2,) * cyc.n,
            sequence_length=2,
            objective=terms,
            reference_values={
                "nchv": float(cyc.n - 2),
                "algebraic": float(cyc.n),
                "sequential": ncycle_bound(cyc.n),
            },
        )
    )


def leggett_garg() -> Scenario:
    """The 3-cycle combination <A0A1> + <A1A2> - <A0A2>."""
    base = ncycle_scenario(3, name="lg")
    refs = dict(base.reference_values)
    refs["sequential"] = 1.5
    return Scenario(base.name, base.settings, base.sequence_length,
                    base.objective, refs)


_YU_OH_RAYS = (
    ("z1", (1, 0, 0)),
    ("z2", (0, 1, 0)),
    ("z3", (0, 0, 1)),
    ("y1-", (0, 1, -1)),
    ("y1+", (0, 1, 1)),
    ("y2-", (1, 0, -1)),
    ("y2+", (1, 0, 1)),
    ("y3-", (1, -1, 0)),
    ("y3+", (1, 1, 0)),
    ("h0", (1, 1, 1)),
    ("h1", (-1, 1, 1)),
    ("h2", (1, -1, 1)),
    ("h3", (1, 1, -1)),
)


@dataclass(frozen=True)
class RaySet:
    """Labeled integer rays; the graph joins exactly the orthogonal pairs."""

    labels: tuple[str, ...]
    vectors: tuple[tuple[int, int, int], ...]

    def edges(self) -> tuple[tuple[int, int], ...]:
        out = []
        for i in range(len(self.vectors)):
            for j in range(i + 1, len(self.vectors)):
                dot = sum(a * b for a, b in zip(self.vectors[i], self.vectors[j]))
                if dot == 0:
                    out.append((i, j))
        return tuple(out)

    def triangles(self) -> tuple[tuple[int, int, int], ...]:
        edge = set(self.edges())
        k = len(self.vectors)
        return tuple(
            (a, b, c)
            for a in range(k)
            for b in range(a + 1, k)
            for c in range(b + 1, k)
            if (a, b) in edge and (a, c) in edge and (b, c) in edge
        )


def yu_oh_rays() -> RaySet:
    labels, vectors = zip(*_YU_OH_RAYS)
    return RaySet(labels=labels, vectors=vectors)


def yu_oh() -> Scenario:
    """13 ray observables A_i = 2|v_i><v_i| - 1; objective
    2 sum_i <A_i> - sum over orthogonal pairs <A_i A_j>_seq."""
    rays = yu_oh_rays()
    k = len(rays.vectors)
    terms = [ObjectiveTerm("correlator", (i,), None, 2.0) for i in range(k)]
    terms += [
        ObjectiveTerm("correlator", (i, j), None, -1.0)
        for i, j in rays.edges()
    ]
    return validate_scenario(
        Scenario(
            name="yu-oh",
            settings=(2,) * k,
            sequence_length=2,
            objective=tuple(terms),
            reference_values={
                "nchv": 16.0,
                "state-independent": 50.0 / 3.0,
                "algebraic": 50.0,
                "sequential": 17.794,
            },
        )
    )


def gyni() -> Scenario:
    """Guess-your-neighbour's-input over length-3 measurement sequences.

    Four win terms P(r|s), one per even-parity input string; the outcome
    string is the input shifted by one place.
    """
    terms = (
        ObjectiveTerm("probability", (0, 0, 0), (0, 0, 0), 1.0),
        ObjectiveTerm("probability", (0, 1, 1), (1, 1, 0), 1.0),
        ObjectiveTerm("probability", (1, 0, 1), (0, 1, 1), 1.0),
        ObjectiveTerm("probability", (1, 1, 0), (1, 0, 1), 1.0),
    )
    return validate_scenario(
        Scenario(
            name="gyni",
            settings=(2, 2, 2),
            sequence_length=3,
            objective=terms,
            reference_values={
                "classical": 1.0,
                "sequential": 1.0225,
                "no-signalling": 4.0 / 3.0,
            },
        )
    )


_BUILTIN_CYCLE_RANGE = range(3, 13)


def builtin_names() -> tuple[str, ...]:
    return tuple(
        [f"ncycle{n}" for n in _BUILTIN_CYCLE_RANGE] + ["lg", "yu-oh", "gyni"]
    )


def builtin_scenario(name: str) -> Scenario:
    """Resolve a builtin catalog name (the CLI's ``builtin:`` targets)."""
    if name.startswith("ncycle"):
        try:
            n = int(name[len("ncycle"):])
        except ValueError:
            raise ScenarioError(f"unknown builtin scenario {name!r}") from None
        if n not in _BUILTIN_CYCLE_RANGE:
            raise ScenarioError(
                f"builtin cycles cover ncycle3..ncycle12, got {name!r}"
            )
        return ncycle_scenario(n)
    if name == "lg":
        return leggett_garg()
    if name == "yu-oh":
        return yu_oh()
    if name == "gyni":
        return gyni()
    raise ScenarioError(f"unknown builtin scenario {name!r}")


def correlation_from_scenario(scenario: Scenario) -> CorrelationProblem:
    """Lower a pure two-point correlator objective to the unit-diagonal
    correlation program.

    Every term must be a length-2 correlator; a repeated-setting pair
    (i, i) contributes its coefficient to the constant offset (X_ii = 1).
    """
    k = len(scenario.settings)
    lam = np.zeros((k, k))
    offset = 0.0
    for idx, term in enumerate(scenario.objective):
        where = f"objective[{idx}]"
        if term.kind != "correlator" or len(term.sequence) != 2:
            raise ScenarioError(
                f"{where}: the simplified method requires a pure "
                "length-2 correlator objective"
            )
        i, j = term.sequence
        if i == j:
            offset += term.coefficient
        else:
            lam[i, j] += term.coefficient / 2.0
            lam[j, i] += term.coefficient / 2.0
    return CorrelationProblem(coefficients=lam, offset=offset)


_TOP_KEYS = {"name", "settings", "sequence_length", "objective", "reference_values"}


def _require_keys(obj: dict, allowed: set, required: set, where: str):
    for key in obj:
        if key not in allowed:
            raise ScenarioError(f"{where}: unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise ScenarioError(f"{where}: missing key {key!r}")


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number")
    return float(value)


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a parsed scenario document against the strict schema."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    _require_keys(doc, _TOP_KEYS, _TOP_KEYS - {"reference_values"}, "scenario")
    if not isinstance(doc["name"], str):
        raise ScenarioError("name: expected a string")

    raw_settings = doc["settings"]
    if not isinstance(raw_settings, list) or not raw_settings:
        raise ScenarioError("settings: expected a non-empty list")
    seen: dict[int, int] = {}
    for pos, item in enumerate(raw_settings):
        where = f"settings[{pos}]"
        if not isinstance(item, dict):
            raise ScenarioError(f"{where}: expected an object")
        _require_keys(item, {"id", "outcomes"}, {"id", "outcomes"}, where)
        sid = _as_int(item["id"], f"{where}.id")
        outs = _as_int(item["outcomes"], f"{where}.outcomes")
        if sid in seen:
            raise ScenarioError(f"{where}: duplicate setting id {sid}")
        seen[sid] = outs
    k = len(seen)
    if sorted(seen) != list(range(k)):
        raise ScenarioError("settings: ids must be contiguous 0..k-1")
    settings = tuple(seen[i] for i in range(k))

    n = _as_int(doc["sequence_length"], "sequence_length")

    raw_objective = doc["objective"]
    if not isinstance(raw_objective, list):
        raise ScenarioError("objective: expected a list")
    terms = []
    for pos, item in enumerate(raw_objective):
        where = f"objective[{pos}]"
        if not isinstance(item, dict):
            raise ScenarioError(f"{where}: expected an object")
        kind = item.get("kind")
        if kind == "correlator":
            _require_keys(item, {"kind", "sequence", "coeff"},
                          {"kind", "sequence", "coeff"}, where)
            seq = item["sequence"]
            if not isinstance(seq, list):
                raise ScenarioError(f"{where}.sequence: expected a list")
            sequence = tuple(_as_int(s, f"{where}.sequence") for s in seq)
            terms.append(ObjectiveTerm(
                "correlator", sequence, None,
                _as_number(item["coeff"], f"{where}.coeff")))
        elif kind == "probability":
            _require_keys(item, {"kind", "settings", "outcomes", "coeff"},
                          {"kind", "settings", "outcomes", "coeff"}, where)
            seq = item["settings"]
            outs = item["outcomes"]
            if not isinstance(seq, list) or not isinstance(outs, list):
                raise ScenarioError(
                    f"{where}: settings and outcomes must be lists")
            terms.append(ObjectiveTerm(
                "probability",
                tuple(_as_int(s, f"{where}.settings") for s in seq),
                tuple(_as_int(r, f"{where}.outcomes") for r in outs),
                _as_number(item["coeff"], f"{where}.coeff")))
        else:
            raise ScenarioError(f"{where}: unknown kind {kind!r}")

    refs = {}
    if "reference_values" in doc:
        raw_refs = doc["reference_values"]
        if not isinstance(raw_refs, dict):
            raise ScenarioError("reference_values: expected an object")
        for key, value in raw_refs.items():
            refs[str(key)] = _as_number(value, f"reference_values[{key!r}]")

    return validate_scenario(
        Scenario(doc["name"], settings, n, tuple(terms), refs)
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize a scenario to the schema accepted by scenario_from_dict."""
    objective = []
    for term in scenario.objective:
        if term.kind == "correlator":
            objective.append({
                "kind": "correlator",
                "sequence": list(term.sequence),
                "coeff": term.coefficient,
            })
        else:
            objective.append({
                "kind": "probability",
                "settings": list(term.sequence),
                "outcomes": list(term.outcomes),
                "coeff": term.coefficient,
            })
    doc = {
        "name": scenario.name,
        "settings": [
            {"id": i, "outcomes": count}
            for i, count in enumerate(scenario.settings)
        ],
        "sequence_length": scenario.sequence_length,
        "objective": objective,
    }
    if scenario.reference_values:
        doc["reference_values"] = dict(scenario.reference_values)
    return doc


def load_scenario(path) -> Scenario:
    """Load and validate a scenario file (strict JSON schema)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def save_scenario(scenario: Scenario, path) -> None:
    """Write a scenario file that load_scenario reads back equal."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")
