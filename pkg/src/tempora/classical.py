"""Classical reference bounds for sequential-measurement objectives.

Two models: memoryless deterministic assignments (one fixed outcome per
setting, the noncontextual/macrorealist count) and deterministic
strategies with memory (an outcome per history-tree node, which attain
the algebraic maximum on every builtin).  Both maximisations are exact
enumerations; randomized strategies cannot beat deterministic ones on a
linear objective.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .exceptions import CapExceededError
from .moment import Scenario, validate_scenario


def _assignment_digits(ids: np.ndarray, counts) -> np.ndarray:
    """Mixed-radix decode: column s holds the outcome of setting s."""
    digits = np.empty((ids.size, len(counts)), dtype=np.int64)
    rest = ids.copy()
    for s, c in enumerate(counts):
        digits[:, s] = rest % c
        rest //= c
    return digits


def nchv_bound(scenario: Scenario, cap: int = 1 << 24) -> float:
    """Exact maximum over history-independent deterministic assignments."""
    validate_scenario(scenario)
    counts = scenario.settings
    total = 1
    for c in counts:
        total *= c
        if total > cap:
            raise CapExceededError(
                f"assignment space exceeds the cap {cap}"
            )
    best = -np.inf
    block = 1 << 16
    for start in range(0, total, block):
        ids = np.arange(start, min(start + block, total), dtype=np.int64)
        digits = _assignment_digits(ids, counts)
        value = np.zeros(ids.size)
        for term in scenario.objective:
            if term.kind == "probability":
                alive = np.ones(ids.size, dtype=bool)
                for s, r in zip(term.sequence, term.outcomes):
                    alive &= digits[:, s] == r
                value += term.coefficient * alive
            else:
                signs = np.ones(ids.size)
                for s in term.sequence:
                    signs *= 1.0 - 2.0 * digits[:, s]
                value += term.coefficient * signs
        best = max(best, float(value.max()))
    return best


def _atoms(scenario: Scenario):
    """Flatten the objective into (path, coefficient) probability atoms.

    A path is a tuple of (node, required outcome) pairs, where a node is
    (settings prefix, outcomes before the current position).  Correlator
    terms expand into one atom per outcome string, weighted by the
    product of +-1 outcome values.
    """
    atoms = []
    for term in scenario.objective:
        seq = term.sequence
        if term.kind == "probability":
            branches = [(term.outcomes, term.coefficient)]
        else:
            branches = []
            for outs in product((0, 1), repeat=len(seq)):
                sign = 1.0
                for r in outs:
                    sign *= 1.0 - 2.0 * r
                branches.append((outs, term.coefficient * sign))
        for outs, coeff in branches:
            path = tuple(
                ((seq[: t + 1], outs[:t]), outs[t])
                for t in range(len(seq))
            )
            atoms.append((path, coeff))
    return atoms


def algebraic_max(scenario: Scenario, node_cap: int = 30) -> float:
    """Exact maximum over deterministic strategies with memory.

    Final history nodes (those no atom extends past) are optimized in
    closed form per inner assignment; the remaining inner nodes are
    enumerated exhaustively.
    """
    validate_scenario(scenario)
    atoms = _atoms(scenario)
    if not atoms:
        return 0.0

    non_last = set()
    all_nodes = set()
    for path, _ in atoms:
        for node, _ in path[:-1]:
            non_last.add(node)
        for node, _ in path:
            all_nodes.add(node)
    inner = sorted(non_last)
    final = sorted(all_nodes - non_last)
    if len(inner) > node_cap:
        raise CapExceededError(
            f"history tree needs {len(inner)} inner nodes, cap is {node_cap}"
        )
    inner_pos = {node: i for i, node in enumerate(inner)}
    final_pos = {node: i for i, node in enumerate(final)}
    inner_counts = [scenario.settings[node[0][-1]] for node in inner]
    final_counts = [scenario.settings[node[0][-1]] for node in final]

    total = 1
    for c in inner_counts:
        total *= c

    # per atom: inner-node equality conditions, plus where the payoff lands
    inner_payoff = []   # (conditions, coeff)
    final_payoff = []   # (conditions, final index, required outcome, coeff)
    for path, coeff in atoms:
        conds = [
            (inner_pos[node], r) for node, r in path[:-1]
        ]
        last_node, last_r = path[-1]
        if last_node in inner_pos:
            inner_payoff.append((conds + [(inner_pos[last_node], last_r)], coeff))
        else:
            final_payoff.append((conds, final_pos[last_node], last_r, coeff))

    best = -np.inf
    block = 1 << 16
    max_out = max(final_counts, default=1)
    for start in range(0, total, block):
        ids = np.arange(start, min(start + block, total), dtype=np.int64)
        digits = _assignment_digits(ids, inner_counts) if inner else \
            np.zeros((ids.size, 0), dtype=np.int64)
        value = np.zeros(ids.size)
        for conds, coeff in inner_payoff:
            alive = np.ones(ids.size, dtype=bool)
            for pos, r in conds:
                alive &= digits[:, pos] == r
            value += coeff * alive
        if final:
            gain = np.zeros((ids.size, len(final), max_out))
            for conds, fpos, r, coeff in final_payoff:
                alive = np.ones(ids.size, dtype=bool)
                for pos, req in conds:
                    alive &= digits[:, pos] == req
                gain[:, fpos, r] += coeff * alive
            # a final node picks its best outcome independently
            for fpos, c in enumerate(final_counts):
                value += gain[:, fpos, :c].max(axis=1)
        best = max(best, float(value.max()))
    return best
