from itertools import product

import pytest

from tempora import classical, scenarios
from tempora.exceptions import CapExceededError
from tempora.moment import ObjectiveTerm, Scenario


def atoms_of(scenario):
    """Flatten the objective into weighted outcome paths."""
    out = []
    for term in scenario.objective:
        if term.kind == "probability":
            out.append((term.sequence, term.outcomes, term.coefficient))
        else:
            for outs in product((0, 1), repeat=len(term.sequence)):
                sign = 1.0
                for r in outs:
                    sign *= 1.0 - 2.0 * r
                out.append((term.sequence, outs, term.coefficient * sign))
    return out


def tree_strategy_max(scenario):
    """Independent oracle: exact maximum over deterministic strategies with
    memory, by dynamic programming over the shared history tree.

    A node is (settings seen, outcomes before the current decision); sibling
    subtrees are disjoint, so the per-node choices decompose.
    """
    atoms = atoms_of(scenario)
    outcome_range = max(max(s for s in scenario.settings), 2)

    def best(prefix, history):
        node_atoms = [
            a for a in atoms
            if a[0][: len(prefix)] == prefix and a[1][: len(history)] == history
        ]
        if not node_atoms:
            return 0.0
        scores = []
        for choice in range(outcome_range):
            gained = sum(
                w for seq, outs, w in node_atoms
                if len(seq) == len(prefix) and outs[len(history)] == choice
            )
            nxt = history + (choice,)
            children = {
                seq[: len(prefix) + 1]
                for seq, outs, _ in node_atoms
                if len(seq) > len(prefix) and outs[: len(nxt)] == nxt
            }
            gained += sum(best(child, nxt) for child in children)
            scores.append(gained)
        return max(scores)

    roots = {a[0][:1] for a in atoms}
    return sum(best(r, ()) for r in roots)


def fixed_assignment_max(scenario):
    """Independent oracle: brute force over one fixed outcome per setting."""
    atoms = atoms_of(scenario)
    ranges = [range(c) for c in scenario.settings]
    best = -float("inf")
    for assign in product(*ranges):
        total = sum(
            w for seq, outs, w in atoms
            if all(assign[s] == r for s, r in zip(seq, outs))
        )
        best = max(best, total)
    return best


class TestNchvBound:
    def test_gyni_is_one(self):
        sc = scenarios.gyni()
        assert classical.nchv_bound(sc) == pytest.approx(1.0, abs=1e-12)
        assert fixed_assignment_max(sc) == pytest.approx(1.0, abs=1e-12)

    def test_yu_oh_is_sixteen(self):
        sc = scenarios.yu_oh()
        value = classical.nchv_bound(sc)
        assert value == pytest.approx(16.0, abs=1e-9)
        assert value == pytest.approx(fixed_assignment_max(sc), abs=1e-9)

    @pytest.mark.parametrize("n", range(3, 9))
    def test_ncycle_is_n_minus_two(self, n):
        sc = scenarios.ncycle_scenario(n)
        value = classical.nchv_bound(sc)
        assert value == pytest.approx(n - 2.0, abs=1e-9)
        assert value == pytest.approx(fixed_assignment_max(sc), abs=1e-9)

    def test_three_cycle_sign_variants_all_give_one(self):
        # the four facets of the classical tetrahedron
        for signs in [(1, 1, -1), (1, -1, 1), (-1, 1, 1), (-1, -1, -1)]:
            sc = scenarios.ncycle_scenario(scenarios.NCycleSpec(3, signs))
            assert classical.nchv_bound(sc) == pytest.approx(1.0, abs=1e-12)

    def test_cap_exceeded(self):
        sc = scenarios.yu_oh()  # 2^13 assignments
        with pytest.raises(CapExceededError):
            classical.nchv_bound(sc, cap=1 << 10)

    def test_multioutcome_assignments(self):
        sc = Scenario(
            "ternary", (3, 3), 2,
            (
                ObjectiveTerm("probability", (0, 1), (2, 1), 1.0),
                ObjectiveTerm("probability", (0,), (2,), 0.5),
                ObjectiveTerm("probability", (1,), (0,), 0.25),
            ),
        )
        # assignment a0=2, a1=1 collects the first two terms
        assert classical.nchv_bound(sc) == pytest.approx(1.5, abs=1e-12)
        assert fixed_assignment_max(sc) == pytest.approx(1.5, abs=1e-12)


class TestAlgebraicMax:
    def test_gyni_memory_value_is_two(self):
        sc = scenarios.gyni()
        value = classical.algebraic_max(sc)
        assert value == pytest.approx(2.0, abs=1e-12)
        assert value == pytest.approx(tree_strategy_max(sc), abs=1e-12)

    def test_yu_oh_is_fifty(self):
        sc = scenarios.yu_oh()
        value = classical.algebraic_max(sc)
        assert value == pytest.approx(50.0, abs=1e-9)
        assert value == pytest.approx(tree_strategy_max(sc), abs=1e-9)

    @pytest.mark.parametrize("n", range(3, 9))
    def test_ncycle_is_n(self, n):
        sc = scenarios.ncycle_scenario(n)
        value = classical.algebraic_max(sc)
        assert value == pytest.approx(float(n), abs=1e-9)
        assert value == pytest.approx(tree_strategy_max(sc), abs=1e-9)

    def test_matches_tree_oracle_on_mixed_objective(self):
        sc = Scenario(
            "mixed", (2, 2, 2), 3,
            (
                ObjectiveTerm("probability", (0, 1, 2), (0, 1, 0), 2.0),
                ObjectiveTerm("probability", (1, 0), (1, 1), -1.0),
                ObjectiveTerm("correlator", (2, 0), coefficient=0.75),
                ObjectiveTerm("correlator", (0,), coefficient=-0.25),
            ),
        )
        assert classical.algebraic_max(sc) == pytest.approx(
            tree_strategy_max(sc), abs=1e-12
        )

    def test_node_cap(self):
        with pytest.raises(CapExceededError):
            classical.algebraic_max(scenarios.gyni(), node_cap=2)


def test_nchv_never_exceeds_algebraic():
    for name in scenarios.builtin_names():
        sc = scenarios.builtin_scenario(name)
        assert classical.nchv_bound(sc) <= classical.algebraic_max(sc) + 1e-12
