"""Projector-word algebra: letters, canonical words, reduction.

A measurement outcome is encoded as a letter ``(setting, outcome)``.  Every
setting drops its highest outcome index (the dropped projector is recovered
from completeness), so letters only ever carry kept outcomes; for binary
settings the single kept letter stands for outcome 0.  Products of
projectors are words over these letters.  Idempotence collapses adjacent
equal letters, orthogonality annihilates any word containing adjacent
same-setting letters with different outcomes, and therefore every word has
a unique canonical form in which no two adjacent letters share a setting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple

if TYPE_CHECKING:
    from .moment import Scenario


class Letter(NamedTuple):
    """One kept-outcome projector of one measurement setting."""

    setting: int
    outcome: int


@dataclass(frozen=True)
class Word:
    """Canonical projector product; ``is_zero`` marks the annihilated word.

    The empty letter tuple with ``is_zero=False`` is the identity operator.
    Words compare and hash by value, so they can key dictionaries.
    """

    letters: tuple[Letter, ...] = ()
    is_zero: bool = False

    def __post_init__(self):
        if self.is_zero and self.letters:
            raise ValueError("the zero word carries no letters")

    def __len__(self):
        return len(self.letters)


IDENTITY = Word()
ZERO = Word(is_zero=True)


def _outcome_count(scenario, setting: int) -> int:
    counts = scenario.settings
    if not 0 <= setting < len(counts):
        raise ValueError(f"unknown setting {setting}")
    return counts[setting]


def dropped_outcome(scenario, setting: int) -> int:
    """Outcome index recovered from completeness instead of a letter."""
    return _outcome_count(scenario, setting) - 1


def make_letter(setting: int, outcome: int, scenario) -> Letter:
    """Validated letter for a kept outcome of ``setting``.

    Raises ``ValueError`` for an unknown setting, an out-of-range outcome,
    or the dropped (highest) outcome, which has no letter of its own.
    """
    count = _outcome_count(scenario, setting)
    if not 0 <= outcome < count:
        raise ValueError(f"outcome {outcome} out of range for setting {setting}")
    if outcome == count - 1:
        raise ValueError(
            f"outcome {outcome} of setting {setting} is the dropped outcome"
        )
    return Letter(setting, outcome)


def kept_letters(scenario) -> list[Letter]:
    """All letters of a scenario in (setting, outcome) lexicographic order."""
    return [
        Letter(s, r)
        for s, count in enumerate(scenario.settings)
        for r in range(count - 1)
    ]


def reduce_letters(letters: Iterable[Letter]) -> Word:
    """Canonical form of an arbitrary letter sequence.

    Left-to-right stack scan: adjacent equal letters collapse, adjacent
    same-setting letters with different outcomes annihilate the word.  The
    rewriting system is confluent, so this normal form is order-independent.
    """
    out: list[Letter] = []
    for lt in letters:
        if out and out[-1].setting == lt.setting:
            if out[-1].outcome == lt.outcome:
                continue
            return ZERO
        out.append(lt)
    return Word(tuple(out))


def concat_reduce(a: Word, b: Word) -> Word:
    """Reduced concatenation of two canonical words.

    Both inputs must already be canonical; then at most one junction step
    is needed (a collapse cannot create a new same-setting adjacency,
    because the surviving neighbours were non-adjacent inside ``a`` and
    ``b`` individually).
    """
    if a.is_zero or b.is_zero:
        return ZERO
    la, lb = a.letters, b.letters
    if la and lb and la[-1].setting == lb[0].setting:
        if la[-1].outcome == lb[0].outcome:
            return Word(la + lb[1:])
        return ZERO
    return Word(la + lb)


def reverse(w: Word) -> Word:
    """Letter-reversed word; canonical form is preserved by reversal."""
    if w.is_zero:
        return ZERO
    return Word(w.letters[::-1])


def expand_outcome(setting: int, outcome: int, scenario) -> dict[Word, float]:
    """Linear expansion of one outcome projector over canonical words.

    Kept outcomes map to their single-letter word with weight 1; the
    dropped outcome expands by completeness as identity minus the kept
    letters of the same setting.
    """
    count = _outcome_count(scenario, setting)
    if not 0 <= outcome < count:
        raise ValueError(f"outcome {outcome} out of range for setting {setting}")
    if outcome < count - 1:
        return {Word((Letter(setting, outcome),)): 1.0}
    terms: dict[Word, float] = {IDENTITY: 1.0}
    for r in range(count - 1):
        terms[Word((Letter(setting, r),))] = -1.0
    return terms


def word_key(w: Word) -> tuple:
    """Sort key: by length, then lexicographically on letters."""
    return (len(w.letters), w.letters)
