"""Entrenchment scoring: how costly is it to touch a signature element.

Predicates are scored by confidence distance over the theory graph:
e(p) = 1 - pd(p)/(pd_max+1) for connected predicates, 1/(pd_max+2) for
isolated ones, so observed (protected) predicates score 1 and isolated
ones score strictly below every connected predicate. Arguments are scored
by the size of their domain in the least model, with a symbolic PROTECTED
top value for predicates that occur in the observation store.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .core import Atom, PreferredStructure, Theory
from .graph import build_graph, confidence_distances
from .inference import least_model


class _ProtectedValue:
    """Symbolic top element: compares greater than every integer."""

    _instance: Optional["_ProtectedValue"] = None

    def __new__(cls) -> "_ProtectedValue":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PROTECTED"

    def __gt__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return True
        return NotImplemented

    def __lt__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __ge__(self, other) -> bool:
        return self.__gt__(other) or other is self

    def __le__(self, other) -> bool:
        return other is self


PROTECTED = _ProtectedValue()

ArgScore = Union[int, _ProtectedValue]

PREDICATE_CHANGE = "predicateChange"
ARGUMENT_CHANGE = "argumentChange"
CONTENT_CHANGE = "contentChange"
CATEGORY_ORDER = (PREDICATE_CHANGE, ARGUMENT_CHANGE, CONTENT_CHANGE)


@dataclass(frozen=True)
class EntrenchmentReport:
    """Per-predicate entrenchment and distance, plus per-argument scores."""

    entrenchment: dict[str, Fraction]
    distance: dict[str, Optional[int]]
    pd_max: int
    argument: dict[str, tuple[ArgScore, ...]]


def predicate_entrenchment(theory: Theory, ps: PreferredStructure) -> EntrenchmentReport:
    """Score every predicate of the theory against the observation store.

    Protected predicates are those occurring in the observations; pd_max
    ranges over all finite distances (0 when there are none).
    """
    graph = build_graph(theory)
    protected = frozenset(ps.predicates()) & graph.predicate_names()
    distance = confidence_distances(graph, protected)
    finite = [d for d in distance.values() if d is not None]
    pd_max = max(finite) if finite else 0
    entrenchment: dict[str, Fraction] = {}
    for pred in sorted(distance):
        d = distance[pred]
        if d is None:
            entrenchment[pred] = Fraction(1, pd_max + 2)
        else:
            entrenchment[pred] = 1 - Fraction(d, pd_max + 1)
    argument = {
        pred: tuple(argument_entrenchment(theory, ps, pred, i)
                    for i in range(1, arity + 1))
        for pred, arity in sorted(theory.signature.predicates.items())
    }
    return EntrenchmentReport(entrenchment, distance, pd_max, argument)


def argument_domain(theory: Theory, pred: str, index: int) -> frozenset[str]:
    """Constants appearing at `index` (1-based) across the derivable atoms
    of `pred`; empty for an out-of-range index."""
    arity = theory.signature.predicates.get(pred)
    if arity is None or index < 1 or index > arity:
        return frozenset()
    return frozenset(
        a.args[index - 1].name for a in least_model(theory) if a.pred == pred
    )


def recovery_probability(theory: Theory, atom: Atom, index: int) -> Fraction:
    """Chance of guessing back a deleted argument: 1 / |domain|."""
    if atom not in least_model(theory):
        raise ValueError(f"{atom} is not a theorem")
    if index < 1 or index > atom.arity:
        raise ValueError(f"argument index {index} out of range for {atom}")
    domain = argument_domain(theory, atom.pred, index)
    return Fraction(1, len(domain))


def argument_entrenchment(theory: Theory, ps: PreferredStructure,
                          pred: str, index: int) -> ArgScore:
    """Domain size, or PROTECTED when the predicate occurs in the observations."""
    arity = theory.signature.predicates.get(pred)
    if arity is None or index < 1 or index > arity:
        raise ValueError(f"argument index {index} out of range for {pred}")
    if pred in ps.predicates():
        return PROTECTED
    return len(argument_domain(theory, pred, index))


# ---------------------------------------------------------------------------
# Repair scoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RepairScore:
    """Category plus a value; lower values are preferred within a category.

    `value` is a Fraction for predicate changes, an int (entrenchment
    reduction / edit count) otherwise; None marks an argument change that
    touches a PROTECTED argument and ranks after all finite-valued plans.
    """

    category: str
    value: Optional[Union[Fraction, int]]

    def sort_key(self) -> tuple:
        cat = CATEGORY_ORDER.index(self.category)
        if self.value is None:
            return (cat, 1, Fraction(0))
        return (cat, 0, Fraction(self.value))


def score_repair(original: Theory, repaired: Theory, plan,
                 ps: PreferredStructure) -> RepairScore:
    """Score a plan: predicate renames dominate, then argument edits, then
    content edits.

    Predicate changes are valued by the most entrenched pre-existing symbol
    the plan rewrites, on the original theory. Argument changes are valued
    by the drop in total argument entrenchment over the touched predicates,
    with freshly added argument positions scored on the repaired theory.
    """
    if plan.operations and plan.apply_to(original) != repaired:
        raise ValueError("plan does not produce the supplied repaired theory")
    renames: list[tuple[str, Optional[str]]] = []
    arg_preds: set[str] = set()
    edits = 0
    state = original
    for op in plan.operations:
        renames.extend(op.signature_renames(state))
        arg_preds |= op.argument_targets(state)
        edits += op.edit_count()
        state = op.apply(state)

    if renames:
        touched = set()
        for old, new in renames:
            touched.add(old)
            if new is not None:
                touched.add(new)
        report = predicate_entrenchment(original, ps)
        known = [report.entrenchment[p] for p in sorted(touched) if p in report.entrenchment]
        value = max(known) if known else Fraction(1)
        return RepairScore(PREDICATE_CHANGE, value)

    if arg_preds:
        saw_protected = False
        total_before = 0
        total_after = 0
        for pred in sorted(arg_preds):
            for theory, bucket in ((original, "before"), (repaired, "after")):
                arity = theory.signature.predicates.get(pred)
                if arity is None:
                    continue
                for i in range(1, arity + 1):
                    score = argument_entrenchment(theory, ps, pred, i)
                    if score is PROTECTED:
                        saw_protected = True
                    elif bucket == "before":
                        total_before += score
                    else:
                        total_after += score
        if saw_protected:
            return RepairScore(ARGUMENT_CHANGE, None)
        return RepairScore(ARGUMENT_CHANGE, total_before - total_after)

    return RepairScore(CONTENT_CHANGE, edits)
