"""Derivability, proof traces, and fault detection.

Two routes are deliberately kept independent: a bottom-up semi-naive
fixpoint (`least_model`) is the derivability oracle, while a top-down
SL-style search with leftmost selection and iterative deepening extracts
proof traces (`prove`) and failure frontiers for underivable goals. Fault
detection compares the least model against the observation store.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from .core import EQUALS, Atom, Clause, PreferredStructure, Term, Theory

Subst = dict[str, Term]

_PROVE_STEP_CAP = 256
_FRONTIER_DEPTH_CAP = 24
_FRONTIER_NODE_CAP = 20000


def resolve_term(t: Term, s: Subst) -> Term:
    while t.is_variable and t.name in s:
        t = s[t.name]
    return t


def substitute(atom: Atom, s: Subst) -> Atom:
    return Atom(atom.pred, tuple(resolve_term(t, s) for t in atom.args))


def unify_terms(a: Term, b: Term, s: Subst) -> Optional[Subst]:
    a = resolve_term(a, s)
    b = resolve_term(b, s)
    if a == b:
        return s
    if a.is_variable:
        s2 = dict(s)
        s2[a.name] = b
        return s2
    if b.is_variable:
        s2 = dict(s)
        s2[b.name] = a
        return s2
    return None  # distinct constants


def unify_atoms(a: Atom, b: Atom, s: Optional[Subst] = None) -> Optional[Subst]:
    if a.pred != b.pred or a.arity != b.arity:
        return None
    out: Optional[Subst] = dict(s) if s is not None else {}
    for ta, tb in zip(a.args, b.args):
        out = unify_terms(ta, tb, out)
        if out is None:
            return None
    return out


def _rename_clause(clause: Clause, n: int) -> Clause:
    # Every in-flight variable ends in a fresh `__<n>`, so renamed variables
    # can never collide with each other or with user variables.
    mapping = {v: Term(f"{v}__{n}") for v in clause.variables()}

    def ren(a: Atom) -> Atom:
        return Atom(a.pred, tuple(mapping.get(t.name, t) if t.is_variable else t for t in a.args))

    return Clause(clause.cid, tuple(ren(a) for a in clause.body),
                  ren(clause.head) if clause.head is not None else None)


# ---------------------------------------------------------------------------
# Bottom-up fixpoint
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16384)
def least_model(theory: Theory) -> frozenset[Atom]:
    """Least fixed point of immediate consequence; goals contribute nothing.

    Semi-naive evaluation: each round joins every rule body so that at
    least one body atom matches a newly derived fact. Terminates because
    assertions are ground and rules are range-restricted.
    """
    model: set[Atom] = {c.head for c in theory.clauses if c.is_assertion}  # type: ignore[misc]
    rules = theory.rules()
    delta = set(model)
    while delta:
        old = _index(model - delta)
        new_facts = _index(delta)
        everything = _index(model)
        new: set[Atom] = set()
        for rule in rules:
            for k in range(len(rule.body)):
                sources = [
                    old if j < k else new_facts if j == k else everything
                    for j in range(len(rule.body))
                ]
                for s in _join(rule.body, sources, 0, {}):
                    derived = substitute(rule.head, s)  # type: ignore[arg-type]
                    if derived not in model:
                        new.add(derived)
        delta = new - model
        model |= delta
    return frozenset(model)


def _index(atoms: set[Atom]) -> dict[str, list[Atom]]:
    out: dict[str, list[Atom]] = {}
    for a in sorted(atoms):
        out.setdefault(a.pred, []).append(a)
    return out


def _join(body: tuple[Atom, ...], sources: list[dict[str, list[Atom]]],
          j: int, s: Subst) -> Iterator[Subst]:
    if j == len(body):
        yield s
        return
    pattern = substitute(body[j], s)
    for fact in sources[j].get(pattern.pred, ()):
        s2 = unify_atoms(pattern, fact, s)
        if s2 is not None:
            yield from _join(body, sources, j + 1, s2)


# ---------------------------------------------------------------------------
# Top-down proof search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProofStep:
    """One linear-resolution step: `goal` resolved against clause `clause_id`.

    `subst` binds the clause's own variables as instantiated in the final
    proof. `spawned_by` locates the body atom that introduced `goal`:
    (clause id, 0-based body position), or None for the root goal.
    """

    clause_id: str
    goal: Atom
    subst: tuple[tuple[str, Term], ...]
    spawned_by: Optional[tuple[str, int]]


@dataclass(frozen=True)
class Proof:
    root: Atom
    steps: tuple[ProofStep, ...]

    def clause_ids(self) -> list[str]:
        return [s.clause_id for s in self.steps]


@dataclass(frozen=True)
class _RawStep:
    clause_id: str
    goal: Atom
    renamed: Clause
    spawned_by: Optional[tuple[str, int]]


def prove(theory: Theory, goal: Atom) -> Optional[Proof]:
    """First proof found under clause order + leftmost selection, shortest first.

    Iterative deepening over the total number of resolution steps keeps the
    search fair; derivability itself is decided by the fixpoint, so absence
    is cheap and search only runs for provable goals.
    """
    if not goal.is_ground:
        raise ValueError(f"goal {goal} is not ground")
    model = least_model(theory)
    if goal not in model:
        return None
    counter = itertools.count()
    for budget in range(1, _PROVE_STEP_CAP + 1):
        found = _prove_dfs(theory, model, [(goal, None, frozenset({goal}))],
                           [], {}, budget, counter)
        if found is not None:
            steps, env = found
            return Proof(goal, tuple(_finalize_step(st, env) for st in steps))
    return None


def _satisfiable(model: frozenset[Atom], by_pred: dict[str, list[Atom]], atom: Atom) -> bool:
    # A goal no model atom matches can never be proved; prune it early.
    if atom.is_ground:
        return atom in model
    return any(unify_atoms(atom, fact, {}) is not None for fact in by_pred.get(atom.pred, ()))


def _prove_dfs(theory, model, goals, steps, env, budget, counter):
    if not goals:
        return steps, env
    if budget == 0:
        return None
    by_pred = _model_index(model)
    g, origin, ancestors = goals[0]
    current = substitute(g, env)
    for clause in theory.clauses:
        if clause.head is None:
            continue
        renamed = _rename_clause(clause, next(counter))
        s2 = unify_atoms(current, renamed.head, env)
        if s2 is None:
            continue
        spawned = []
        dead = False
        for i, b in enumerate(renamed.body):
            inst = substitute(b, s2)
            if not _satisfiable(model, by_pred, inst):
                dead = True
                break
            if inst.is_ground and (inst in ancestors or inst == current):
                dead = True  # ground goal recurring on its own path
                break
            spawned.append((b, (clause.cid, i), ancestors | {current} if current.is_ground else ancestors))
        if dead:
            continue
        step = _RawStep(clause.cid, current, renamed, origin)
        found = _prove_dfs(theory, model, spawned + goals[1:], steps + [step],
                           s2, budget - 1, counter)
        if found is not None:
            return found
    return None


@lru_cache(maxsize=1024)
def _model_index_cached(model: frozenset[Atom]) -> dict[str, list[Atom]]:
    return _index(set(model))


def _model_index(model: frozenset[Atom]) -> dict[str, list[Atom]]:
    return _model_index_cached(model)


def enumerate_proofs(theory: Theory, goal: Atom, max_proofs: int = 64,
                     max_depth: int = 32) -> list[Proof]:
    """All distinct proofs up to a step bound, in search order, capped."""
    model = least_model(theory)
    if goal not in model:
        return []
    by_pred = _model_index(model)
    counter = itertools.count()
    out: list[Proof] = []

    def walk(goals, steps, env, budget) -> None:
        if len(out) >= max_proofs:
            return
        if not goals:
            out.append(Proof(goal, tuple(_finalize_step(st, env) for st in steps)))
            return
        if budget == 0:
            return
        g, origin, ancestors = goals[0]
        current = substitute(g, env)
        for clause in theory.clauses:
            if clause.head is None:
                continue
            renamed = _rename_clause(clause, next(counter))
            s2 = unify_atoms(current, renamed.head, env)
            if s2 is None:
                continue
            spawned = []
            dead = False
            for i, b in enumerate(renamed.body):
                inst = substitute(b, s2)
                if not _satisfiable(model, by_pred, inst):
                    dead = True
                    break
                if inst.is_ground and (inst in ancestors or inst == current):
                    dead = True
                    break
                spawned.append((b, (clause.cid, i),
                                ancestors | {current} if current.is_ground else ancestors))
            if dead:
                continue
            step = _RawStep(clause.cid, current, renamed, origin)
            walk(spawned + goals[1:], steps + [step], s2, budget - 1)

    walk([(goal, None, frozenset({goal}))], [], {}, max_depth)
    return out


def _finalize_step(raw: _RawStep, env: Subst) -> ProofStep:
    binds = []
    for rv in sorted(raw.renamed.variables()):
        original = rv.rsplit("__", 1)[0]
        binds.append((original, resolve_term(Term(rv), env)))
    return ProofStep(raw.clause_id, substitute(raw.goal, env), tuple(binds), raw.spawned_by)


def replay(theory: Theory, proof: Proof) -> bool:
    """Re-run a proof trace by clause ids; True iff it reaches the empty goal."""
    goals: list[Atom] = [proof.root]
    env: Subst = {}
    for k, step in enumerate(proof.steps):
        if not goals:
            return False
        current = substitute(goals.pop(0), env)
        if not theory.has_clause(step.clause_id):
            return False
        clause = theory.clause(step.clause_id)
        if clause.head is None:
            return False
        renamed = _rename_clause(clause, 1_000_000 + k)
        env2 = unify_atoms(current, renamed.head, env)
        if env2 is None:
            return False
        env = env2
        goals = list(renamed.body) + goals
    return not goals


# ---------------------------------------------------------------------------
# Failure frontiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrontierEntry:
    """A goal whose whole resolution subtree failed, with the nearest miss.

    `mismatch_index` is 1-based and set when the miss shares the predicate;
    then `goal_const`/`axiom_const` hold the clashing constants. A miss on a
    different predicate sets `same_pred=False` and no index.
    """

    goal: Atom
    spawned_by: Optional[tuple[str, int]]
    miss_clause: Optional[str]
    same_pred: bool = False
    mismatch_index: Optional[int] = None
    goal_const: Optional[str] = None
    axiom_const: Optional[str] = None


@dataclass(frozen=True)
class FailureFrontier:
    entries: tuple[FrontierEntry, ...]


def failure_frontier(theory: Theory, goal: Atom) -> FailureFrontier:
    """Failing steps of the exhausted SL search for an underivable goal.

    One entry per selected goal whose every resolution alternative fails,
    recorded deepest-first, deduplicated by goal shape.
    """
    entries: list[FrontierEntry] = []
    recorded: set[tuple] = set()
    nodes = [_FRONTIER_NODE_CAP]
    counter = itertools.count()

    def record(goal_inst: Atom, origin) -> None:
        key = _normalize(goal_inst)
        if key in recorded:
            return
        recorded.add(key)
        entries.append(_nearest_miss_entry(theory, goal_inst, origin))

    def explore(goals, env: Subst, depth: int) -> bool:
        if not goals:
            return True
        if depth == 0 or nodes[0] <= 0:
            return False
        nodes[0] -= 1
        g, origin, ancestors = goals[0]
        current = substitute(g, env)
        if _normalize(current) in ancestors:
            return False  # loop cut, no entry
        for clause in theory.clauses:
            if clause.head is None:
                continue
            renamed = _rename_clause(clause, next(counter))
            s2 = unify_atoms(current, renamed.head, env)
            if s2 is None:
                continue
            chain = ancestors | {_normalize(current)}
            spawned = [(b, (clause.cid, i), chain) for i, b in enumerate(renamed.body)]
            if explore(spawned + goals[1:], s2, depth - 1):
                return True
        record(current, origin)
        return False

    explore([(goal, None, frozenset())], {}, _FRONTIER_DEPTH_CAP)
    return FailureFrontier(tuple(entries))


def _normalize(atom: Atom) -> tuple:
    """Atom shape with variables canonically numbered, for cycle checks."""
    seen: dict[str, int] = {}
    args = []
    for t in atom.args:
        if t.is_variable:
            idx = seen.setdefault(t.name, len(seen))
            args.append(("v", idx))
        else:
            args.append(("c", t.name))
    return (atom.pred, tuple(args))


def _nearest_miss_entry(theory: Theory, goal: Atom, origin) -> FrontierEntry:
    """Best non-unifying head: same predicate beats longer argument prefix,
    ties go to the earlier clause."""
    best: Optional[tuple[tuple[int, int, int], Clause, int]] = None
    for idx, clause in enumerate(theory.clauses):
        if clause.head is None:
            continue
        renamed = _rename_clause(clause, 2_000_000 + idx)
        if unify_atoms(goal, renamed.head, {}) is not None:
            continue  # resolvable head is not a miss
        same = 1 if renamed.head.pred == goal.pred else 0
        prefix = 0
        s: Optional[Subst] = {}
        for ta, tb in zip(goal.args, renamed.head.args):
            s = unify_terms(ta, tb, s)
            if s is None:
                break
            prefix += 1
        score = (same, prefix, -idx)
        if best is None or score > best[0]:
            best = (score, clause, prefix)
    if best is None:
        return FrontierEntry(goal, origin, None)
    (same, _, _), clause, prefix = best
    if not same:
        return FrontierEntry(goal, origin, clause.cid, same_pred=False)
    goal_t = goal.args[prefix]
    axiom_t = clause.head.args[prefix]  # type: ignore[union-attr]
    return FrontierEntry(
        goal,
        origin,
        clause.cid,
        same_pred=True,
        mismatch_index=prefix + 1,
        goal_const=goal_t.name if goal_t.is_constant else None,
        axiom_const=axiom_t.name if axiom_t.is_constant else None,
    )


# ---------------------------------------------------------------------------
# Fault detection
# ---------------------------------------------------------------------------

INCOMPATIBILITY = "incompatibility"
INSUFFICIENCY = "insufficiency"


@dataclass(frozen=True)
class Fault:
    """An unwanted theorem with its proof, or an unprovable wanted atom
    with its failure frontier."""

    kind: str
    atom: Atom
    proof: Optional[Proof] = None
    frontier: Optional[FailureFrontier] = None


def detect_faults(theory: Theory, ps: PreferredStructure) -> list[Fault]:
    """Wanted-but-unprovable atoms first (observation order), then
    derivable-but-false atoms, each with its evidence."""
    model = least_model(theory)
    faults: list[Fault] = []
    for atom in ps.true_atoms:
        if atom not in model:
            faults.append(Fault(INSUFFICIENCY, atom, frontier=failure_frontier(theory, atom)))
    for atom in ps.false_atoms:
        if atom in model:
            faults.append(Fault(INCOMPATIBILITY, atom, proof=prove(theory, atom)))
    return faults


def una_faults(theory: Theory) -> list[Fault]:
    """Derived equalities over distinct constants, as incompatibilities.

    Opt-in (unique-names reading of `=`); reflexive equations are fine.
    """
    faults = []
    for atom in sorted(least_model(theory)):
        if atom.pred == EQUALS and atom.arity == 2 and atom.args[0] != atom.args[1]:
            faults.append(Fault(INCOMPATIBILITY, atom, proof=prove(theory, atom)))
    return faults
