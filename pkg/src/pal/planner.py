"""Query answering: current-state checks and hypothetical plan search.

The search is deliberately naive: every action assignment is tried at
every transition slot, in a canonical order, so solution lists and
counts are reproducible.  Under non-concurrency exactly one ground
action is performed per slot; under concurrency any subset of ground
actions (including none) is assigned values.
"""

import itertools
import time
from dataclasses import dataclass
from typing import Optional

from .engine import literal_holds
from .errors import PalSemanticError, PalTimeout
from .grounding import Grounder


@dataclass(frozen=True)
class Options:
    concurrent: bool = True
    solutions: Optional[int] = None  # None means unlimited

    @staticmethod
    def from_ast(opts_ast):
        return Options(concurrent=opts_ast.concurrent, solutions=opts_ast.solutions)


class Query:
    """Expanded query: one condition per situation, plus its variables."""

    __slots__ = ("conditions", "var_names")

    def __init__(self, conditions, var_names):
        self.conditions = conditions  # AST literal tuples; None means true
        self.var_names = var_names  # first-occurrence order

    @property
    def transitions(self):
        return len(self.conditions) - 1


def expand_query(qast):
    """Flatten separators and ellipsis repeats into one item per situation."""
    conditions = []
    for item in qast.items:
        if item.sep is None:
            conditions.append(item.cond)
        elif item.sep == ";":
            conditions.append(item.cond)
        else:
            count = item.sep[1]
            if count < 1:
                raise PalSemanticError(
                    "ellipsis repeat count must be at least 1",
                    qast.pos.line,
                    qast.pos.column,
                )
            conditions.extend([item.cond] * count)
    return conditions


def build_query(qast, signature, prog):
    conditions = expand_query(qast)
    grounder = Grounder(signature, prog)
    found = []
    for cond in conditions:
        if cond is not None:
            for lit in cond:
                grounder.collect_vars(lit, found)
    return Query(conditions, found)


def enumerate_assignments(prog, options):
    """All candidate action assignments for one transition, in order.

    Non-concurrent: one (ground action, codomain value) pair each.
    Concurrent: every partial function from ground actions to values,
    the empty assignment first; per-action choice order is "not
    performed", then the codomain values.
    """
    if not options.concurrent:
        for aid in range(prog.n_actions):
            for v in prog.action_codomain[aid]:
                yield {aid: v}
        return
    choices = [(None,) + prog.action_codomain[aid] for aid in range(prog.n_actions)]
    for combo in itertools.product(*choices):
        yield {aid: v for aid, v in enumerate(combo) if v is not None}


@dataclass
class Solution:
    binding: dict  # variable name -> decoded value
    plan: list  # one acts dict per transition
    trace: list  # induced states, index 0 is the current state


class _Done(Exception):
    pass


def _condition_holds(gcond, prog, state, prev_state):
    if not gcond:
        return True
    prev_vals = prev_state.vals if prev_state is not None else None
    cur = state.vals
    for lit in gcond:
        if not literal_holds(
            lit, prog, lambda f: cur[f], prev_vals, state.acts, state.pert
        ):
            return False
    return True


class Solver:
    """Depth-first plan search with canonical emission order."""

    def __init__(self, prog, engine, options, deadline=None):
        self.prog = prog
        self.engine = engine
        self.options = options
        self.deadline = deadline
        self._tick = 0

    def solve(self, current, prev_of_current, query):
        """Answer a query against the narrative's last state."""
        prog = self.prog
        grounder = Grounder(prog.signature, prog)
        limit = self.options.solutions
        solutions = []

        var_sorts = [prog.signature.vars[v].elements for v in query.var_names]
        assignments = list(enumerate_assignments(prog, self.options))

        try:
            for combo in itertools.product(*var_sorts):
                binding = dict(zip(query.var_names, combo))
                gconds = []
                impossible = False
                for cond in query.conditions:
                    if cond is None:
                        gconds.append(())
                        continue
                    g = grounder.ground_condition(cond, binding)
                    if g is None:
                        impossible = True
                        break
                    gconds.append(g)
                if impossible:
                    continue
                if not _condition_holds(gconds[0], prog, current, prev_of_current):
                    continue
                self._dfs(
                    1, current, prev_of_current, gconds, assignments,
                    binding, [], [current], solutions, limit,
                )
        except _Done:
            pass
        return solutions

    def _dfs(self, slot, state, prev_state, gconds, assignments, binding,
             plan, trace, solutions, limit):
        if slot >= len(gconds):
            solutions.append(Solution(dict(binding), list(plan), list(trace)))
            if limit is not None and len(solutions) >= limit:
                raise _Done()
            return
        for acts in assignments:
            self._check_deadline()
            result = self.engine.transition(state, acts)
            if not result.accepted:
                continue  # rejected, inconsistent, undefined or erroneous
            nxt = result.state
            if _condition_holds(gconds[slot], self.prog, nxt, state):
                plan.append(acts)
                trace.append(nxt)
                self._dfs(
                    slot + 1, nxt, state, gconds, assignments,
                    binding, plan, trace, solutions, limit,
                )
                plan.pop()
                trace.pop()

    def _check_deadline(self):
        if self.deadline is None:
            return
        self._tick += 1
        if self._tick & 0xFF == 0 and time.monotonic() > self.deadline:
            raise PalTimeout("query exceeded its time limit")


def solve(prog, engine, current, prev_of_current, query, options, deadline=None):
    return Solver(prog, engine, options, deadline).solve(
        current, prev_of_current, query
    )
