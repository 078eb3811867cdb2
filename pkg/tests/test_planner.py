import itertools

import pytest

from pal.engine import WellFoundedEngine
from pal.errors import PalSemanticError
from pal.planner import (
    Options, Solver, build_query, enumerate_assignments, expand_query, solve,
)
from pal.syntax import parse_program, parse_sentence

from helpers import BLOCKS_DECLS, BLOCKS_INIT, build_program, load_session


def q(text):
    return parse_sentence(f"query {text}?")


def blocks(kernel=None):
    prog, engine, narrative = load_session(BLOCKS_DECLS + BLOCKS_INIT, kernel=kernel)
    return prog, engine, narrative


def run_query(prog, engine, narrative, qtext, concurrent=False, solutions=None):
    query = build_query(q(qtext), prog.signature, prog)
    opts = Options(concurrent=concurrent, solutions=solutions)
    return query, solve(
        prog, engine, narrative.current, narrative.previous_of_current(),
        query, opts,
    )


def plan_strs(prog, sol):
    return [
        {prog.action_str(a): prog.decode(v) for a, v in acts.items()}
        for acts in sol.plan
    ]


class TestExpandQuery:
    def test_semicolons(self):
        conds = expand_query(q("; ; ; not free(3)"))
        assert len(conds) == 4
        assert conds[:3] == [None, None, None]
        assert conds[3] is not None

    def test_ellipsis_replaces_semicolon_run(self):
        assert expand_query(q("...{3} not free(3)")) == expand_query(
            q("; ; ; not free(3)")
        )

    def test_ellipsis_repeats_the_left_condition(self):
        conds = expand_query(q("free(1) ...{3} not free(3)"))
        assert len(conds) == 4
        assert conds[0] == conds[1] == conds[2]
        assert conds[0] is not None
        assert conds[3] != conds[0]

    def test_zero_count_rejected(self):
        with pytest.raises(PalSemanticError):
            expand_query(q("...{0} not free(3)"))

    def test_single_item(self):
        assert len(expand_query(q("free(2) and loc(2)=table"))) == 1


class TestEnumerateAssignments:
    def test_non_concurrent_blocks(self):
        prog = build_program(BLOCKS_DECLS)
        assignments = list(enumerate_assignments(prog, Options(concurrent=False)))
        assert len(assignments) == 20
        first, last = assignments[0], assignments[-1]
        assert first == {prog.action_index[("carry", (1,))]: prog.encode(1)}
        assert last == {prog.action_index[("carry", (4,))]: prog.encode("table")}

    def test_concurrent_blocks(self):
        prog = build_program(BLOCKS_DECLS)
        assignments = list(enumerate_assignments(prog, Options(concurrent=True)))
        assert len(assignments) == 6 ** 4
        assert assignments[0] == {}
        assert len(set(map(lambda a: tuple(sorted(a.items())), assignments))) == 6 ** 4

    def test_no_actions_concurrent(self):
        prog = build_program("fluents f;")
        assert list(enumerate_assignments(prog, Options(concurrent=True))) == [{}]

    def test_no_actions_non_concurrent(self):
        prog = build_program("fluents f;")
        assert list(enumerate_assignments(prog, Options(concurrent=False))) == []


class TestSolve:
    def test_four_solutions_in_declaration_order(self, kernel):
        prog, engine, narrative = blocks(kernel)
        _, sols = run_query(prog, engine, narrative, "true;not free(3) ")
        assert [plan_strs(prog, s) for s in sols] == [
            [{"carry(1)": 3}],
            [{"carry(2)": 3}],
            [{"carry(3)": 3}],
            [{"carry(4)": 3}],
        ]
        for sol in sols:
            assert sol.trace[1].value_of("free", (3,)) == "false"

    def test_zero_transition_bindings(self, kernel):
        prog, engine, narrative = blocks(kernel)
        narrative.perform(
            [
                {prog.action_index[("carry", (1,))]: prog.encode(2),
                 prog.action_index[("carry", (3,))]: prog.encode(4)},
                {prog.action_index[("carry", (1,))]: prog.encode(3)},
                {},
            ]
        )
        query, sols = run_query(prog, engine, narrative, "not free(B)")
        assert query.transitions == 0
        assert [s.binding for s in sols] == [{"B": 3}, {"B": 4}]
        assert all(s.plan == [] for s in sols)

    def test_zero_transition_ground(self, kernel):
        prog, engine, narrative = blocks(kernel)
        _, yes = run_query(prog, engine, narrative, "free(2) and loc(2)=table")
        assert len(yes) == 1 and yes[0].plan == []
        _, no = run_query(prog, engine, narrative, "not free(2)")
        assert no == []

    def test_solution_limit_is_a_prefix(self, kernel):
        prog, engine, narrative = blocks(kernel)
        _, unlimited = run_query(prog, engine, narrative, "; not free(3)")
        for k in (1, 2, 3):
            _, limited = run_query(
                prog, engine, narrative, "; not free(3)", solutions=k
            )
            assert [plan_strs(prog, s) for s in limited] == [
                plan_strs(prog, s) for s in unlimited[:k]
            ]

    def test_plans_replay_through_the_narrative(self, kernel):
        prog, engine, narrative = blocks(kernel)
        _, sols = run_query(prog, engine, narrative, "; ; not free(3)")
        assert sols
        for sol in sols[:25]:
            replay = load_session(BLOCKS_DECLS + BLOCKS_INIT, kernel=kernel)[2]
            replay.perform(sol.plan)
            assert replay.states[1:] == sol.trace[1:]

    def test_deterministic_emission(self, kernel):
        prog, engine, narrative = blocks(kernel)
        _, a = run_query(prog, engine, narrative, "; ; not free(3)")
        _, b = run_query(prog, engine, narrative, "; ; not free(3)")
        assert [plan_strs(prog, s) for s in a] == [plan_strs(prog, s) for s in b]

    def test_two_step_count_against_brute_force(self, kernel):
        prog, engine, narrative = blocks(kernel)
        _, sols = run_query(prog, engine, narrative, "; ; not free(3)")

        # independent direct simulation of the blocks rules
        def simulate(state, move):
            locs, free = state
            b, l = move
            if free[b - 1] != "true":
                return None
            if l != "table" and free[l - 1] != "true":
                return None
            if l != "table" and locs[b - 1] == l:
                return None  # both freeing and occupying l: contradictory
            locs2, free2 = list(locs), list(free)
            old = locs[b - 1]
            locs2[b - 1] = l
            if old != "table":
                free2[old - 1] = "true"
            if l != "table":
                free2[l - 1] = "false"
            return tuple(locs2), tuple(free2)

        moves = [(b, l) for b in range(1, 5) for l in [1, 2, 3, 4, "table"]]
        start = (("table",) * 4, ("true",) * 4)
        count = 0
        for m1, m2 in itertools.product(moves, repeat=2):
            s1 = simulate(start, m1)
            if s1 is None:
                continue
            s2 = simulate(s1, m2)
            if s2 is None:
                continue
            if s2[1][2] == "false":
                count += 1
        assert len(sols) == count

    def test_binding_enumeration_is_outermost_first(self, kernel):
        prog, engine, narrative = blocks(kernel)
        query, sols = run_query(prog, engine, narrative, "loc(B)=table and free(C)")
        assert query.var_names == ["B", "C"]
        bindings = [(s.binding["B"], s.binding["C"]) for s in sols]
        assert bindings == sorted(bindings)
        assert len(bindings) == 16

    def test_pert_in_query_conditions(self, kernel):
        # pert(f) tests the pertinence record of the examined state
        prog, engine, narrative = blocks(kernel)
        _, at_zero = run_query(prog, engine, narrative, "pert(loc(1))")
        assert at_zero == []  # situation 0 has an empty record
        narrative.perform([{prog.action_index[("carry", (1,))]: prog.encode(2)}])
        _, now = run_query(prog, engine, narrative, "pert(loc(1)) and pert(carry(1))")
        assert len(now) == 1
        _, hyp = run_query(prog, engine, narrative, "; pert(free(B))")
        # one step later: free(B) pertinent only where a move touches it
        assert hyp

    def test_prev_in_query_uses_narrative_predecessor(self, kernel):
        prog, engine, narrative = blocks(kernel)
        narrative.perform([{prog.action_index[("carry", (1,))]: prog.encode(2)}])
        _, sols = run_query(prog, engine, narrative, "prev(loc(1))=table and loc(1)=2")
        assert len(sols) == 1

    def test_impossible_binding_is_skipped(self, kernel):
        # out-of-sort argument arithmetic makes the condition false
        text = (
            "sets b = [1,3];\nactions mark: b;\nfluents f: b;\nvars B: b;\n"
            "initially f(B);"
        )
        prog, engine, narrative = load_session(text, kernel=kernel)
        query = build_query(q("f(B-1)"), prog.signature, prog)
        sols = solve(
            prog, engine, narrative.current, None, query, Options(concurrent=False)
        )
        assert [s.binding for s in sols] == [{"B": 2}, {"B": 3}]
