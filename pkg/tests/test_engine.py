import random

import pytest

from pal.engine import (
    ERR_ARITH, ERR_CODOMAIN, State, WellFoundedEngine, compute_transition,
    create_engine, eval_value_expr, literal_holds, validate_state,
)
from pal.errors import PalConfigError
from pal.grounding import UNDEF, Grounder
from pal.syntax import parse_program

from helpers import BLOCKS_DECLS, BLOCKS_INIT, acts_of, build_program, load_session


def blocks_setup(kernel=None):
    prog, engine, narrative = load_session(BLOCKS_DECLS + BLOCKS_INIT, kernel=kernel)
    return prog, engine, narrative.current


def pert_names(prog, state):
    return {prog.fluent_str(f) for f in state.pert}


class TestEvalValueExpr:
    def test_prev_on_all_on_table(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        assert eval_value_expr(("prev", 0), prog, prev=initial) == "table"

    def test_constant_arithmetic_precedence(self):
        prog = build_program(BLOCKS_DECLS)
        expr = ("add", ("const", 2), ("mul", ("const", 3), ("const", 1)))
        assert eval_value_expr(expr, prog) == 5

    def test_unperformed_action_is_undefined(self):
        prog = build_program(BLOCKS_DECLS)
        assert eval_value_expr(("act", 0), prog, acts={}) is None

    def test_performed_action_has_its_value(self):
        prog = build_program(BLOCKS_DECLS)
        assert eval_value_expr(("act", 0), prog, acts={("carry", (1,)): 2}) == 2

    def test_partial_current_valuation(self):
        prog = build_program(BLOCKS_DECLS)
        assert eval_value_expr(("flu", 0), prog, current={("loc", (1,)): 3}) == 3
        assert eval_value_expr(("flu", 1), prog, current={("loc", (1,)): 3}) is None


class TestComputeTransition:
    def test_carry_1_onto_2_transition(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        result = engine.transition(initial, acts_of(prog, **{"carry(1)": 2}))
        assert result.accepted
        nxt = result.state
        assert pert_names(prog, nxt) == {"loc(1)", "free(2)"}
        assert nxt.value_of("loc", (1,)) == 2
        assert nxt.value_of("free", (2,)) == "false"
        for b in (2, 3, 4):
            assert nxt.value_of("loc", (b,)) == "table"
        for b in (1, 3, 4):
            assert nxt.value_of("free", (b,)) == "true"

    def test_empty_assignment_is_pure_inertia(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        result = engine.transition(initial, {})
        assert result.accepted
        assert result.state.pert == frozenset()
        assert result.state.vals == initial.vals

    def test_carry_onto_occupied_block_rejected(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        step1 = engine.transition(initial, acts_of(prog, **{"carry(1)": 2}))
        result = engine.transition(step1.state, acts_of(prog, **{"carry(3)": 2}))
        assert result.kind == "rejected"
        # the violated constraint is the ground instance with B=3, C=2
        assert prog.rule_str(result.rule) == (
            "false :- carry(3)=2, not (prev(free(2))=true)."
        )

    def test_carry_non_free_block_rejected(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        step1 = engine.transition(initial, acts_of(prog, **{"carry(1)": 2}))
        result = engine.transition(step1.state, acts_of(prog, **{"carry(2)": 4}))
        assert result.kind == "rejected"
        assert "pert(carry(2))" in prog.rule_str(result.rule)

    def test_ramification_frees_the_old_location(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        s1 = engine.transition(initial, acts_of(prog, **{"carry(1)": 2})).state
        s2 = engine.transition(s1, acts_of(prog, **{"carry(1)": "table"})).state
        assert pert_names(prog, s2) == {"loc(1)", "free(2)"}
        assert s2.value_of("free", (2,)) == "true"


class TestSemanticsInterface:
    def test_wf_backend_matches_direct_computation(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        acts = acts_of(prog, **{"carry(2)": "table"})
        via_backend = create_engine(prog, "wf", kernel=kernel).transition(initial, acts)
        direct = compute_transition(initial, acts, prog, kernel=kernel)
        assert via_backend.kind == direct.kind == "accepted"
        assert via_backend.state == direct.state

    def test_unknown_backend_is_a_configuration_error(self):
        prog = build_program(BLOCKS_DECLS)
        with pytest.raises(PalConfigError, match="unknown semantics backend"):
            create_engine(prog, "procedural")

    def test_transitions_are_deterministic(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        acts = acts_of(prog, **{"carry(1)": 3, "carry(2)": 4})
        r1 = engine.transition(initial, acts)
        r2 = engine.transition(initial, acts)
        assert r1.kind == r2.kind == "accepted"
        assert r1.state == r2.state

    def test_unknown_kernel_rejected(self):
        prog = build_program(BLOCKS_DECLS)
        with pytest.raises(PalConfigError):
            WellFoundedEngine(prog, kernel="fpga")


class TestOutcomes:
    def test_unfounded_pertinence_is_undefined(self, kernel):
        prog, engine, narr = load_session(
            "fluents f;\nrules f:=true if not pert(f);\ninitially not f;",
            kernel=kernel,
        )
        result = engine.transition(narr.current, {})
        assert result.kind == "undefined"
        assert result.fluents == [0]

    def test_undefined_beats_falsum(self, kernel):
        prog, engine, narr = load_session(
            "fluents f;\nrules f:=true if not pert(f); false;\ninitially not f;",
            kernel=kernel,
        )
        assert engine.transition(narr.current, {}).kind == "undefined"

    def test_conflicting_causes_are_inconsistent(self, kernel):
        prog, engine, narr = load_session(
            "sets v = [0,3];\nfluents f: -> v;\nrules f:=1; f:=2;\ninitially f:=0;",
            kernel=kernel,
        )
        result = engine.transition(narr.current, {})
        assert result.kind == "inconsistent"
        assert {prog.decode(result.v1), prog.decode(result.v2)} == {1, 2}

    def test_inconsistent_beats_falsum(self, kernel):
        prog, engine, narr = load_session(
            "sets v = [0,3];\nfluents f: -> v;\nrules f:=1; f:=2; false;\n"
            "initially f:=0;",
            kernel=kernel,
        )
        assert engine.transition(narr.current, {}).kind == "inconsistent"

    def test_head_value_outside_codomain_is_an_error(self, kernel):
        prog, engine, narr = load_session(
            "sets v = [0,1];\nactions tick;\nfluents f: -> v;\n"
            "rules f:=prev(f)+1 if tick;\ninitially f:=1;",
            kernel=kernel,
        )
        result = engine.transition(narr.current, acts_of(prog, tick=True))
        assert result.kind == "eval_error"
        assert result.err_code == ERR_CODOMAIN
        assert result.rule.index == 0

    def test_symbol_arithmetic_is_an_error(self, kernel):
        prog, engine, narr = load_session(
            "sets s = {a,b};\nsets v = [0,3];\nactions tick;\n"
            "fluents x: -> s; n: -> v;\n"
            "rules n:=prev(x)+1 if tick;\ninitially x:=a, n:=0;",
            kernel=kernel,
        )
        result = engine.transition(narr.current, acts_of(prog, tick=True))
        assert result.kind == "eval_error"
        assert result.err_code == ERR_ARITH

    def test_undefined_head_value_does_not_fire(self, kernel):
        # loc(B):=carry(B) fires only for carried blocks: inertia keeps the rest
        prog, engine, initial = blocks_setup(kernel)
        result = engine.transition(initial, acts_of(prog, **{"carry(3)": "table"}))
        assert result.accepted
        assert pert_names(prog, result.state) == {"loc(3)"}

    def test_speculative_error_in_upper_closure_stays_undefined(self, kernel):
        # the erring rule fires only under the unfounded assumption
        prog, engine, narr = load_session(
            "sets v = [0,2];\nfluents h; f: -> v; g: -> v;\n"
            "rules h:=true if not pert(h); f:=g+1 if not pert(h);\n"
            "initially not h, f:=0, g:=2;",
            kernel=kernel,
        )
        result = engine.transition(narr.current, {})
        assert result.kind == "undefined"


class TestStateProperties:
    def random_blocks_state(self, prog, rng):
        vals = [rng.choice(prog.fluent_codomain[f]) for f in range(prog.n_fluents)]
        return State(prog, vals, frozenset(), {})

    def random_acts(self, prog, rng, p=0.35):
        return {
            aid: rng.choice(prog.action_codomain[aid])
            for aid in range(prog.n_actions)
            if rng.random() < p
        }

    def test_inertia_on_randomized_transitions(self, kernel):
        prog, engine, _ = blocks_setup(kernel)
        rng = random.Random(20210)
        accepted = 0
        for _ in range(1000):
            prev = self.random_blocks_state(prog, rng)
            result = engine.transition(prev, self.random_acts(prog, rng))
            if not result.accepted:
                continue
            accepted += 1
            nxt = result.state
            for f in range(prog.n_fluents):
                if f not in nxt.pert:
                    assert nxt.vals[f] == prev.vals[f]
            validate_state(nxt)
        assert accepted > 100

    def test_pertinence_minimality_without_rules(self, kernel):
        full = build_program(BLOCKS_DECLS)
        bare = build_program(BLOCKS_DECLS.split("rules")[0])
        engine = WellFoundedEngine(bare, kernel=kernel)
        rng = random.Random(7)
        for _ in range(200):
            prev = self.random_blocks_state(bare, rng)
            acts = self.random_acts(bare, rng)
            result = engine.transition(prev, acts)
            assert result.accepted
            assert result.state.pert == frozenset()
            assert result.state.vals == prev.vals
        assert full.n_rules > 0  # the rule-free variant really dropped them

    def test_foundedness_every_pertinent_fluent_has_a_true_rule(self, kernel):
        prog, engine, initial = blocks_setup(kernel)
        rng = random.Random(99)
        checked = 0
        for _ in range(300):
            prev = self.random_blocks_state(prog, rng)
            acts = self.random_acts(prog, rng)
            result = engine.transition(prev, acts)
            if not result.accepted:
                continue
            nxt = result.state
            for f in nxt.pert:
                assert any(
                    rule.head_fid == f
                    and all(
                        literal_holds(
                            lit, prog, lambda x: nxt.vals[x], prev.vals,
                            acts, nxt.pert,
                        )
                        for lit in rule.body
                    )
                    for rule in prog.rules
                )
                checked += 1
        assert checked > 50
