import pytest

from pal import syntax
from pal.errors import IncompleteInputError, PalSyntaxError
from pal.syntax import (
    Do, Initially, QueryAst, parse_program, parse_sentence, program_to_source,
    tokenize,
)

from helpers import BLOCKS_DECLS, example_text


class TestTokenize:
    def test_rule_head_tokens(self):
        tokens = tokenize("loc(B):=carry(B);")
        assert [t.text for t in tokens] == [
            "loc", "(", "B", ")", ":=", "carry", "(", "B", ")", ";",
        ]
        assert [t.kind for t in tokens] == [
            "name", "punct", "var", "punct", "op",
            "name", "punct", "var", "punct", "punct",
        ]

    def test_empty_input(self):
        assert tokenize("") == []

    def test_ellipsis_is_one_token(self):
        assert [t.text for t in tokenize("...{3}")] == ["...", "{", "3", "}"]

    def test_compound_operators(self):
        assert [t.text for t in tokenize(":= -> <> <= >=")] == [
            ":=", "->", "<>", "<=", ">=",
        ]

    def test_comment_runs_to_end_of_line(self):
        tokens = tokenize("a % nothing here ; do {\nb")
        assert [t.text for t in tokens] == ["a", "b"]

    def test_non_ascii_outside_comment_is_an_error(self):
        with pytest.raises(PalSyntaxError):
            tokenize("fé;")
        tokenize("% café is fine in a comment\n")

    def test_stray_character_has_position(self):
        with pytest.raises(PalSyntaxError) as exc:
            tokenize("a = b;\n  @")
        assert exc.value.line == 2 and exc.value.column == 3

    def test_positions_are_monotone(self):
        tokens = tokenize(example_text("blocks"))
        positions = [(t.line, t.column) for t in tokens]
        assert positions == sorted(positions)

    def test_keywords_vs_names(self):
        kinds = {t.text: t.kind for t in tokenize("sets table pert Xs x")}
        assert kinds == {
            "sets": "keyword", "table": "name", "pert": "keyword",
            "Xs": "var", "x": "name",
        }


class TestParseProgram:
    def test_blocks_section_counts(self):
        ast = parse_program(example_text("blocks"))
        assert len(ast.set_defs) == 2
        assert len(ast.action_decls) == 1
        assert len(ast.fluent_decls) == 2
        assert len(ast.var_decls) == 2
        assert len(ast.rule_schemas) == 5

    def test_bare_fluent_declaration(self):
        ast = parse_program("fluents markdone;")
        (decl,) = ast.fluent_decls
        assert decl.name == "markdone"
        assert decl.arg_sets == ()
        assert decl.codomain is None

    def test_codomain_only_declaration(self):
        ast = parse_program("actions mark: -> block;")
        (decl,) = ast.action_decls
        assert decl.arg_sets == ()
        assert decl.codomain is not None

    def test_degenerate_interval_parses(self):
        ast = parse_program("sets s = [4,1];")
        assert len(ast.set_defs) == 1

    def test_x_as_identifier_and_operator(self):
        ast = parse_program("sets x = [1,2];\nfluents f: x x x;")
        (decl,) = ast.fluent_decls
        assert len(decl.arg_sets) == 2

    def test_sections_may_repeat_and_interleave(self):
        ast = parse_program(
            "fluents f;\ninitially f;\nfluents g;\ndo {;}\n"
        )
        assert len(ast.fluent_decls) == 2
        assert len(ast.sentences) == 2

    def test_options_override_order(self):
        ast = parse_program("options concurrent; solutions=5;\noptions not concurrent;")
        assert ast.options.concurrent is False
        assert ast.options.solutions == 5

    def test_first_error_aborts(self):
        with pytest.raises(PalSyntaxError) as exc:
            parse_program("sets a = ;\nsets b = [1,2];")
        assert exc.value.line == 1

    def test_head_shorthand_desugaring_is_local(self):
        sugar = parse_program(
            BLOCKS_DECLS.replace(
                "free(B) if pert(carry(C)) and prev(loc(C))=B;",
                "free(B):=true if pert(carry(C)) and prev(loc(C))=B;",
            ).replace(
                "not free(C) if carry(B)=C;",
                "free(C):=false if carry(B)=C;",
            )
        )
        assert sugar.rule_schemas == parse_program(BLOCKS_DECLS).rule_schemas


class TestParseSentence:
    def test_do_single_step(self):
        item = parse_sentence("do {carry(1):=2;}")
        assert isinstance(item, Do)
        assert len(item.steps) == 1
        assert len(item.steps[0]) == 1

    def test_query_single_condition(self):
        item = parse_sentence("query free(2) and loc(2)=table?")
        assert isinstance(item, QueryAst)
        assert len(item.items) == 1
        assert len(item.items[0].cond) == 2

    def test_unterminated_block_reports_incomplete(self):
        with pytest.raises(IncompleteInputError):
            parse_sentence("do {")
        with pytest.raises(IncompleteInputError):
            parse_sentence("initially f(1):=2,")
        with pytest.raises(IncompleteInputError):
            parse_sentence("query not free(3)")

    def test_trailing_junk_is_an_error(self):
        with pytest.raises(PalSyntaxError):
            parse_sentence("do {;} do {;}")

    def test_trailing_semicolon_adds_no_step(self):
        assert parse_sentence("do {carry(1):=2;}").steps == parse_sentence(
            "do {carry(1):=2}"
        ).steps

    def test_isolated_semicolon_is_an_empty_step(self):
        steps = parse_sentence("do { carry(1):=2,carry(3):=4; carry(1):=3; ; }").steps
        assert len(steps) == 3
        assert steps[2] == ()
        assert parse_sentence("do {;}").steps == ((),)
        assert parse_sentence("do {}").steps == ()

    def test_initially_sentence(self):
        item = parse_sentence("initially loc(B):=table,free(B);")
        assert isinstance(item, Initially)
        assert len(item.assigns) == 2

    def test_query_separators(self):
        q = parse_sentence("query ; ; ; not free(3)?")
        assert [it.sep for it in q.items] == [";", ";", ";", None]
        assert [it.cond is None for it in q.items] == [True, True, True, False]

    def test_query_ellipsis(self):
        q = parse_sentence("query ...{3} not free(3)?")
        assert q.items[0].sep == ("...", 3)
        assert q.items[0].cond is None

    def test_section_fragment(self):
        item = parse_sentence("options solutions=1;")
        assert isinstance(item, syntax.Section)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "name", ["blocks", "yale", "suitcase", "counter", "missionaries"]
    )
    def test_corpus_round_trips(self, name):
        ast = parse_program(example_text(name))
        again = parse_program(program_to_source(ast))
        assert again == ast

    def test_round_trip_idempotent(self):
        ast = parse_program(example_text("blocks"))
        once = program_to_source(ast)
        assert program_to_source(parse_program(once)) == once

    def test_arithmetic_round_trip(self):
        text = "vars N: s;\nrules f(N):=g(N-1)+2*N if prev(h(N))<>N*-1-2;"
        ast = parse_program("sets s = [1,3];\nfluents f: s; g: s; h: s;\n" + text)
        assert parse_program(program_to_source(ast)) == ast

    def test_generated_programs_round_trip(self):
        import random

        from test_engine_oracle import generate_program

        for seed in range(60):
            text, _, _ = generate_program(random.Random(3000 + seed))
            ast = parse_program(text)
            assert parse_program(program_to_source(ast)) == ast
