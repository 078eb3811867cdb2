"""Lexer, abstract syntax and recursive-descent parser for PAL source text.

A program is a stream of declaration sections (sets, actions, fluents,
vars, rules, options) and sentences (initially, do, query).  The parser
keeps the stream order intact because it fixes every enumeration and
output order later on.

Boolean shorthands are desugared here: a bare fluent head means
``f:=true``, ``not f`` means ``f:=false``, and a bare term in a
condition means ``term=true``.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import IncompleteInputError, PalSyntaxError

Value = Union[int, str]

KEYWORDS = frozenset(
    [
        "sets", "actions", "fluents", "vars", "rules", "options",
        "initially", "do", "query",
        "if", "and", "not", "pert", "prev",
        "true", "false", "concurrent", "solutions",
    ]
)

_TWO_CHAR_OPS = (":=", "->", "<>", "<=", ">=")
_ONE_CHAR_OPS = "+-*=<>"
_PUNCT = "(){}[],;:?"

SECTION_KEYWORDS = frozenset(["sets", "actions", "fluents", "vars", "rules", "options"])
SENTENCE_KEYWORDS = frozenset(["initially", "do", "query"])


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | name | var | int | op | punct | eof
    text: str
    line: int
    column: int


def tokenize(text):
    """Split source text into tokens; ``%`` starts a line comment."""
    tokens = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k=1):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c == "%":
            while i < n and text[i] != "\n":
                advance()
            continue
        if c.isspace():
            advance()
            continue
        start_line, start_col = line, col
        if ord(c) > 127:
            raise PalSyntaxError(f"non-ASCII character {c!r}", start_line, start_col)
        if c.isalpha():
            j = i
            while j < n and ord(text[j]) < 128 and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in KEYWORDS:
                kind = "keyword"
            elif word[0].isupper():
                kind = "var"
            else:
                kind = "name"
            tokens.append(Token(kind, word, start_line, start_col))
            advance(j - i)
            continue
        if c.isdigit():
            j = i
            while j < n and text[j] in "0123456789":
                j += 1
            tokens.append(Token("int", text[i:j], start_line, start_col))
            advance(j - i)
            continue
        if text.startswith("...", i):
            tokens.append(Token("op", "...", start_line, start_col))
            advance(3)
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("op", two, start_line, start_col))
            advance(2)
            continue
        if c in _ONE_CHAR_OPS:
            tokens.append(Token("op", c, start_line, start_col))
            advance()
            continue
        if c in _PUNCT:
            tokens.append(Token("punct", c, start_line, start_col))
            advance()
            continue
        raise PalSyntaxError(f"stray character {c!r}", start_line, start_col)
    return tokens


# --- abstract syntax ------------------------------------------------------

@dataclass(frozen=True)
class Pos:
    line: int = field(compare=False, default=0)
    column: int = field(compare=False, default=0)


_NOPOS = Pos(0, 0)


@dataclass(frozen=True)
class SetName:
    name: str
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class SetEnum:
    elements: tuple  # of Value
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class SetInterval:
    lo: int
    hi: int
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class SetBinOp:
    op: str  # + - *
    left: "SetExpr"
    right: "SetExpr"
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


SetExpr = Union[SetName, SetEnum, SetInterval, SetBinOp]


@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class Sym:
    name: str
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class VarRef:
    name: str
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class Term:
    """A symbol applied to argument expressions; () for zero-arity."""

    name: str
    args: tuple = ()
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class NameExpr:
    """A name in value position: fluent/action term or symbol constant.

    Which of the two it is can only be decided against the signature,
    so the parser keeps it unresolved.
    """

    term: Term
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class PrevExpr:
    term: Term
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class BinExpr:
    op: str  # + - *
    left: "Expr"
    right: "Expr"
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class NegExpr:
    operand: "Expr"
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


Expr = Union[Num, Sym, VarRef, NameExpr, PrevExpr, BinExpr, NegExpr]


@dataclass(frozen=True)
class PertAtom:
    term: Term
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class CmpAtom:
    lhs: Expr
    op: str  # = <> < <= > >=
    rhs: Expr
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


Atom = Union[PertAtom, CmpAtom]


@dataclass(frozen=True)
class Literal:
    neg: bool
    atom: Atom


@dataclass(frozen=True)
class SetDef:
    name: str
    expr: SetExpr
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class SymbolDeclAst:
    name: str
    arg_sets: tuple  # of SetExpr
    codomain: Optional[SetExpr]  # None means {true,false}
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class VarDecl:
    name: str
    set_expr: SetExpr
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class RuleAst:
    head: Optional[tuple]  # (Term, Expr) or None for a false head
    body: tuple  # of Literal
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class OptionSetting:
    name: str  # concurrent | solutions
    value: object
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class Assign:
    term: Term
    value: Expr
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class Initially:
    assigns: tuple  # of Assign
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class Do:
    steps: tuple  # of tuple of Assign (a step may be empty)
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class QueryItem:
    cond: Optional[tuple]  # tuple of Literal, or None for an empty item
    sep: object  # ";" | ("...", n) | None after the last item


@dataclass(frozen=True)
class QueryAst:
    items: tuple  # of QueryItem
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


SentenceAst = Union[Initially, Do, QueryAst]


@dataclass(frozen=True)
class Section:
    kind: str  # sets | actions | fluents | vars | rules | options
    entries: tuple
    pos: Pos = field(compare=False, repr=False, default=_NOPOS)


@dataclass(frozen=True)
class OptionsAst:
    concurrent: bool = True
    solutions: Optional[int] = None  # None means unlimited


class ProgramAst:
    """Parsed program: the ordered stream plus hoisted declaration views."""

    def __init__(self, stream):
        self.stream = tuple(stream)

    @property
    def set_defs(self):
        return [e for s in self._sections("sets") for e in s.entries]

    @property
    def action_decls(self):
        return [e for s in self._sections("actions") for e in s.entries]

    @property
    def fluent_decls(self):
        return [e for s in self._sections("fluents") for e in s.entries]

    @property
    def var_decls(self):
        return [e for s in self._sections("vars") for e in s.entries]

    @property
    def rule_schemas(self):
        return [e for s in self._sections("rules") for e in s.entries]

    @property
    def option_settings(self):
        return [e for s in self._sections("options") for e in s.entries]

    @property
    def options(self):
        merged = OptionsAst()
        for setting in self.option_settings:
            merged = apply_option(merged, setting)
        return merged

    @property
    def sentences(self):
        return [item for item in self.stream if not isinstance(item, Section)]

    def _sections(self, kind):
        return [s for s in self.stream if isinstance(s, Section) and s.kind == kind]

    def __eq__(self, other):
        return isinstance(other, ProgramAst) and self.stream == other.stream

    def __repr__(self):
        return f"ProgramAst({len(self.stream)} items)"


def apply_option(opts, setting):
    if setting.name == "concurrent":
        return OptionsAst(concurrent=setting.value, solutions=opts.solutions)
    return OptionsAst(concurrent=opts.concurrent, solutions=setting.value)


# --- parser ---------------------------------------------------------------

_EOF = Token("eof", "", 0, 0)


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, ahead=0):
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else _EOF

    def next(self):
        tok = self.peek()
        if tok.kind == "eof":
            self._eof_error()
        self.i += 1
        return tok

    def _eof_error(self):
        last = self.tokens[-1] if self.tokens else _EOF
        raise IncompleteInputError(
            "unexpected end of input", last.line, last.column + len(last.text)
        )

    def error(self, message, expected=None):
        tok = self.peek()
        if tok.kind == "eof":
            self._eof_error()
        raise PalSyntaxError(
            f"{message}, found {tok.text!r}", tok.line, tok.column, expected
        )

    def at(self, kind, text=None):
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind, text=None):
        if not self.at(kind, text):
            want = text if text is not None else kind
            self.error(f"expected {want!r}", expected={want})
        return self.next()

    def pos(self):
        tok = self.peek()
        return Pos(tok.line, tok.column)

    # sections and sentences

    def parse_program(self):
        stream = []
        while not self.at("eof"):
            stream.append(self.parse_item())
        return ProgramAst(stream)

    def parse_item(self):
        tok = self.peek()
        if tok.kind != "keyword":
            self.error("expected a section or sentence keyword")
        if tok.text in SECTION_KEYWORDS:
            return self.parse_section()
        if tok.text == "initially":
            return self.parse_initially()
        if tok.text == "do":
            return self.parse_do()
        if tok.text == "query":
            return self.parse_query()
        self.error("expected a section or sentence keyword")

    def parse_section(self):
        pos = self.pos()
        kw = self.next().text
        entries = []
        parse_entry = {
            "sets": self.parse_set_def,
            "actions": self.parse_symbol_decl,
            "fluents": self.parse_symbol_decl,
            "vars": self.parse_var_decl,
            "rules": self.parse_rule,
            "options": self.parse_option,
        }[kw]
        starts = {
            "sets": self._starts_name_entry,
            "actions": self._starts_name_entry,
            "fluents": self._starts_name_entry,
            "vars": self._starts_var_entry,
            "rules": self._starts_rule_entry,
            "options": self._starts_option_entry,
        }[kw]
        while starts():
            entry = parse_entry()
            if isinstance(entry, list):
                entries.extend(entry)
            else:
                entries.append(entry)
        return Section(kw, tuple(entries), pos)

    def _starts_name_entry(self):
        return self.at("name")

    def _starts_var_entry(self):
        return self.at("var")

    def _starts_rule_entry(self):
        return (
            self.at("name")
            or self.at("keyword", "false")
            or self.at("keyword", "not")
        )

    def _starts_option_entry(self):
        if self.at("keyword", "concurrent") or self.at("keyword", "solutions"):
            return True
        return self.at("keyword", "not") and self.peek(1).text == "concurrent"

    def parse_set_def(self):
        pos = self.pos()
        name = self.expect("name").text
        self.expect("op", "=")
        expr = self.parse_set_expr()
        self.expect("punct", ";")
        return SetDef(name, expr, pos)

    def parse_set_expr(self):
        left = self.parse_set_term()
        while self.at("op", "+") or self.at("op", "-") or self.at("op", "*"):
            op = self.next().text
            right = self.parse_set_term()
            left = SetBinOp(op, left, right)
        return left

    def parse_set_term(self):
        pos = self.pos()
        if self.at("name"):
            return SetName(self.next().text, pos)
        if self.at("punct", "("):
            self.next()
            expr = self.parse_set_expr()
            self.expect("punct", ")")
            return expr
        if self.at("punct", "{"):
            self.next()
            elements = [self.parse_set_element()]
            while self.at("punct", ","):
                self.next()
                elements.append(self.parse_set_element())
            self.expect("punct", "}")
            return SetEnum(tuple(elements), pos)
        if self.at("punct", "["):
            self.next()
            lo = self.parse_signed_int()
            self.expect("punct", ",")
            hi = self.parse_signed_int()
            self.expect("punct", "]")
            return SetInterval(lo, hi, pos)
        self.error("expected a set expression")

    def parse_set_element(self):
        if self.at("name"):
            return self.next().text
        if self.at("keyword", "true") or self.at("keyword", "false"):
            return self.next().text
        return self.parse_signed_int()

    def parse_signed_int(self):
        sign = 1
        if self.at("op", "-"):
            self.next()
            sign = -1
        tok = self.expect("int")
        return sign * int(tok.text)

    def parse_symbol_decl(self):
        pos = self.pos()
        name = self.expect("name").text
        arg_sets = ()
        codomain = None
        if self.at("punct", ":"):
            self.next()
            if not self.at("op", "->") and not self.at("punct", ";"):
                arg_sets = self.parse_domain()
            if self.at("op", "->"):
                self.next()
                codomain = self.parse_set_expr()
        self.expect("punct", ";")
        return SymbolDeclAst(name, arg_sets, codomain, pos)

    def parse_domain(self):
        # `x` separates factors here and only here; elsewhere it is a name.
        factors = [self.parse_set_expr()]
        while self.at("name", "x"):
            self.next()
            factors.append(self.parse_set_expr())
        return tuple(factors)

    def parse_var_decl(self):
        pos = self.pos()
        names = [self.expect("var").text]
        while self.at("punct", ","):
            self.next()
            names.append(self.expect("var").text)
        self.expect("punct", ":")
        expr = self.parse_set_expr()
        self.expect("punct", ";")
        return [VarDecl(n, expr, pos) for n in names]

    def parse_rule(self):
        pos = self.pos()
        head = self.parse_rule_head()
        body = ()
        if self.at("keyword", "if"):
            self.next()
            body = self.parse_condition()
        self.expect("punct", ";")
        return RuleAst(head, body, pos)

    def parse_rule_head(self):
        if self.at("keyword", "false"):
            self.next()
            return None
        if self.at("keyword", "not"):
            pos = self.pos()
            self.next()
            term = self.parse_term()
            return (term, Sym("false", pos))
        term = self.parse_term()
        if self.at("op", ":="):
            self.next()
            value = self.parse_vexpr()
            return (term, value)
        return (term, Sym("true", Pos(term.pos.line, term.pos.column)))

    def parse_condition(self):
        literals = [self.parse_literal()]
        while self.at("keyword", "and"):
            self.next()
            literals.append(self.parse_literal())
        return tuple(literals)

    def parse_literal(self):
        neg = False
        if self.at("keyword", "not"):
            self.next()
            neg = True
        return Literal(neg, self.parse_atom())

    def parse_atom(self):
        pos = self.pos()
        if self.at("keyword", "pert"):
            self.next()
            self.expect("punct", "(")
            term = self.parse_term()
            self.expect("punct", ")")
            return PertAtom(term, pos)
        lhs = self.parse_vexpr()
        for op in ("=", "<>", "<=", ">=", "<", ">"):
            if self.at("op", op):
                self.next()
                rhs = self.parse_vexpr()
                return CmpAtom(lhs, op, rhs, pos)
        if isinstance(lhs, (NameExpr, PrevExpr, Sym)):
            # boolean shorthand: `f` stands for `f=true`; a bare `true`
            # or `false` becomes a constant condition the same way
            return CmpAtom(lhs, "=", Sym("true", pos), pos)
        self.error("expected a comparison or boolean term")

    def parse_term(self):
        pos = self.pos()
        name = self.expect("name").text
        args = ()
        if self.at("punct", "("):
            self.next()
            arg_list = [self.parse_argexpr()]
            while self.at("punct", ","):
                self.next()
                arg_list.append(self.parse_argexpr())
            self.expect("punct", ")")
            args = tuple(arg_list)
        return Term(name, args, pos)

    # argument expressions: integers, variables and symbol constants only

    def parse_argexpr(self):
        return self._parse_addsub(self._parse_arg_atom)

    def _parse_addsub(self, atom_parser):
        left = self._parse_mul(atom_parser)
        while self.at("op", "+") or self.at("op", "-"):
            op = self.next().text
            right = self._parse_mul(atom_parser)
            left = BinExpr(op, left, right)
        return left

    def _parse_mul(self, atom_parser):
        left = self._parse_unary(atom_parser)
        while self.at("op", "*"):
            self.next()
            right = self._parse_unary(atom_parser)
            left = BinExpr("*", left, right)
        return left

    def _parse_unary(self, atom_parser):
        if self.at("op", "-"):
            pos = self.pos()
            self.next()
            return NegExpr(self._parse_unary(atom_parser), pos)
        return atom_parser()

    def _parse_arg_atom(self):
        pos = self.pos()
        if self.at("int"):
            return Num(int(self.next().text), pos)
        if self.at("var"):
            return VarRef(self.next().text, pos)
        if self.at("name"):
            return Sym(self.next().text, pos)
        if self.at("keyword", "true") or self.at("keyword", "false"):
            return Sym(self.next().text, pos)
        if self.at("punct", "("):
            self.next()
            expr = self.parse_argexpr()
            self.expect("punct", ")")
            return expr
        self.error("expected an argument expression")

    # value expressions: arguments plus fluent/action terms and prev(...)

    def parse_vexpr(self):
        return self._parse_addsub(self._parse_value_atom)

    def _parse_value_atom(self):
        pos = self.pos()
        if self.at("int"):
            return Num(int(self.next().text), pos)
        if self.at("var"):
            return VarRef(self.next().text, pos)
        if self.at("keyword", "true") or self.at("keyword", "false"):
            return Sym(self.next().text, pos)
        if self.at("keyword", "prev"):
            self.next()
            self.expect("punct", "(")
            term = self.parse_term()
            self.expect("punct", ")")
            return PrevExpr(term, pos)
        if self.at("name"):
            return NameExpr(self.parse_term(), pos)
        if self.at("punct", "("):
            self.next()
            expr = self.parse_vexpr()
            self.expect("punct", ")")
            return expr
        self.error("expected a value expression")

    def parse_option(self):
        pos = self.pos()
        if self.at("keyword", "not"):
            self.next()
            self.expect("keyword", "concurrent")
            self.expect("punct", ";")
            return OptionSetting("concurrent", False, pos)
        if self.at("keyword", "concurrent"):
            self.next()
            self.expect("punct", ";")
            return OptionSetting("concurrent", True, pos)
        self.expect("keyword", "solutions")
        self.expect("op", "=")
        value = int(self.expect("int").text)
        self.expect("punct", ";")
        return OptionSetting("solutions", value, pos)

    # sentences

    def parse_initially(self):
        pos = self.pos()
        self.expect("keyword", "initially")
        assigns = [self.parse_assign()]
        while self.at("punct", ","):
            self.next()
            assigns.append(self.parse_assign())
        self.expect("punct", ";")
        return Initially(tuple(assigns), pos)

    def parse_assign(self):
        pos = self.pos()
        if self.at("keyword", "not"):
            self.next()
            term = self.parse_term()
            return Assign(term, Sym("false"), pos)
        term = self.parse_term()
        if self.at("op", ":="):
            self.next()
            value = self.parse_vexpr()
            return Assign(term, value, pos)
        return Assign(term, Sym("true"), pos)

    def parse_do(self):
        pos = self.pos()
        self.expect("keyword", "do")
        self.expect("punct", "{")
        steps = []
        while not self.at("punct", "}"):
            if self.at("punct", ";"):
                steps.append(())
                self.next()
                continue
            assigns = [self.parse_assign()]
            while self.at("punct", ","):
                self.next()
                assigns.append(self.parse_assign())
            steps.append(tuple(assigns))
            if self.at("punct", ";"):
                self.next()
            else:
                break
        self.expect("punct", "}")
        return Do(tuple(steps), pos)

    def parse_query(self):
        pos = self.pos()
        self.expect("keyword", "query")
        items = []
        while True:
            cond = None
            if not (self.at("punct", ";") or self.at("op", "...") or self.at("punct", "?")):
                cond = self.parse_condition()
            if self.at("punct", ";"):
                self.next()
                items.append(QueryItem(cond, ";"))
                continue
            if self.at("op", "..."):
                self.next()
                self.expect("punct", "{")
                count = int(self.expect("int").text)
                self.expect("punct", "}")
                items.append(QueryItem(cond, ("...", count)))
                continue
            items.append(QueryItem(cond, None))
            break
        self.expect("punct", "?")
        return QueryAst(tuple(items), pos)


def parse_program(text):
    """Parse a whole program; the first error aborts the parse."""
    return _Parser(text).parse_program()


def parse_sentence(text):
    """Parse exactly one sentence or declaration section.

    Raises IncompleteInputError when the text stops mid-construct, so a
    read loop can ask for more input.
    """
    parser = _Parser(text)
    if parser.at("eof"):
        return None
    item = parser.parse_item()
    if not parser.at("eof"):
        parser.error("trailing input after sentence")
    return item


def parse_stream(text):
    """Parse every complete item at the start of the text.

    Returns (items, leftover): leftover is the tail belonging to a
    trailing unfinished item, empty when everything parsed.  A genuine
    syntax error still raises.
    """
    parser = _Parser(text)
    items = []
    while not parser.at("eof"):
        mark = parser.i
        try:
            items.append(parser.parse_item())
        except IncompleteInputError:
            tok = parser.tokens[mark]
            return items, text[_text_offset(text, tok.line, tok.column):]
    return items, ""


def _text_offset(text, line, column):
    lines = text.split("\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + column - 1


# --- pretty printer -------------------------------------------------------

def expr_to_source(expr, parent_prec=0):
    if isinstance(expr, Num):
        return str(expr.value)
    if isinstance(expr, Sym):
        return expr.name
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, NameExpr):
        return term_to_source(expr.term)
    if isinstance(expr, PrevExpr):
        return f"prev({term_to_source(expr.term)})"
    if isinstance(expr, NegExpr):
        return f"-{expr_to_source(expr.operand, 3)}"
    if isinstance(expr, BinExpr):
        prec = 2 if expr.op == "*" else 1
        text = (
            f"{expr_to_source(expr.left, prec)}{expr.op}"
            f"{expr_to_source(expr.right, prec + 1)}"
        )
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression: {expr!r}")


def term_to_source(term):
    if not term.args:
        return term.name
    args = ",".join(expr_to_source(a) for a in term.args)
    return f"{term.name}({args})"


def set_expr_to_source(expr):
    if isinstance(expr, SetName):
        return expr.name
    if isinstance(expr, SetEnum):
        return "{" + ",".join(str(e) for e in expr.elements) + "}"
    if isinstance(expr, SetInterval):
        return f"[{expr.lo},{expr.hi}]"
    if isinstance(expr, SetBinOp):
        left = set_expr_to_source(expr.left)
        right = set_expr_to_source(expr.right)
        if isinstance(expr.right, SetBinOp):
            right = f"({right})"
        return f"{left}{expr.op}{right}"
    raise TypeError(f"not a set expression: {expr!r}")


def atom_to_source(atom):
    if isinstance(atom, PertAtom):
        return f"pert({term_to_source(atom.term)})"
    return f"{expr_to_source(atom.lhs)}{atom.op}{expr_to_source(atom.rhs)}"


def literal_to_source(lit):
    text = atom_to_source(lit.atom)
    return f"not {text}" if lit.neg else text


def condition_to_source(literals):
    return " and ".join(literal_to_source(l) for l in literals)


def rule_to_source(rule):
    if rule.head is None:
        head = "false"
    else:
        term, value = rule.head
        head = f"{term_to_source(term)}:={expr_to_source(value)}"
    body = f" if {condition_to_source(rule.body)}" if rule.body else ""
    return f"{head}{body};"


def assign_to_source(assign):
    return f"{term_to_source(assign.term)}:={expr_to_source(assign.value)}"


def sentence_to_source(sentence):
    if isinstance(sentence, Initially):
        assigns = ",".join(assign_to_source(a) for a in sentence.assigns)
        return f"initially {assigns};"
    if isinstance(sentence, Do):
        steps = ";".join(
            ",".join(assign_to_source(a) for a in step) for step in sentence.steps
        )
        if sentence.steps and not sentence.steps[-1]:
            steps += ";"  # keep a trailing empty step visible
        return "do {" + steps + "}"
    if isinstance(sentence, QueryAst):
        parts = []
        for item in sentence.items:
            if item.cond is not None:
                parts.append(condition_to_source(item.cond))
            if item.sep == ";":
                parts.append(";")
            elif isinstance(item.sep, tuple):
                parts.append(" ...{%d} " % item.sep[1])
        return "query " + "".join(parts) + "?"
    raise TypeError(f"not a sentence: {sentence!r}")


def section_to_source(section):
    lines = [section.kind]
    for entry in section.entries:
        if isinstance(entry, SetDef):
            lines.append(f"  {entry.name} = {set_expr_to_source(entry.expr)};")
        elif isinstance(entry, SymbolDeclAst):
            text = entry.name
            if entry.arg_sets or entry.codomain is not None:
                text += ": " + " x ".join(set_expr_to_source(s) for s in entry.arg_sets)
                if entry.codomain is not None:
                    arrow = " -> " if entry.arg_sets else "-> "
                    text += f"{arrow}{set_expr_to_source(entry.codomain)}"
            lines.append(f"  {text};")
        elif isinstance(entry, VarDecl):
            lines.append(f"  {entry.name}: {set_expr_to_source(entry.set_expr)};")
        elif isinstance(entry, RuleAst):
            lines.append(f"  {rule_to_source(entry)}")
        elif isinstance(entry, OptionSetting):
            if entry.name == "concurrent":
                lines.append("  concurrent;" if entry.value else "  not concurrent;")
            else:
                lines.append(f"  solutions={entry.value};")
        else:
            raise TypeError(f"not a section entry: {entry!r}")
    return "\n".join(lines)


def program_to_source(program):
    """Render a ProgramAst back to parseable source text."""
    parts = []
    for item in program.stream:
        if isinstance(item, Section):
            parts.append(section_to_source(item))
        else:
            parts.append(sentence_to_source(item))
    return "\n".join(parts) + "\n"
