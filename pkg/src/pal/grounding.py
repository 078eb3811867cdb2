"""Sorts, signature and rule grounding.

Rule schemata are instantiated over their variables' finite sorts into
ground rules over two kinds of atoms: a fluent/action holding a value,
and a fluent/action being pertinent.  Ground rules are kept in two
forms: small tuple trees (inspectable, used by the debug dump and the
test oracles) and a flat numeric program shared by both transition
kernels.

Values are encoded into integers so the kernels never touch Python
strings: an integer value v becomes ``v*2`` and the i-th interned
symbol becomes ``i*2+1``.  The odd negatives ``UNDEF`` and ``ERR`` are
reserved markers that can never collide with a real value.
"""

import itertools
from dataclasses import dataclass

from . import syntax
from .errors import PalSemanticError
from .syntax import (
    BinExpr, CmpAtom, NameExpr, NegExpr, Num, PertAtom, PrevExpr, SetBinOp,
    SetEnum, SetInterval, SetName, Sym, Term, VarRef,
)

UNDEF = -1
ERR = -3

BOOL_ELEMENTS = ("true", "false")

# literal kinds in ground bodies
PERT_ACT, NPERT_ACT, PERT_FLU, NPERT_FLU, CMP = range(5)

# expression opcodes (postfix)
OP_CONST, OP_PREV, OP_ACT, OP_FLU, OP_ADD, OP_SUB, OP_MUL, OP_NEG = range(8)

CMP_OPS = {"=": 0, "<>": 1, "<": 2, "<=": 3, ">": 4, ">=": 5}


@dataclass(frozen=True)
class Sort:
    name: str
    elements: tuple  # duplicate-free, definition order


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    kind: str  # "action" | "fluent"
    arg_sorts: tuple  # of Sort
    codomain: Sort


def eval_set_expr(expr, sorts):
    """Evaluate a set expression to an ordered, duplicate-free value tuple."""
    if isinstance(expr, SetName):
        if expr.name not in sorts:
            raise PalSemanticError(
                f"undefined sort {expr.name!r}", expr.pos.line, expr.pos.column
            )
        return sorts[expr.name].elements
    if isinstance(expr, SetEnum):
        return _dedupe(expr.elements)
    if isinstance(expr, SetInterval):
        return tuple(range(expr.lo, expr.hi + 1))
    if isinstance(expr, SetBinOp):
        left = eval_set_expr(expr.left, sorts)
        right = eval_set_expr(expr.right, sorts)
        if expr.op == "+":
            return left + tuple(v for v in _dedupe(right) if v not in set(left))
        if expr.op == "-":
            drop = set(right)
            return tuple(v for v in left if v not in drop)
        keep = set(right)
        return tuple(v for v in left if v in keep)
    raise TypeError(f"not a set expression: {expr!r}")


def _dedupe(values):
    seen = set()
    out = []
    for v in values:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return tuple(out)


class Signature:
    """Declared sorts, actions, fluents and variables."""

    def __init__(self):
        self.sorts = {}
        self.symbols = []  # declaration order, actions and fluents mixed
        self.by_name = {}
        self.vars = {}  # name -> Sort, declaration order
        self.bool_sort = Sort("{true,false}", BOOL_ELEMENTS)

    def fluents(self):
        return [s for s in self.symbols if s.kind == "fluent"]

    def actions(self):
        return [s for s in self.symbols if s.kind == "action"]

    def define_sort(self, name, expr):
        elements = eval_set_expr(expr, self.sorts)
        self.sorts[name] = Sort(name, elements)

    def declare_symbol(self, decl, kind):
        if decl.name in self.by_name:
            raise PalSemanticError(
                f"duplicate symbol {decl.name!r}", decl.pos.line, decl.pos.column
            )
        arg_sorts = tuple(
            self._used_sort(s, decl, "domain") for s in decl.arg_sets
        )
        if decl.codomain is None:
            codomain = self.bool_sort
        else:
            codomain = self._used_sort(decl.codomain, decl, "codomain")
        sym = SymbolDecl(decl.name, kind, arg_sorts, codomain)
        self.symbols.append(sym)
        self.by_name[decl.name] = sym

    def _used_sort(self, expr, decl, where):
        elements = eval_set_expr(expr, self.sorts)
        if not elements:
            raise PalSemanticError(
                f"empty sort used as {where} of {decl.name!r}",
                decl.pos.line,
                decl.pos.column,
            )
        return Sort(syntax.set_expr_to_source(expr), elements)

    def declare_var(self, decl):
        elements = eval_set_expr(decl.set_expr, self.sorts)
        sort = Sort(syntax.set_expr_to_source(decl.set_expr), elements)
        if decl.name in self.vars and self.vars[decl.name].elements != elements:
            raise PalSemanticError(
                f"variable {decl.name!r} redeclared with a different sort",
                decl.pos.line,
                decl.pos.column,
            )
        self.vars[decl.name] = sort


def build_signature(program):
    """Resolve all declarations of a parsed program into a Signature."""
    sig = Signature()
    for item in program.stream:
        if not isinstance(item, syntax.Section):
            continue
        if item.kind == "sets":
            for entry in item.entries:
                sig.define_sort(entry.name, entry.expr)
        elif item.kind == "actions":
            for entry in item.entries:
                sig.declare_symbol(entry, "action")
        elif item.kind == "fluents":
            for entry in item.entries:
                sig.declare_symbol(entry, "fluent")
        elif item.kind == "vars":
            for entry in item.entries:
                sig.declare_var(entry)
    return sig


class _DropInstance(Exception):
    """An instantiated argument fell outside its sort: skip the instance."""


class GroundRule:
    """One instantiated rule: head fluent + value expression, body literals.

    The head is ``-1`` for constraint rules.  Body literals are tuples:
    ``(PERT_ACT, aid)``, ``(NPERT_ACT, aid)``, ``(PERT_FLU, fid)``,
    ``(NPERT_FLU, fid)`` or ``(CMP, neg, op, lhs, rhs)`` with ground
    expression trees for both sides.
    """

    __slots__ = ("index", "head_fid", "head_expr", "body", "schema_index")

    def __init__(self, index, head_fid, head_expr, body, schema_index):
        self.index = index
        self.head_fid = head_fid
        self.head_expr = head_expr
        self.body = body
        self.schema_index = schema_index


class Program:
    """A ground program: signature, term tables and compiled rules."""

    def __init__(self, signature, schemas):
        self.signature = signature
        self.schemas = list(schemas)

        self.symbol_names = []
        self.symbol_ids = {}
        self.intern("true")
        self.intern("false")
        for sort in signature.sorts.values():
            for v in sort.elements:
                if isinstance(v, str):
                    self.intern(v)
        for sym in signature.symbols:
            for v in sym.codomain.elements:
                if isinstance(v, str):
                    self.intern(v)
            for s in sym.arg_sorts:
                for v in s.elements:
                    if isinstance(v, str):
                        self.intern(v)

        self.fluent_terms = []  # fid -> (name, args)
        self.fluent_symbol = []  # fid -> SymbolDecl
        self.fluent_index = {}
        self.action_terms = []
        self.action_symbol = []
        self.action_index = {}
        for sym in signature.symbols:
            domains = [s.elements for s in sym.arg_sorts]
            for args in itertools.product(*domains):
                if sym.kind == "fluent":
                    self.fluent_index[(sym.name, args)] = len(self.fluent_terms)
                    self.fluent_terms.append((sym.name, args))
                    self.fluent_symbol.append(sym)
                else:
                    self.action_index[(sym.name, args)] = len(self.action_terms)
                    self.action_terms.append((sym.name, args))
                    self.action_symbol.append(sym)

        self.n_fluents = len(self.fluent_terms)
        self.n_actions = len(self.action_terms)
        self.fluent_codomain = [
            tuple(self.encode(v) for v in sym.codomain.elements)
            for sym in self.fluent_symbol
        ]
        self.fluent_codomain_set = [frozenset(c) for c in self.fluent_codomain]
        self.action_codomain = [
            tuple(self.encode(v) for v in sym.codomain.elements)
            for sym in self.action_symbol
        ]
        self.action_codomain_set = [frozenset(c) for c in self.action_codomain]

        self.rules = ground_rules(self.schemas, signature, self)
        self._compile_rules()

    # value interning

    def intern(self, name):
        sid = self.symbol_ids.get(name)
        if sid is None:
            sid = len(self.symbol_names)
            self.symbol_ids[name] = sid
            self.symbol_names.append(name)
        return sid

    def encode(self, value):
        if isinstance(value, int):
            return value * 2
        return self.intern(value) * 2 + 1

    def decode(self, enc):
        if enc & 1:
            return self.symbol_names[enc >> 1]
        return enc >> 1

    def decode_str(self, enc):
        v = self.decode(enc)
        return v if isinstance(v, str) else str(v)

    # term helpers

    def fluent_str(self, fid):
        name, args = self.fluent_terms[fid]
        return _term_str(name, args)

    def action_str(self, aid):
        name, args = self.action_terms[aid]
        return _term_str(name, args)

    # compiled form shared by the kernels

    def _compile_rules(self):
        self.expr_code = []  # flat list of (op, arg) pairs, flattened
        self.expr_span = []  # expr id -> (offset, length) in instruction units
        self.rule_head_fid = []
        self.rule_head_expr = []
        self.rule_lit_kind = []
        self.rule_lit_a = []
        self.rule_lit_b = []
        self.rule_lit_c = []
        self.rule_lit_static = []  # comparison depends on no current fluent value
        self.rule_lit_off = []
        self.rule_lit_cnt = []

        flu_deps = [set() for _ in range(self.n_fluents)]
        self.rule_head_has_flu = []
        self.has_flu_deps = False

        for rule in self.rules:
            deps = set()
            self.rule_head_fid.append(rule.head_fid)
            if rule.head_expr is None:
                self.rule_head_expr.append(-1)
                head_flu = False
            else:
                head_deps = set()
                eid = self._compile_expr(rule.head_expr, head_deps)
                self.rule_head_expr.append(eid)
                head_flu = bool(head_deps)
                deps |= head_deps
            self.rule_head_has_flu.append(head_flu)

            self.rule_lit_off.append(len(self.rule_lit_kind))
            for lit in rule.body:
                kind = lit[0]
                if kind == CMP:
                    _, neg, op, lhs, rhs = lit
                    lit_deps = set()
                    l_id = self._compile_expr(lhs, lit_deps)
                    r_id = self._compile_expr(rhs, lit_deps)
                    self.rule_lit_kind.append(CMP)
                    self.rule_lit_a.append(CMP_OPS[op] * 2 + (1 if neg else 0))
                    self.rule_lit_b.append(l_id)
                    self.rule_lit_c.append(r_id)
                    self.rule_lit_static.append(not lit_deps)
                    deps |= lit_deps
                else:
                    self.rule_lit_kind.append(kind)
                    self.rule_lit_a.append(lit[1])
                    self.rule_lit_b.append(-1)
                    self.rule_lit_c.append(-1)
                    self.rule_lit_static.append(True)
                    if kind == PERT_FLU:
                        deps.add(lit[1])
                    if kind in (NPERT_FLU, PERT_FLU):
                        self.has_flu_deps = True
            self.rule_lit_cnt.append(len(self.rule_lit_kind) - self.rule_lit_off[-1])

            for fid in deps:
                flu_deps[fid].add(rule.index)
            if deps:
                self.has_flu_deps = True

        self.flu_dep_rules = [tuple(sorted(r)) for r in flu_deps]
        self.n_rules = len(self.rules)

    def _compile_expr(self, gexpr, deps):
        code = []
        self._emit(gexpr, code, deps)
        eid = len(self.expr_span)
        off = len(self.expr_code)
        self.expr_code.extend(code)
        self.expr_span.append((off, len(code)))
        return eid

    def _emit(self, gexpr, code, deps):
        tag = gexpr[0]
        if tag == "const":
            code.append((OP_CONST, self.encode(gexpr[1])))
        elif tag == "prev":
            code.append((OP_PREV, gexpr[1]))
        elif tag == "act":
            code.append((OP_ACT, gexpr[1]))
        elif tag == "flu":
            deps.add(gexpr[1])
            code.append((OP_FLU, gexpr[1]))
        elif tag == "neg":
            self._emit(gexpr[1], code, deps)
            code.append((OP_NEG, 0))
        else:
            self._emit(gexpr[1], code, deps)
            self._emit(gexpr[2], code, deps)
            op = {"add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL}[tag]
            code.append((op, 0))

    # debug dump

    def rule_str(self, rule):
        if rule.head_fid < 0:
            head = "false"
        else:
            head = f"holds({self.fluent_str(rule.head_fid)},{self.gexpr_str(rule.head_expr)})"
        if not rule.body:
            return head + "."
        return head + " :- " + ", ".join(self.lit_str(l) for l in rule.body) + "."

    def lit_str(self, lit):
        kind = lit[0]
        if kind == PERT_ACT:
            return f"pert({self.action_str(lit[1])})"
        if kind == NPERT_ACT:
            return f"not pert({self.action_str(lit[1])})"
        if kind == PERT_FLU:
            return f"pert({self.fluent_str(lit[1])})"
        if kind == NPERT_FLU:
            return f"not pert({self.fluent_str(lit[1])})"
        _, neg, op, lhs, rhs = lit
        text = f"{self.gexpr_str(lhs)}{op}{self.gexpr_str(rhs)}"
        return f"not ({text})" if neg else text

    def gexpr_str(self, gexpr, parent_prec=0):
        tag = gexpr[0]
        if tag == "const":
            v = gexpr[1]
            return v if isinstance(v, str) else str(v)
        if tag == "prev":
            return f"prev({self.fluent_str(gexpr[1])})"
        if tag == "act":
            return self.action_str(gexpr[1])
        if tag == "flu":
            return self.fluent_str(gexpr[1])
        if tag == "neg":
            return f"-{self.gexpr_str(gexpr[1], 3)}"
        sym = {"add": "+", "sub": "-", "mul": "*"}[tag]
        prec = 2 if tag == "mul" else 1
        text = (
            f"{self.gexpr_str(gexpr[1], prec)}{sym}"
            f"{self.gexpr_str(gexpr[2], prec + 1)}"
        )
        return f"({text})" if prec < parent_prec else text

    def dump(self):
        return [self.rule_str(r) for r in self.rules]


def _term_str(name, args):
    if not args:
        return name
    return f"{name}({','.join(v if isinstance(v, str) else str(v) for v in args)})"


# --- schema instantiation ---------------------------------------------------

def eval_arg_expr(expr, binding):
    """Evaluate an argument expression under a variable binding.

    Arithmetic demands integer operands; symbol operands are a
    grounding-time type error.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Sym):
        return expr.name
    if isinstance(expr, VarRef):
        if expr.name not in binding:
            raise PalSemanticError(
                f"undeclared variable {expr.name!r}", expr.pos.line, expr.pos.column
            )
        return binding[expr.name]
    if isinstance(expr, NegExpr):
        v = eval_arg_expr(expr.operand, binding)
        if not isinstance(v, int):
            raise PalSemanticError(
                f"symbol constant {v!r} in arithmetic", expr.pos.line, expr.pos.column
            )
        return -v
    if isinstance(expr, BinExpr):
        left = eval_arg_expr(expr.left, binding)
        right = eval_arg_expr(expr.right, binding)
        if not isinstance(left, int) or not isinstance(right, int):
            bad = left if not isinstance(left, int) else right
            raise PalSemanticError(
                f"symbol constant {bad!r} in arithmetic", expr.pos.line, expr.pos.column
            )
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        return left * right
    raise PalSemanticError(
        "term not allowed in an argument expression",
        getattr(expr, "pos", syntax.Pos()).line,
        getattr(expr, "pos", syntax.Pos()).column,
    )


class Grounder:
    """Instantiates rule schemata, assignments and query conditions."""

    def __init__(self, signature, program):
        self.sig = signature
        self.prog = program

    def collect_vars(self, node, found):
        if isinstance(node, VarRef):
            if node.name not in self.sig.vars:
                raise PalSemanticError(
                    f"undeclared variable {node.name!r}",
                    node.pos.line,
                    node.pos.column,
                )
            if node.name not in found:
                found.append(node.name)
        elif isinstance(node, (Num, Sym)):
            pass
        elif isinstance(node, Term):
            for a in node.args:
                self.collect_vars(a, found)
        elif isinstance(node, (NameExpr, PrevExpr, PertAtom)):
            self.collect_vars(node.term, found)
        elif isinstance(node, NegExpr):
            self.collect_vars(node.operand, found)
        elif isinstance(node, BinExpr):
            self.collect_vars(node.left, found)
            self.collect_vars(node.right, found)
        elif isinstance(node, CmpAtom):
            self.collect_vars(node.lhs, found)
            self.collect_vars(node.rhs, found)
        elif isinstance(node, syntax.Literal):
            self.collect_vars(node.atom, found)
        else:
            raise TypeError(f"unexpected node: {node!r}")

    def rule_vars(self, rule):
        """Variables occurring in a rule, in variable-declaration order."""
        found = []
        if rule.head is not None:
            self.collect_vars(rule.head[0], found)
            self.collect_vars(rule.head[1], found)
        for lit in rule.body:
            self.collect_vars(lit, found)
        order = list(self.sig.vars)
        return sorted(found, key=order.index)

    def bindings(self, var_names):
        domains = [self.sig.vars[v].elements for v in var_names]
        for combo in itertools.product(*domains):
            yield dict(zip(var_names, combo))

    def resolve_term(self, term, binding, want=None):
        """Ground a term's arguments and look it up in the term tables.

        Returns ("fluent", fid) or ("action", aid).  Raises _DropInstance
        when an evaluated argument is outside the declared sort.
        """
        sym = self.sig.by_name.get(term.name)
        if sym is None:
            raise PalSemanticError(
                f"undeclared symbol {term.name!r}", term.pos.line, term.pos.column
            )
        if want is not None and sym.kind != want:
            raise PalSemanticError(
                f"{term.name!r} is {'an action' if sym.kind == 'action' else 'a fluent'},"
                f" expected {'an action' if want == 'action' else 'a fluent'}",
                term.pos.line,
                term.pos.column,
            )
        if len(term.args) != len(sym.arg_sorts):
            raise PalSemanticError(
                f"{term.name!r} takes {len(sym.arg_sorts)} argument(s),"
                f" got {len(term.args)}",
                term.pos.line,
                term.pos.column,
            )
        args = tuple(eval_arg_expr(a, binding) for a in term.args)
        for v, sort in zip(args, sym.arg_sorts):
            if v not in sort.elements:
                raise _DropInstance()
        if sym.kind == "fluent":
            return "fluent", self.prog.fluent_index[(term.name, args)]
        return "action", self.prog.action_index[(term.name, args)]

    def ground_vexpr(self, expr, binding):
        """Ground a value expression to a tuple tree, folding constants."""
        if isinstance(expr, Num):
            return ("const", expr.value)
        if isinstance(expr, Sym):
            return ("const", expr.name)
        if isinstance(expr, VarRef):
            if expr.name not in binding:
                raise PalSemanticError(
                    f"undeclared variable {expr.name!r}",
                    expr.pos.line,
                    expr.pos.column,
                )
            return ("const", binding[expr.name])
        if isinstance(expr, NameExpr):
            term = expr.term
            if term.name not in self.sig.by_name:
                if term.args:
                    raise PalSemanticError(
                        f"undeclared symbol {term.name!r}",
                        term.pos.line,
                        term.pos.column,
                    )
                return ("const", term.name)  # plain symbol constant
            kind, idx = self.resolve_term(term, binding)
            return ("flu" if kind == "fluent" else "act", idx)
        if isinstance(expr, PrevExpr):
            sym = self.sig.by_name.get(expr.term.name)
            if sym is not None and sym.kind == "action":
                raise PalSemanticError(
                    "prev applied to an action term",
                    expr.pos.line,
                    expr.pos.column,
                )
            kind, idx = self.resolve_term(expr.term, binding, want="fluent")
            return ("prev", idx)
        if isinstance(expr, NegExpr):
            inner = self.ground_vexpr(expr.operand, binding)
            if inner[0] == "const":
                v = inner[1]
                if not isinstance(v, int):
                    raise PalSemanticError(
                        f"symbol constant {v!r} in arithmetic",
                        expr.pos.line,
                        expr.pos.column,
                    )
                return ("const", -v)
            return ("neg", inner)
        if isinstance(expr, BinExpr):
            left = self.ground_vexpr(expr.left, binding)
            right = self.ground_vexpr(expr.right, binding)
            if left[0] == "const" and right[0] == "const":
                lv, rv = left[1], right[1]
                if not isinstance(lv, int) or not isinstance(rv, int):
                    bad = lv if not isinstance(lv, int) else rv
                    raise PalSemanticError(
                        f"symbol constant {bad!r} in arithmetic",
                        expr.pos.line,
                        expr.pos.column,
                    )
                value = lv + rv if expr.op == "+" else lv - rv if expr.op == "-" else lv * rv
                return ("const", value)
            tag = {"+": "add", "-": "sub", "*": "mul"}[expr.op]
            return (tag, left, right)
        raise TypeError(f"not a value expression: {expr!r}")

    def ground_literal(self, lit, binding):
        """Ground one literal; returns None when it is constant-true.

        Raises _DropInstance for constant-false literals and for
        out-of-sort arguments.
        """
        atom = lit.atom
        if isinstance(atom, PertAtom):
            kind, idx = self.resolve_term(atom.term, binding)
            if kind == "action":
                return (NPERT_ACT if lit.neg else PERT_ACT, idx)
            return (NPERT_FLU if lit.neg else PERT_FLU, idx)
        lhs = self.ground_vexpr(atom.lhs, binding)
        rhs = self.ground_vexpr(atom.rhs, binding)
        if lhs[0] == "const" and rhs[0] == "const":
            truth = _const_compare(lhs[1], atom.op, rhs[1], atom.pos)
            if truth != lit.neg:
                return None
            raise _DropInstance()
        return (CMP, lit.neg, atom.op, lhs, rhs)

    def ground_condition(self, literals, binding):
        """Ground a query/guard condition; None means constant-false."""
        out = []
        for lit in literals:
            try:
                ground = self.ground_literal(lit, binding)
            except _DropInstance:
                return None
            if ground is not None:
                out.append(ground)
        return tuple(out)


def _const_compare(lv, op, rv, pos):
    if op == "=":
        return lv == rv
    if op == "<>":
        return lv != rv
    if not isinstance(lv, int) or not isinstance(rv, int):
        bad = lv if not isinstance(lv, int) else rv
        raise PalSemanticError(
            f"ordering comparison on symbol {bad!r}", pos.line, pos.column
        )
    if op == "<":
        return lv < rv
    if op == "<=":
        return lv <= rv
    if op == ">":
        return lv > rv
    return lv >= rv


def ground_rules(schemas, signature, program):
    """Instantiate every schema over its variables, in schema order."""
    grounder = Grounder(signature, program)
    rules = []
    for schema_index, schema in enumerate(schemas):
        var_names = grounder.rule_vars(schema)
        for binding in grounder.bindings(var_names):
            try:
                if schema.head is None:
                    head_fid, head_expr = -1, None
                else:
                    term, vexpr = schema.head
                    sym = signature.by_name.get(term.name)
                    if sym is not None and sym.kind == "action":
                        raise PalSemanticError(
                            f"rule head {term.name!r} must be a fluent",
                            term.pos.line,
                            term.pos.column,
                        )
                    _, head_fid = grounder.resolve_term(term, binding, want="fluent")
                    head_expr = grounder.ground_vexpr(vexpr, binding)
                body = []
                for lit in schema.body:
                    ground = grounder.ground_literal(lit, binding)
                    if ground is not None:
                        body.append(ground)
            except _DropInstance:
                continue
            rules.append(
                GroundRule(len(rules), head_fid, head_expr, tuple(body), schema_index)
            )
    return rules
