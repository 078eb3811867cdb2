"""Transition semantics behind a pluggable backend interface.

Only the well-founded backend exists; it is registered under the name
``"wf"`` so alternative rule semantics can be dropped in later without
touching callers.  The well-founded backend itself picks one of two
interchangeable kernels at import time: the compiled extension when it
was built, the pure-Python reference otherwise (``PAL_PURE_PYTHON=1``
forces the latter).
"""

import os

from ..errors import PalConfigError, PalRuntimeError
from ..grounding import UNDEF
from . import wfcore_py

try:
    from . import _wfcore
except ImportError:
    _wfcore = None

ERR_ARITH = wfcore_py.ERR_ARITH
ERR_CODOMAIN = wfcore_py.ERR_CODOMAIN


def available_kernels():
    names = ["python"]
    if _wfcore is not None:
        names.insert(0, "c")
    return names


def default_kernel_name():
    if _wfcore is not None and not os.environ.get("PAL_PURE_PYTHON"):
        return "c"
    return "python"


def _kernel_class(name):
    if name == "python":
        return wfcore_py.Kernel
    if name == "c":
        if _wfcore is None:
            raise PalConfigError("compiled kernel is not available")
        return _wfcore.Kernel
    raise PalConfigError(f"unknown kernel {name!r}")


class State:
    """One situation: total fluent valuation, pertinence set, actions.

    Values are stored encoded; the mapping properties decode on demand.
    """

    __slots__ = ("prog", "vals", "pert", "acts")

    def __init__(self, prog, vals, pert, acts):
        self.prog = prog
        self.vals = tuple(vals)
        self.pert = frozenset(pert)
        self.acts = dict(acts)  # aid -> encoded value

    @property
    def values(self):
        prog = self.prog
        return {
            prog.fluent_terms[f]: prog.decode(v) for f, v in enumerate(self.vals)
        }

    @property
    def pert_fluents(self):
        return {self.prog.fluent_terms[f] for f in self.pert}

    @property
    def actions(self):
        prog = self.prog
        return {prog.action_terms[a]: prog.decode(v) for a, v in self.acts.items()}

    def value_of(self, name, args=()):
        fid = self.prog.fluent_index[(name, tuple(args))]
        return self.prog.decode(self.vals[fid])

    def __eq__(self, other):
        return (
            isinstance(other, State)
            and self.vals == other.vals
            and self.pert == other.pert
            and self.acts == other.acts
        )

    def __repr__(self):
        return f"State(pert={sorted(self.pert)})"


def validate_state(state):
    """Re-check functional uniqueness: total, one in-codomain value each."""
    prog = state.prog
    if len(state.vals) != prog.n_fluents:
        raise AssertionError("valuation is not total")
    for fid, v in enumerate(state.vals):
        if v not in prog.fluent_codomain_set[fid]:
            raise AssertionError(
                f"value of {prog.fluent_str(fid)} outside its codomain"
            )
    for fid in state.pert:
        if not 0 <= fid < prog.n_fluents:
            raise AssertionError("pertinence of an unknown fluent")
    for aid, v in state.acts.items():
        if v not in prog.action_codomain_set[aid]:
            raise AssertionError(
                f"value of {prog.action_str(aid)} outside its codomain"
            )
    return True


class TransitionResult:
    """Outcome of one transition attempt."""

    __slots__ = ("kind", "state", "rule", "fluent", "v1", "v2", "fluents", "err_code")

    def __init__(self, kind, state=None, rule=None, fluent=None, v1=None, v2=None,
                 fluents=None, err_code=None):
        self.kind = kind  # accepted | rejected | inconsistent | undefined | eval_error
        self.state = state
        self.rule = rule
        self.fluent = fluent
        self.v1 = v1
        self.v2 = v2
        self.fluents = fluents
        self.err_code = err_code

    @property
    def accepted(self):
        return self.kind == "accepted"

    def describe(self, prog):
        if self.kind == "accepted":
            return "accepted"
        if self.kind == "rejected":
            return f"constraint {prog.rule_str(self.rule)}"
        if self.kind == "inconsistent":
            return (
                f"{prog.fluent_str(self.fluent)} caused both "
                f"{prog.decode_str(self.v1)} and {prog.decode_str(self.v2)}"
            )
        if self.kind == "undefined":
            names = ", ".join(prog.fluent_str(f) for f in self.fluents)
            return f"undefined pertinence of {names}"
        reason = (
            "value outside the codomain"
            if self.err_code == ERR_CODOMAIN
            else "symbol operand in arithmetic"
        )
        return f"evaluation error ({reason}) in rule {prog.rule_str(self.rule)}"


class WellFoundedEngine:
    """The well-founded backend: a pure function of (prev, acts, rules)."""

    name = "wf"

    def __init__(self, prog, kernel=None):
        self.prog = prog
        self.kernel_name = kernel or default_kernel_name()
        self._kernel = _kernel_class(self.kernel_name)(prog)
        self._performed = [0] * prog.n_actions
        self._act_vals = [UNDEF] * prog.n_actions

    def transition(self, prev, acts):
        """One step from State ``prev`` under ``acts`` (aid -> encoded)."""
        prog = self.prog
        performed = self._performed
        act_vals = self._act_vals
        for a in range(prog.n_actions):
            performed[a] = 0
        for a, v in acts.items():
            performed[a] = 1
            act_vals[a] = v
        res = self._kernel.transition(prev.vals, performed, act_vals)
        tag = res[0]
        if tag == "accepted":
            _, next_vals, pert = res
            return TransitionResult(
                "accepted", state=State(prog, next_vals, pert, acts)
            )
        if tag == "rejected":
            return TransitionResult("rejected", rule=prog.rules[res[1]])
        if tag == "inconsistent":
            return TransitionResult(
                "inconsistent", fluent=res[1], v1=res[2], v2=res[3]
            )
        if tag == "undefined":
            return TransitionResult("undefined", fluents=res[1])
        return TransitionResult(
            "eval_error", rule=prog.rules[res[1]], err_code=res[2]
        )


SEMANTICS = {"wf": WellFoundedEngine}


def create_engine(prog, semantics="wf", kernel=None):
    """Instantiate the selected semantics backend for a ground program."""
    if semantics not in SEMANTICS:
        raise PalConfigError(f"unknown semantics backend {semantics!r}")
    return SEMANTICS[semantics](prog, kernel=kernel)


def compute_transition(prev, acts, prog, kernel=None):
    """Convenience wrapper: one well-founded transition."""
    return WellFoundedEngine(prog, kernel=kernel).transition(prev, acts)


class EvalError(PalRuntimeError):
    def __init__(self, code):
        super().__init__(
            "value outside the codomain"
            if code == ERR_CODOMAIN
            else "symbol operand in arithmetic"
        )
        self.code = code


def eval_ground_expr(gexpr, prog, cur, prev_vals, acts):
    """Evaluate a ground value expression against one situation.

    ``cur`` maps fid to an encoded value or UNDEF (partial valuations
    are allowed), ``prev_vals`` is the previous situation's valuation or
    None, ``acts`` maps aid to an encoded value for performed actions.
    Returns an encoded value or UNDEF; any undefined operand makes the
    whole expression undefined.  Raises EvalError on symbol operands
    under an arithmetic operator.
    """
    tag = gexpr[0]
    if tag == "const":
        return prog.encode(gexpr[1])
    if tag == "flu":
        return cur(gexpr[1])
    if tag == "prev":
        if prev_vals is None:
            return UNDEF
        return prev_vals[gexpr[1]]
    if tag == "act":
        return acts.get(gexpr[1], UNDEF)
    if tag == "neg":
        v = eval_ground_expr(gexpr[1], prog, cur, prev_vals, acts)
        if v == UNDEF:
            return UNDEF
        if v & 1:
            raise EvalError(ERR_ARITH)
        return -v
    a = eval_ground_expr(gexpr[1], prog, cur, prev_vals, acts)
    if a == UNDEF:
        return UNDEF
    b = eval_ground_expr(gexpr[2], prog, cur, prev_vals, acts)
    if b == UNDEF:
        return UNDEF
    if (a | b) & 1:
        raise EvalError(ERR_ARITH)
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    return (a * b) >> 1


def compare_encoded(op, a, b):
    """Relational test on encoded values; ordering demands integers."""
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if (a | b) & 1:
        raise EvalError(ERR_ARITH)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def literal_holds(lit, prog, cur, prev_vals, acts, pert_fids):
    """Classical truth of one ground literal against a complete state."""
    from ..grounding import CMP, NPERT_ACT, NPERT_FLU, PERT_ACT, PERT_FLU

    kind = lit[0]
    if kind == PERT_ACT:
        return lit[1] in acts
    if kind == NPERT_ACT:
        return lit[1] not in acts
    if kind == PERT_FLU:
        return lit[1] in pert_fids
    if kind == NPERT_FLU:
        return lit[1] not in pert_fids
    _, neg, op, lhs, rhs = lit
    a = eval_ground_expr(lhs, prog, cur, prev_vals, acts)
    if a == UNDEF:
        return False
    b = eval_ground_expr(rhs, prog, cur, prev_vals, acts)
    if b == UNDEF:
        return False
    truth = compare_encoded(op, a, b)
    return truth != bool(neg)


def eval_value_expr(gexpr, prog, current=None, prev=None, acts=None):
    """Decoded convenience wrapper around eval_ground_expr.

    ``current`` maps (name, args) to a value (missing terms are
    undefined), ``prev`` is the previous State, ``acts`` maps
    (name, args) to a value.  Returns the value or None when undefined.
    """
    cur_enc = {}
    for term, v in (current or {}).items():
        cur_enc[prog.fluent_index[term]] = prog.encode(v)
    acts_enc = {}
    for term, v in (acts or {}).items():
        acts_enc[prog.action_index[term]] = prog.encode(v)
    prev_vals = list(prev.vals) if prev is not None else None
    v = eval_ground_expr(
        gexpr, prog, lambda f: cur_enc.get(f, UNDEF), prev_vals, acts_enc
    )
    return None if v == UNDEF else prog.decode(v)
