"""The actual narrative: initialization, incremental execution, history."""

from .engine import State, eval_ground_expr
from .errors import PalRuntimeError, PalSemanticError
from .grounding import UNDEF, Grounder, _DropInstance


class TransitionRecord:
    """What one accepted transition changed, for rendering."""

    __slots__ = ("situation", "acts", "state")

    def __init__(self, situation, acts, state):
        self.situation = situation  # 1-based transition count
        self.acts = acts  # aid -> encoded value
        self.state = state


class Narrative:
    """Single-owner mutable sequence of situations."""

    def __init__(self, prog, engine):
        self.prog = prog
        self.engine = engine
        self.states = []
        self.resumed = 0

    @property
    def initialized(self):
        return bool(self.states)

    @property
    def current(self):
        return self.states[-1]

    def previous_of_current(self):
        return self.states[-2] if len(self.states) > 1 else None

    def initialize(self, assigns):
        """Build situation 0 from an initially clause.

        Returns True when an existing narrative was discarded (the
        caller prints the Resume line).  No rules are evaluated here:
        situation 0 holds exactly the given values.
        """
        prog = self.prog
        grounder = Grounder(prog.signature, prog)
        assigned = {}
        for assign in assigns:
            found = []
            grounder.collect_vars(assign.term, found)
            grounder.collect_vars(assign.value, found)
            order = list(prog.signature.vars)
            found.sort(key=order.index)
            for binding in grounder.bindings(found):
                try:
                    kind, fid = grounder.resolve_term(assign.term, binding)
                except _DropInstance:
                    raise PalSemanticError(
                        f"argument of {assign.term.name!r} outside its sort",
                        assign.pos.line,
                        assign.pos.column,
                    )
                if kind == "action":
                    raise PalSemanticError(
                        f"action term {assign.term.name!r} in initially",
                        assign.pos.line,
                        assign.pos.column,
                    )
                gexpr = grounder.ground_vexpr(assign.value, binding)
                if gexpr[0] != "const":
                    raise PalSemanticError(
                        "initial values must be constants",
                        assign.pos.line,
                        assign.pos.column,
                    )
                v = prog.encode(gexpr[1])
                if v not in prog.fluent_codomain_set[fid]:
                    raise PalSemanticError(
                        f"value {prog.decode_str(v)} outside the codomain of"
                        f" {prog.fluent_str(fid)}",
                        assign.pos.line,
                        assign.pos.column,
                    )
                if fid in assigned and assigned[fid] != v:
                    raise PalSemanticError(
                        f"fluent {prog.fluent_str(fid)} assigned twice with"
                        " different values",
                        assign.pos.line,
                        assign.pos.column,
                    )
                assigned[fid] = v
        for fid in range(prog.n_fluents):
            if fid not in assigned:
                raise PalSemanticError(
                    f"fluent {prog.fluent_str(fid)} has no initial value"
                )
        resumed = self.initialized
        if resumed:
            self.resumed += 1
        vals = [assigned[f] for f in range(prog.n_fluents)]
        self.states = [State(prog, vals, frozenset(), {})]
        return resumed

    def perform(self, steps):
        """Apply transitions sequentially; stops at the first failure.

        A failed step leaves the narrative at the last accepted state
        and raises PalRuntimeError tagged with the 1-based situation
        number that was being built.
        """
        if not self.initialized:
            raise PalSemanticError("no initial situation (missing initially)")
        records = []
        for acts in steps:
            situation = len(self.states)
            result = self.engine.transition(self.current, acts)
            if not result.accepted:
                prefix = {
                    "rejected": "inconsistent",
                    "inconsistent": "inconsistent",
                    "undefined": "undefined",
                    "eval_error": "error",
                }[result.kind]
                raise PalRuntimeError(
                    f"{prefix} at situation {situation}:"
                    f" {result.describe(self.prog)}",
                    situation=situation,
                )
            self.states.append(result.state)
            records.append(TransitionRecord(situation, dict(acts), result.state))
        return records

    def state_at(self, k):
        if not 0 <= k < len(self.states):
            raise PalRuntimeError(
                f"situation {k} out of range (0..{len(self.states) - 1})"
            )
        return self.states[k]


def ground_step(assigns, prog, narrative):
    """Turn one do-step's assignments into an action assignment.

    Variables are expanded over their sorts; value expressions are
    evaluated against the current situation.
    """
    grounder = Grounder(prog.signature, prog)
    current = narrative.current
    prev = narrative.previous_of_current()
    prev_vals = prev.vals if prev is not None else None
    acts = {}
    for assign in assigns:
        found = []
        grounder.collect_vars(assign.term, found)
        grounder.collect_vars(assign.value, found)
        order = list(prog.signature.vars)
        found.sort(key=order.index)
        for binding in grounder.bindings(found):
            try:
                kind, aid = grounder.resolve_term(assign.term, binding)
            except _DropInstance:
                raise PalSemanticError(
                    f"argument of {assign.term.name!r} outside its sort",
                    assign.pos.line,
                    assign.pos.column,
                )
            if kind == "fluent":
                raise PalSemanticError(
                    f"cannot perform fluent {assign.term.name!r}",
                    assign.pos.line,
                    assign.pos.column,
                )
            gexpr = grounder.ground_vexpr(assign.value, binding)
            v = eval_ground_expr(
                gexpr, prog, lambda f: current.vals[f], prev_vals, current.acts
            )
            if v == UNDEF:
                raise PalSemanticError(
                    f"undefined value for action {prog.action_str(aid)}",
                    assign.pos.line,
                    assign.pos.column,
                )
            if v not in prog.action_codomain_set[aid]:
                raise PalSemanticError(
                    f"value {prog.decode_str(v)} outside the codomain of"
                    f" {prog.action_str(aid)}",
                    assign.pos.line,
                    assign.pos.column,
                )
            if aid in acts and acts[aid] != v:
                raise PalSemanticError(
                    f"action {prog.action_str(aid)} assigned twice with"
                    " different values",
                    assign.pos.line,
                    assign.pos.column,
                )
            acts[aid] = v
    return acts
