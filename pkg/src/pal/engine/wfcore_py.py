"""Pure-Python transition kernel.

Reference implementation of the well-founded transition computation.
The compiled kernel in ``_wfcore.pyx`` follows this file line for line;
keep the two in sync.

One transition is computed by an alternating fixpoint over pertinence
assumptions: starting from "every fluent may be pertinent", a lower
closure (default negation read against the upper estimate) and an upper
closure (read against the lower result) are repeated until the upper
estimate stops shrinking.  Inside a closure, rules fire positively; a
fluent's current value is whatever the closure has caused so far, plus
its previous value when the closure's reading says it is not pertinent
(implicit inertia).  Pertinence minimization is implicit as well: only
fired rules ever make anything pertinent.
"""

from ..grounding import (
    CMP, ERR, NPERT_ACT, NPERT_FLU, OP_ACT, OP_ADD, OP_CONST, OP_FLU,
    OP_MUL, OP_NEG, OP_PREV, OP_SUB, PERT_ACT, PERT_FLU, UNDEF,
)

KERNEL_NAME = "python"

NOVAL = UNDEF
_MULTI = -5  # fast-path marker: some referenced fluent has several values

ERR_ARITH = 0  # symbol operand under +,-,* or an ordering comparison
ERR_CODOMAIN = 1  # head value outside the target's codomain

_TRUE, _PENDING, _DEAD = 1, 0, -1


class _EvalAbort(Exception):
    def __init__(self, rule, code):
        self.rule = rule
        self.code = code


class Kernel:
    """Owns per-instance scratch buffers; not safe for concurrent use."""

    def __init__(self, prog):
        self.prog = prog
        self.F = prog.n_fluents
        self.A = prog.n_actions
        self.R = prog.n_rules

        self.head_fid = prog.rule_head_fid
        self.head_expr = prog.rule_head_expr
        self.head_has_flu = prog.rule_head_has_flu
        self.lit_off = prog.rule_lit_off
        self.lit_cnt = prog.rule_lit_cnt
        self.lit_kind = prog.rule_lit_kind
        self.lit_a = prog.rule_lit_a
        self.lit_b = prog.rule_lit_b
        self.lit_c = prog.rule_lit_c
        self.lit_static = prog.rule_lit_static
        self.expr_code = prog.expr_code
        self.expr_span = prog.expr_span
        self.flu_dep_rules = prog.flu_dep_rules
        self.codomain = prog.fluent_codomain_set
        self.has_flu_deps = prog.has_flu_deps

        # per-transition state
        self.prev_vals = None
        self.performed = None
        self.act_vals = None
        # per-closure state
        self.pert = [False] * self.F
        self.caused = [NOVAL] * self.F
        self.multi = {}
        self.npert_read = [False] * self.F
        self.dead = [False] * self.R
        self.falsum_rule = -1
        self.lower = True

    # --- expression evaluation -------------------------------------------

    def _eval_expr(self, eid):
        """Fast path: every referenced fluent has at most one value.

        Returns an encoded value, UNDEF, ERR or _MULTI (switch to the
        set-valued path).
        """
        off, n = self.expr_span[eid]
        code = self.expr_code
        caused = self.caused
        stack = []
        push = stack.append
        for i in range(off, off + n):
            op, arg = code[i]
            if op == OP_CONST:
                push(arg)
            elif op == OP_PREV:
                push(self.prev_vals[arg])
            elif op == OP_ACT:
                v = self.act_vals[arg] if self.performed[arg] else UNDEF
                if v == UNDEF:
                    return UNDEF
                push(v)
            elif op == OP_FLU:
                v = caused[arg]
                if v == NOVAL:
                    if self.npert_read[arg]:
                        push(self.prev_vals[arg])
                    else:
                        return UNDEF
                else:
                    if arg in self.multi or self.npert_read[arg]:
                        return _MULTI
                    push(v)
            elif op == OP_NEG:
                v = stack.pop()
                if v & 1:
                    return ERR
                push(-v)
            else:
                b = stack.pop()
                a = stack.pop()
                if (a | b) & 1:
                    return ERR
                if op == OP_ADD:
                    push(a + b)
                elif op == OP_SUB:
                    push(a - b)
                else:
                    push((a * b) >> 1)
        return stack[-1]

    def _eval_expr_set(self, eid):
        """Set-valued evaluation; returns a tuple of values, () or ERR.

        An empty tuple means the expression is undefined.
        """
        off, n = self.expr_span[eid]
        code = self.expr_code
        stack = []
        push = stack.append
        for i in range(off, off + n):
            op, arg = code[i]
            if op == OP_CONST:
                push((arg,))
            elif op == OP_PREV:
                push((self.prev_vals[arg],))
            elif op == OP_ACT:
                v = self.act_vals[arg] if self.performed[arg] else UNDEF
                if v == UNDEF:
                    return ()
                push((v,))
            elif op == OP_FLU:
                vals = []
                c = self.caused[arg]
                if c != NOVAL:
                    vals.append(c)
                    vals.extend(self.multi.get(arg, ()))
                if self.npert_read[arg]:
                    p = self.prev_vals[arg]
                    if p not in vals:
                        vals.append(p)
                if not vals:
                    return ()
                push(tuple(vals))
            elif op == OP_NEG:
                vs = stack.pop()
                if any(v & 1 for v in vs):
                    return ERR
                push(tuple(-v for v in vs))
            else:
                bs = stack.pop()
                as_ = stack.pop()
                out = []
                for a in as_:
                    for b in bs:
                        if (a | b) & 1:
                            return ERR
                        if op == OP_ADD:
                            v = a + b
                        elif op == OP_SUB:
                            v = a - b
                        else:
                            v = (a * b) >> 1
                        if v not in out:
                            out.append(v)
                push(tuple(out))
        return stack[-1]

    # --- literals ----------------------------------------------------------

    def _eval_cmp(self, li, rule):
        """Truth of a comparison literal: _TRUE, _PENDING or _DEAD."""
        a = self.lit_a[li]
        neg = a & 1
        op = a >> 1
        lv = self._eval_expr(self.lit_b[li])
        rv = self._eval_expr(self.lit_c[li]) if lv != _MULTI else _MULTI
        if lv == _MULTI or rv == _MULTI:
            return self._eval_cmp_sets(li, rule, neg, op)
        if lv == ERR or rv == ERR:
            raise _EvalAbort(rule, ERR_ARITH)
        if lv == UNDEF or rv == UNDEF:
            return _DEAD if self.lit_static[li] else _PENDING
        truth = self._rel(op, lv, rv, rule)
        if truth != bool(neg):
            return _TRUE
        return _DEAD if self.lit_static[li] else _PENDING

    def _eval_cmp_sets(self, li, rule, neg, op):
        ls = self._eval_expr_set(self.lit_b[li])
        if ls == ERR:
            raise _EvalAbort(rule, ERR_ARITH)
        rs = self._eval_expr_set(self.lit_c[li])
        if rs == ERR:
            raise _EvalAbort(rule, ERR_ARITH)
        if not ls or not rs:
            return _PENDING
        for a in ls:
            for b in rs:
                if self._rel(op, a, b, rule) != bool(neg):
                    return _TRUE
        return _PENDING

    def _rel(self, op, a, b, rule):
        if op == 0:
            return a == b
        if op == 1:
            return a != b
        if (a | b) & 1:
            raise _EvalAbort(rule, ERR_ARITH)
        if op == 2:
            return a < b
        if op == 3:
            return a <= b
        if op == 4:
            return a > b
        return a >= b

    # --- one positive closure ----------------------------------------------

    def _closure(self, npert_read, lower):
        F = self.F
        self.pert = [False] * F
        self.caused = [NOVAL] * F
        self.multi = {}
        self.npert_read = npert_read
        self.dead = [False] * self.R
        self.falsum_rule = -1
        self.lower = lower

        queue = []
        self._queue = queue
        self._queued = [False] * F
        for r in range(self.R):
            self._try_rule(r)
        qi = 0
        while qi < len(queue):
            f = queue[qi]
            qi += 1
            self._queued[f] = False
            for r in self.flu_dep_rules[f]:
                self._try_rule(r)
        return self.pert, self.caused, self.multi, self.falsum_rule

    def _try_rule(self, r):
        if self.dead[r]:
            return
        off = self.lit_off[r]
        for li in range(off, off + self.lit_cnt[r]):
            kind = self.lit_kind[li]
            if kind == PERT_ACT:
                if self.performed[self.lit_a[li]]:
                    continue
                self.dead[r] = True
                return
            if kind == NPERT_ACT:
                if not self.performed[self.lit_a[li]]:
                    continue
                self.dead[r] = True
                return
            if kind == PERT_FLU:
                if self.pert[self.lit_a[li]]:
                    continue
                return  # pending: retried when the fluent becomes pertinent
            if kind == NPERT_FLU:
                if self.npert_read[self.lit_a[li]]:
                    continue
                self.dead[r] = True
                return
            try:
                truth = self._eval_cmp(li, r)
            except _EvalAbort:
                if self.lower:
                    raise
                self.dead[r] = True
                return
            if truth == _TRUE:
                continue
            if truth == _DEAD:
                self.dead[r] = True
            return

        # body is true: fire
        fid = self.head_fid[r]
        if fid < 0:
            if self.falsum_rule < 0 or r < self.falsum_rule:
                self.falsum_rule = r
            self.dead[r] = True
            return
        eid = self.head_expr[r]
        v = self._eval_expr(eid)
        if v == _MULTI:
            vs = self._eval_expr_set(eid)
            if vs == ERR:
                self._head_error(r, fid, ERR_ARITH)
                return
            for v in vs:
                self._add_caused(r, fid, v)
        elif v == ERR:
            self._head_error(r, fid, ERR_ARITH)
            return
        elif v == UNDEF:
            return  # undefined head value: the rule does not fire
        else:
            self._add_caused(r, fid, v)
        if not self.head_has_flu[r]:
            self.dead[r] = True

    def _head_error(self, r, fid, code):
        # In a lower closure the firing is real and aborts the transition.
        # In an upper closure it only marks the target possibly pertinent.
        if self.lower:
            raise _EvalAbort(r, code)
        self._mark_pert(fid)
        self.dead[r] = True

    def _add_caused(self, r, fid, v):
        if v not in self.codomain[fid]:
            self._head_error(r, fid, ERR_CODOMAIN)
            return
        changed = False
        c = self.caused[fid]
        if c == NOVAL:
            self.caused[fid] = v
            changed = True
        elif v != c:
            extra = self.multi.setdefault(fid, [])
            if v not in extra:
                extra.append(v)
                changed = True
        if not self.pert[fid]:
            self.pert[fid] = True
            changed = True
        if changed and not self._queued[fid]:
            self._queued[fid] = True
            self._queue.append(fid)

    def _mark_pert(self, fid):
        if not self.pert[fid]:
            self.pert[fid] = True
            if not self._queued[fid]:
                self._queued[fid] = True
                self._queue.append(fid)

    # --- the transition -----------------------------------------------------

    def transition(self, prev_vals, performed, act_vals):
        """Compute one transition; inputs are encoded arrays.

        Returns one of:
          ("accepted", next_vals, pert_fids)
          ("rejected", rule_index)
          ("inconsistent", fid, v1, v2)
          ("undefined", fids)
          ("eval_error", rule_index, code)
        """
        self.prev_vals = prev_vals
        self.performed = performed
        self.act_vals = act_vals
        F = self.F

        try:
            if not self.has_flu_deps:
                pert, caused, multi, falsum = self._closure([False] * F, True)
                upper = pert
            else:
                upper = [True] * F
                for _ in range(F + 2):
                    npert_l = [not u for u in upper]
                    # closure buffers are fresh objects per call, so the
                    # lower results stay valid across the upper closure
                    pert, caused, multi, falsum = self._closure(npert_l, True)
                    npert_u = [not p for p in pert]
                    u_pert, _, _, _ = self._closure(npert_u, False)
                    if u_pert == upper:
                        break
                    upper = u_pert
                else:
                    raise AssertionError("alternating fixpoint did not converge")
        except _EvalAbort as e:
            return ("eval_error", e.rule, e.code)

        undefined = [f for f in range(F) if upper[f] and not pert[f]]
        if undefined:
            return ("undefined", undefined)
        if multi:
            fid = min(multi)
            return ("inconsistent", fid, caused[fid], multi[fid][0])
        if falsum >= 0:
            return ("rejected", falsum)
        prev = self.prev_vals
        next_vals = [caused[f] if pert[f] else prev[f] for f in range(F)]
        pert_fids = [f for f in range(F) if pert[f]]
        return ("accepted", next_vals, pert_fids)
