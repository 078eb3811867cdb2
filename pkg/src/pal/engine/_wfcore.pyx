# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transition kernel.

Mirrors ``wfcore_py.py`` operation for operation; keep the two in sync.
The rare set-valued paths (a fluent carrying several candidate values)
stay in Python-object code, everything hot runs on C arrays.
"""

from libc.stdlib cimport calloc, free
from libc.string cimport memset

from ..grounding import (
    CMP as G_CMP,
    NPERT_ACT as G_NPERT_ACT,
    NPERT_FLU as G_NPERT_FLU,
    PERT_ACT as G_PERT_ACT,
    PERT_FLU as G_PERT_FLU,
)

KERNEL_NAME = "c"

cdef long long NOVAL = -1
cdef long long UNDEF_V = -1
cdef long long ERR_V = -3
cdef long long MULTI_V = -5

cdef int ERR_ARITH = 0
cdef int ERR_CODOMAIN = 1

cdef int K_PERT_ACT = G_PERT_ACT
cdef int K_NPERT_ACT = G_NPERT_ACT
cdef int K_PERT_FLU = G_PERT_FLU
cdef int K_NPERT_FLU = G_NPERT_FLU
cdef int K_CMP = G_CMP

# expression opcodes, fixed in grounding.py
cdef int C_CONST = 0
cdef int C_PREV = 1
cdef int C_ACT = 2
cdef int C_FLU = 3
cdef int C_ADD = 4
cdef int C_SUB = 5
cdef int C_MUL = 6
cdef int C_NEG = 7

cdef int T_TRUE = 1
cdef int T_PENDING = 0
cdef int T_DEAD = -1
cdef int T_ABORT = -2


cdef class Kernel:
    cdef public object prog
    cdef int F, A, R, n_code, n_exprs, n_lits, qcap, stack_cap

    cdef long long* prev_vals
    cdef unsigned char* performed
    cdef long long* act_vals

    cdef int* head_fid
    cdef int* head_expr
    cdef unsigned char* head_has_flu
    cdef int* lit_off
    cdef int* lit_cnt
    cdef unsigned char* lit_kind
    cdef int* lit_a
    cdef int* lit_b
    cdef int* lit_c
    cdef unsigned char* lit_static
    cdef unsigned char* code_op
    cdef long long* code_arg
    cdef int* expr_off
    cdef int* expr_len
    cdef int* dep_off
    cdef int* dep_rule
    cdef long long* cod_vals
    cdef int* cod_off

    cdef unsigned char* pert
    cdef long long* caused
    cdef unsigned char* is_multi
    cdef unsigned char* npert
    cdef unsigned char* dead
    cdef unsigned char* queued
    cdef int* queue
    cdef long long* stack

    cdef unsigned char* l_pert
    cdef long long* l_caused
    cdef unsigned char* upper

    cdef object multi
    cdef object l_multi
    cdef int falsum_rule
    cdef bint lower
    cdef int err_rule
    cdef int err_code
    cdef bint has_flu_deps
    cdef int _qtail

    def __cinit__(self, prog):
        self.prog = prog
        cdef int F = prog.n_fluents
        cdef int A = prog.n_actions
        cdef int R = prog.n_rules
        self.F = F
        self.A = A
        self.R = R
        self.has_flu_deps = prog.has_flu_deps

        self.prev_vals = <long long*> calloc(F + 1, sizeof(long long))
        self.performed = <unsigned char*> calloc(A + 1, 1)
        self.act_vals = <long long*> calloc(A + 1, sizeof(long long))

        self.head_fid = <int*> calloc(R + 1, sizeof(int))
        self.head_expr = <int*> calloc(R + 1, sizeof(int))
        self.head_has_flu = <unsigned char*> calloc(R + 1, 1)
        self.lit_off = <int*> calloc(R + 1, sizeof(int))
        self.lit_cnt = <int*> calloc(R + 1, sizeof(int))
        cdef int i
        for i in range(R):
            self.head_fid[i] = prog.rule_head_fid[i]
            self.head_expr[i] = prog.rule_head_expr[i]
            self.head_has_flu[i] = 1 if prog.rule_head_has_flu[i] else 0
            self.lit_off[i] = prog.rule_lit_off[i]
            self.lit_cnt[i] = prog.rule_lit_cnt[i]

        cdef int L = len(prog.rule_lit_kind)
        self.n_lits = L
        self.lit_kind = <unsigned char*> calloc(L + 1, 1)
        self.lit_a = <int*> calloc(L + 1, sizeof(int))
        self.lit_b = <int*> calloc(L + 1, sizeof(int))
        self.lit_c = <int*> calloc(L + 1, sizeof(int))
        self.lit_static = <unsigned char*> calloc(L + 1, 1)
        for i in range(L):
            self.lit_kind[i] = prog.rule_lit_kind[i]
            self.lit_a[i] = prog.rule_lit_a[i]
            self.lit_b[i] = prog.rule_lit_b[i]
            self.lit_c[i] = prog.rule_lit_c[i]
            self.lit_static[i] = 1 if prog.rule_lit_static[i] else 0

        cdef int C = len(prog.expr_code)
        self.n_code = C
        self.code_op = <unsigned char*> calloc(C + 1, 1)
        self.code_arg = <long long*> calloc(C + 1, sizeof(long long))
        for i in range(C):
            self.code_op[i] = prog.expr_code[i][0]
            self.code_arg[i] = prog.expr_code[i][1]

        cdef int E = len(prog.expr_span)
        self.n_exprs = E
        self.expr_off = <int*> calloc(E + 1, sizeof(int))
        self.expr_len = <int*> calloc(E + 1, sizeof(int))
        cdef int longest = 1
        for i in range(E):
            self.expr_off[i] = prog.expr_span[i][0]
            self.expr_len[i] = prog.expr_span[i][1]
            if prog.expr_span[i][1] > longest:
                longest = prog.expr_span[i][1]
        self.stack_cap = longest + 1
        self.stack = <long long*> calloc(self.stack_cap, sizeof(long long))

        cdef int deps_total = sum(len(d) for d in prog.flu_dep_rules)
        self.dep_off = <int*> calloc(F + 2, sizeof(int))
        self.dep_rule = <int*> calloc(deps_total + 1, sizeof(int))
        cdef int k = 0
        for i in range(F):
            self.dep_off[i] = k
            for r in prog.flu_dep_rules[i]:
                self.dep_rule[k] = r
                k += 1
        self.dep_off[F] = k

        cdef int cod_total = sum(len(c) for c in prog.fluent_codomain)
        self.cod_off = <int*> calloc(F + 2, sizeof(int))
        self.cod_vals = <long long*> calloc(cod_total + 1, sizeof(long long))
        k = 0
        for i in range(F):
            self.cod_off[i] = k
            for v in sorted(prog.fluent_codomain[i]):
                self.cod_vals[k] = v
                k += 1
        self.cod_off[F] = k
        self.qcap = cod_total + F + 8

        self.pert = <unsigned char*> calloc(F + 1, 1)
        self.caused = <long long*> calloc(F + 1, sizeof(long long))
        self.is_multi = <unsigned char*> calloc(F + 1, 1)
        self.npert = <unsigned char*> calloc(F + 1, 1)
        self.dead = <unsigned char*> calloc(R + 1, 1)
        self.queued = <unsigned char*> calloc(F + 1, 1)
        self.queue = <int*> calloc(self.qcap, sizeof(int))
        self.l_pert = <unsigned char*> calloc(F + 1, 1)
        self.l_caused = <long long*> calloc(F + 1, sizeof(long long))
        self.upper = <unsigned char*> calloc(F + 1, 1)
        self.multi = {}
        self.l_multi = {}

    def __dealloc__(self):
        free(self.prev_vals); free(self.performed); free(self.act_vals)
        free(self.head_fid); free(self.head_expr); free(self.head_has_flu)
        free(self.lit_off); free(self.lit_cnt)
        free(self.lit_kind); free(self.lit_a); free(self.lit_b); free(self.lit_c)
        free(self.lit_static)
        free(self.code_op); free(self.code_arg)
        free(self.expr_off); free(self.expr_len)
        free(self.dep_off); free(self.dep_rule)
        free(self.cod_vals); free(self.cod_off)
        free(self.pert); free(self.caused); free(self.is_multi); free(self.npert)
        free(self.dead); free(self.queued); free(self.queue); free(self.stack)
        free(self.l_pert); free(self.l_caused); free(self.upper)

    # --- expression evaluation -------------------------------------------

    cdef long long _eval_expr(self, int eid):
        cdef int off = self.expr_off[eid]
        cdef int n = self.expr_len[eid]
        cdef int sp = 0
        cdef int i, op
        cdef long long arg, v, a, b
        for i in range(off, off + n):
            op = self.code_op[i]
            arg = self.code_arg[i]
            if op == C_CONST:
                self.stack[sp] = arg; sp += 1
            elif op == C_PREV:
                self.stack[sp] = self.prev_vals[<int> arg]; sp += 1
            elif op == C_ACT:
                if not self.performed[<int> arg]:
                    return UNDEF_V
                self.stack[sp] = self.act_vals[<int> arg]; sp += 1
            elif op == C_FLU:
                v = self.caused[<int> arg]
                if v == NOVAL:
                    if self.npert[<int> arg]:
                        self.stack[sp] = self.prev_vals[<int> arg]; sp += 1
                    else:
                        return UNDEF_V
                else:
                    if self.is_multi[<int> arg] or self.npert[<int> arg]:
                        return MULTI_V
                    self.stack[sp] = v; sp += 1
            elif op == C_NEG:
                v = self.stack[sp - 1]
                if v & 1:
                    return ERR_V
                self.stack[sp - 1] = -v
            else:
                b = self.stack[sp - 1]; a = self.stack[sp - 2]; sp -= 1
                if (a | b) & 1:
                    return ERR_V
                if op == C_ADD:
                    self.stack[sp - 1] = a + b
                elif op == C_SUB:
                    self.stack[sp - 1] = a - b
                else:
                    self.stack[sp - 1] = (a * b) / 2
        return self.stack[sp - 1]

    cdef object _eval_expr_set(self, int eid):
        """Set-valued path (rare); Python-object code, mirrors the pure one."""
        cdef int off = self.expr_off[eid]
        cdef int n = self.expr_len[eid]
        cdef int i, op
        cdef long long arg
        stack = []
        push = stack.append
        for i in range(off, off + n):
            op = self.code_op[i]
            arg = self.code_arg[i]
            if op == C_CONST:
                push((arg,))
            elif op == C_PREV:
                push((self.prev_vals[<int> arg],))
            elif op == C_ACT:
                if not self.performed[<int> arg]:
                    return ()
                push((self.act_vals[<int> arg],))
            elif op == C_FLU:
                vals = []
                if self.caused[<int> arg] != NOVAL:
                    vals.append(self.caused[<int> arg])
                    vals.extend(self.multi.get(<int> arg, ()))
                if self.npert[<int> arg]:
                    p = self.prev_vals[<int> arg]
                    if p not in vals:
                        vals.append(p)
                if not vals:
                    return ()
                push(tuple(vals))
            elif op == C_NEG:
                vs = stack.pop()
                if any(v & 1 for v in vs):
                    return None  # ERR
                push(tuple(-v for v in vs))
            else:
                bs = stack.pop()
                as_ = stack.pop()
                out = []
                for a in as_:
                    for b in bs:
                        if (a | b) & 1:
                            return None  # ERR
                        if op == C_ADD:
                            v = a + b
                        elif op == C_SUB:
                            v = a - b
                        else:
                            v = (a * b) >> 1
                        if v not in out:
                            out.append(v)
                push(tuple(out))
        return stack[len(stack) - 1]

    # --- literals ----------------------------------------------------------

    cdef int _eval_cmp(self, int li, int r):
        cdef int a = self.lit_a[li]
        cdef int neg = a & 1
        cdef int op = a >> 1
        cdef long long lv, rv
        cdef int truth
        lv = self._eval_expr(self.lit_b[li])
        rv = MULTI_V if lv == MULTI_V else self._eval_expr(self.lit_c[li])
        if lv == MULTI_V or rv == MULTI_V:
            return self._eval_cmp_sets(li, r, neg, op)
        if lv == ERR_V or rv == ERR_V:
            self.err_rule = r; self.err_code = ERR_ARITH
            return T_ABORT
        if lv == UNDEF_V or rv == UNDEF_V:
            return T_DEAD if self.lit_static[li] else T_PENDING
        truth = self._rel(op, lv, rv, r)
        if truth < 0:
            return T_ABORT
        if truth != neg:
            return T_TRUE
        return T_DEAD if self.lit_static[li] else T_PENDING

    cdef int _eval_cmp_sets(self, int li, int r, int neg, int op):
        ls = self._eval_expr_set(self.lit_b[li])
        if ls is None:
            self.err_rule = r; self.err_code = ERR_ARITH
            return T_ABORT
        rs = self._eval_expr_set(self.lit_c[li])
        if rs is None:
            self.err_rule = r; self.err_code = ERR_ARITH
            return T_ABORT
        if not ls or not rs:
            return T_PENDING
        cdef int truth
        for a in ls:
            for b in rs:
                truth = self._rel(op, a, b, r)
                if truth < 0:
                    return T_ABORT
                if truth != neg:
                    return T_TRUE
        return T_PENDING

    cdef int _rel(self, int op, long long a, long long b, int r):
        if op == 0:
            return 1 if a == b else 0
        if op == 1:
            return 1 if a != b else 0
        if (a | b) & 1:
            self.err_rule = r; self.err_code = ERR_ARITH
            return -1
        if op == 2:
            return 1 if a < b else 0
        if op == 3:
            return 1 if a <= b else 0
        if op == 4:
            return 1 if a > b else 0
        return 1 if a >= b else 0

    # --- one positive closure ----------------------------------------------

    cdef bint _closure(self, bint lower):
        cdef int F = self.F
        memset(self.pert, 0, F)
        memset(self.is_multi, 0, F)
        memset(self.queued, 0, F)
        memset(self.dead, 0, self.R)
        cdef int i
        for i in range(F):
            self.caused[i] = NOVAL
        self.multi = {}
        self.falsum_rule = -1
        self.lower = lower
        self.err_rule = -1
        self.err_code = 0

        cdef int qhead = 0
        self._qtail = 0
        cdef int r, f
        for r in range(self.R):
            self._try_rule(r)
            if self.err_rule >= 0:
                return False
        while qhead < self._qtail:
            f = self.queue[qhead]
            qhead += 1
            self.queued[f] = 0
            for i in range(self.dep_off[f], self.dep_off[f + 1]):
                self._try_rule(self.dep_rule[i])
                if self.err_rule >= 0:
                    return False
        return True

    cdef void _try_rule(self, int r):
        if self.dead[r]:
            return
        cdef int off = self.lit_off[r]
        cdef int end = off + self.lit_cnt[r]
        cdef int li, kind, truth
        for li in range(off, end):
            kind = self.lit_kind[li]
            if kind == K_PERT_ACT:
                if self.performed[self.lit_a[li]]:
                    continue
                self.dead[r] = 1
                return
            elif kind == K_NPERT_ACT:
                if not self.performed[self.lit_a[li]]:
                    continue
                self.dead[r] = 1
                return
            elif kind == K_PERT_FLU:
                if self.pert[self.lit_a[li]]:
                    continue
                return
            elif kind == K_NPERT_FLU:
                if self.npert[self.lit_a[li]]:
                    continue
                self.dead[r] = 1
                return
            else:
                truth = self._eval_cmp(li, r)
                if truth == T_ABORT:
                    if self.lower:
                        return  # err_rule is set; closure aborts
                    self.err_rule = -1
                    self.dead[r] = 1
                    return
                if truth == T_TRUE:
                    continue
                if truth == T_DEAD:
                    self.dead[r] = 1
                return

        cdef int fid = self.head_fid[r]
        if fid < 0:
            if self.falsum_rule < 0 or r < self.falsum_rule:
                self.falsum_rule = r
            self.dead[r] = 1
            return
        cdef int eid = self.head_expr[r]
        cdef long long v = self._eval_expr(eid)
        if v == MULTI_V:
            vs = self._eval_expr_set(eid)
            if vs is None:
                self._head_error(r, fid, ERR_ARITH)
                return
            for pv in vs:
                self._add_caused(r, fid, pv)
                if self.err_rule >= 0 and self.lower:
                    return
        elif v == ERR_V:
            self._head_error(r, fid, ERR_ARITH)
            return
        elif v == UNDEF_V:
            return  # undefined head value: the rule does not fire
        else:
            self._add_caused(r, fid, v)
            if self.err_rule >= 0 and self.lower:
                return
        if not self.head_has_flu[r]:
            self.dead[r] = 1

    cdef void _head_error(self, int r, int fid, int code):
        if self.lower:
            self.err_rule = r
            self.err_code = code
        else:
            self._mark_pert(fid)
            self.dead[r] = 1

    cdef bint _in_codomain(self, int fid, long long v):
        cdef int lo = self.cod_off[fid]
        cdef int hi = self.cod_off[fid + 1] - 1
        cdef int mid
        while lo <= hi:
            mid = (lo + hi) >> 1
            if self.cod_vals[mid] == v:
                return True
            if self.cod_vals[mid] < v:
                lo = mid + 1
            else:
                hi = mid - 1
        return False

    cdef void _add_caused(self, int r, int fid, long long v):
        if not self._in_codomain(fid, v):
            self._head_error(r, fid, ERR_CODOMAIN)
            return
        cdef bint changed = False
        cdef long long c = self.caused[fid]
        if c == NOVAL:
            self.caused[fid] = v
            changed = True
        elif v != c:
            extra = self.multi.setdefault(fid, [])
            if v not in extra:
                extra.append(v)
                self.is_multi[fid] = 1
                changed = True
        if not self.pert[fid]:
            self.pert[fid] = 1
            changed = True
        if changed and not self.queued[fid]:
            self.queued[fid] = 1
            self.queue[self._qtail] = fid
            self._qtail += 1

    cdef void _mark_pert(self, int fid):
        if not self.pert[fid]:
            self.pert[fid] = 1
            if not self.queued[fid]:
                self.queued[fid] = 1
                self.queue[self._qtail] = fid
                self._qtail += 1

    # --- the transition -----------------------------------------------------

    def transition(self, prev_vals, performed, act_vals):
        """Same contract as the pure-Python kernel."""
        cdef int F = self.F
        cdef int A = self.A
        cdef int i, f, rounds
        for i in range(F):
            self.prev_vals[i] = prev_vals[i]
        for i in range(A):
            self.performed[i] = 1 if performed[i] else 0
            self.act_vals[i] = act_vals[i]

        cdef bint ok
        cdef bint converged
        cdef int l_falsum = -1

        if not self.has_flu_deps:
            memset(self.npert, 0, F)
            ok = self._closure(True)
            if not ok:
                return ("eval_error", self.err_rule, self.err_code)
            for i in range(F):
                self.l_pert[i] = self.pert[i]
                self.l_caused[i] = self.caused[i]
                self.upper[i] = self.pert[i]
            self.l_multi = self.multi
            l_falsum = self.falsum_rule
        else:
            for i in range(F):
                self.upper[i] = 1
            converged = False
            for rounds in range(F + 2):
                for i in range(F):
                    self.npert[i] = 0 if self.upper[i] else 1
                ok = self._closure(True)
                if not ok:
                    return ("eval_error", self.err_rule, self.err_code)
                for i in range(F):
                    self.l_pert[i] = self.pert[i]
                    self.l_caused[i] = self.caused[i]
                    self.npert[i] = 0 if self.pert[i] else 1
                self.l_multi = self.multi
                l_falsum = self.falsum_rule
                self._closure(False)  # upper closures cannot abort
                converged = True
                for i in range(F):
                    if (1 if self.pert[i] else 0) != self.upper[i]:
                        converged = False
                        break
                if converged:
                    break
                for i in range(F):
                    self.upper[i] = self.pert[i]
            if not converged:
                raise AssertionError("alternating fixpoint did not converge")
            for i in range(F):
                self.upper[i] = self.pert[i]

        undefined = [f for f in range(F) if self.upper[f] and not self.l_pert[f]]
        if undefined:
            return ("undefined", undefined)
        if self.l_multi:
            fid = min(self.l_multi)
            return ("inconsistent", fid, self.l_caused[fid], self.l_multi[fid][0])
        if l_falsum >= 0:
            return ("rejected", l_falsum)
        next_vals = [
            self.l_caused[f] if self.l_pert[f] else self.prev_vals[f]
            for f in range(F)
        ]
        pert_fids = [f for f in range(F) if self.l_pert[f]]
        return ("accepted", next_vals, pert_fids)
