"""Self-contained dense LP (simplex) and MILP (branch & bound) solvers.

The LP engine is a bounded-variable tableau simplex: variable bounds (possibly
infinite) are handled implicitly through nonbasic at-lower/at-upper states, so
only genuine equality/inequality rows enter the tableau.  Phase 1 drives
per-row artificial variables to zero; Dantzig pricing with a switch to Bland's
rule after a degenerate stall guarantees termination.  All tie-breaking is by
lowest index, so results are bit-for-bit reproducible.

Branch & bound re-solves child nodes in place: a branching step only changes a
bound, which preserves dual feasibility of the parent's optimal basis, so the
bounded dual simplex restores optimality in a few pivots instead of a cold
solve per node.  Node selection is best bound with depth-first dives until an
incumbent exists; branching picks the most fractional integer variable.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

INF = float("inf")

TOL_RC = 1e-9        # reduced-cost optimality tolerance
TOL_FEAS = 1e-9      # bound/row feasibility tolerance
TOL_PIV = 1e-10      # minimum acceptable pivot magnitude
TOL_INT = 1e-6       # integrality tolerance
STALL_LIMIT = 40     # degenerate pivots before switching to Bland's rule

_BASIC, _AT_LO, _AT_HI, _FREE = 0, 1, 2, 3


class LpError(RuntimeError):
    pass


@dataclass
class MixedIntegerProgram:
    """min c@x  s.t.  a_eq@x = b_eq,  a_ub@x <= b_ub,  lo <= x <= hi,
    x[integers] integral."""
    c: np.ndarray
    a_eq: sp.csr_matrix | None = None
    b_eq: np.ndarray | None = None
    a_ub: sp.csr_matrix | None = None
    b_ub: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    integers: tuple[int, ...] = ()
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.size
        if self.lo is None:
            self.lo = np.full(n, -INF)
        if self.hi is None:
            self.hi = np.full(n, INF)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        for name, a, b in (("a_eq", self.a_eq, self.b_eq), ("a_ub", self.a_ub, self.b_ub)):
            if (a is None) != (b is None):
                raise ValueError(f"{name} given without its right-hand side")
            if a is not None and a.shape[1] != n:
                raise ValueError(f"{name} has {a.shape[1]} columns, expected {n}")
        if self.lo.size != n or self.hi.size != n:
            raise ValueError("bounds length mismatch")
        if np.any(self.lo > self.hi + 1e-12):
            raise ValueError("lower bound exceeds upper bound")
        for j in self.integers:
            if not (np.isfinite(self.lo[j]) and np.isfinite(self.hi[j])):
                raise ValueError(f"integer variable {j} must have finite bounds")

    @property
    def n(self) -> int:
        return self.c.size

    def row_arrays(self) -> tuple[np.ndarray, np.ndarray, int]:
        """(dense stacked rows [eq; ub], rhs, number of eq rows)."""
        blocks, rhs, me = [], [], 0
        if self.a_eq is not None and self.a_eq.shape[0]:
            blocks.append(np.asarray(sp.csr_matrix(self.a_eq).todense()))
            rhs.append(np.asarray(self.b_eq, dtype=float))
            me = blocks[0].shape[0]
        if self.a_ub is not None and self.a_ub.shape[0]:
            blocks.append(np.asarray(sp.csr_matrix(self.a_ub).todense()))
            rhs.append(np.asarray(self.b_ub, dtype=float))
        if not blocks:
            return np.zeros((0, self.n)), np.zeros(0), 0
        return np.vstack(blocks), np.concatenate(rhs), me


@dataclass
class MipSolution:
    status: str                 # optimal | infeasible | unbounded | iteration-limit | node-limit
    x: np.ndarray | None
    objective: float | None
    iterations: int = 0
    nodes: int = 0
    gap: float = 0.0


@dataclass
class SolverOptions:
    max_iter: int = 200_000
    node_limit: int = 50_000
    gap: float = 1e-6           # absolute optimality gap for branch & bound
    dual_iter_limit: int = 5_000


class DenseSimplex:
    """Bounded-variable tableau simplex over  A x = b  with column bounds.

    Columns: [structural | slack (one per <= row) | artificial (one per row)].
    The tableau carries B^-1 A plus a right-hand-side column B^-1 b; reduced
    costs for phase 1 and phase 2 are maintained as extra rows.
    """

    def __init__(self, prog: MixedIntegerProgram):
        a, b, me = prog.row_arrays()
        m, n = a.shape
        mu = m - me
        self.n_struct = n
        self.m = m
        # column layout
        n_all = n + mu + m
        self.n_all = n_all
        self.slack0 = n
        self.art0 = n + mu
        cols = np.zeros((m, n_all))
        cols[:, :n] = a
        for k in range(mu):
            cols[me + k, n + k] = 1.0
        self.lo = np.concatenate([prog.lo, np.zeros(mu), np.zeros(m)])
        self.hi = np.concatenate([prog.hi, np.full(mu, INF), np.full(m, INF)])
        self.c2 = np.concatenate([prog.c, np.zeros(mu + m)])

        # nonbasic start: finite lower bound, else finite upper, else free at 0
        self.state = np.full(n_all, _AT_LO, dtype=np.int8)
        self.xval = np.zeros(n_all)
        for j in range(n + mu):
            if np.isfinite(self.lo[j]):
                self.state[j] = _AT_LO
                self.xval[j] = self.lo[j]
            elif np.isfinite(self.hi[j]):
                self.state[j] = _AT_HI
                self.xval[j] = self.hi[j]
            else:
                self.state[j] = _FREE
                self.xval[j] = 0.0

        resid = b - cols[:, :n + mu] @ self.xval[:n + mu]
        sign = np.where(resid >= 0.0, 1.0, -1.0)
        for i in range(m):
            cols[i, self.art0 + i] = sign[i]
        self.basis = np.arange(self.art0, self.art0 + m)
        self.state[self.basis] = _BASIC

        # tableau = B^-1 [A | b]; with B = diag(sign) that is a row scaling
        self.t = cols * sign[:, None]
        self.rhs = resid * sign
        self.xval[self.basis] = self.rhs

        c1 = np.zeros(n_all)
        c1[self.art0:] = 1.0
        self.d1 = c1 - self.t.sum(axis=0)  # c1 - 1^T B^-1 A (artificial basis costs 1)
        self.d1[self.basis] = 0.0
        self.d2 = self.c2.copy()
        self.phase1_done = False
        self.iterations = 0
        self._stall = 0
        self._bland = False

    # -- helpers -------------------------------------------------------------

    def _recompute_xb(self):
        nb = self.state != _BASIC
        vals = np.where(nb, self.xval, 0.0)
        vals[~np.isfinite(vals)] = 0.0
        xb = self.rhs - self.t @ vals
        self.xval[self.basis] = xb

    def _pivot(self, r: int, q: int, d_rows: list[np.ndarray]):
        piv = self.t[r, q]
        self.t[r] /= piv
        self.rhs[r] /= piv
        col = self.t[:, q].copy()
        col[r] = 0.0
        self.t -= np.outer(col, self.t[r])
        self.rhs -= col * self.rhs[r]
        for d in d_rows:
            dq = d[q]
            if dq != 0.0:
                d -= dq * self.t[r]
                d[q] = 0.0

    def _entering(self, d: np.ndarray) -> int:
        fixed = self.lo == self.hi
        lo_ok = (self.state == _AT_LO) & (d < -TOL_RC) & ~fixed
        hi_ok = (self.state == _AT_HI) & (d > TOL_RC) & ~fixed
        fr_ok = (self.state == _FREE) & (np.abs(d) > TOL_RC)
        ok = lo_ok | hi_ok | fr_ok
        if not ok.any():
            return -1
        idx = np.flatnonzero(ok)
        if self._bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(d[idx]))])

    def _primal_step(self, d: np.ndarray) -> str:
        q = self._entering(d)
        if q < 0:
            return "optimal"
        direction = 1.0 if self.state[q] in (_AT_LO, _FREE) else -1.0
        if self.state[q] == _FREE:
            direction = -np.sign(d[q]) or 1.0
        w = self.t[:, q]
        xb = self.xval[self.basis]
        delta = -direction * w  # d(xb)/dt
        lo_b = self.lo[self.basis]
        hi_b = self.hi[self.basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_lo = np.where(delta < -TOL_PIV, (xb - lo_b) / -delta, INF)
            t_hi = np.where(delta > TOL_PIV, (hi_b - xb) / delta, INF)
        t_rows = np.minimum(np.where(np.isfinite(lo_b), t_lo, INF),
                            np.where(np.isfinite(hi_b), t_hi, INF))
        t_rows = np.maximum(t_rows, 0.0)
        span = self.hi[q] - self.lo[q]
        t_best = t_rows.min(initial=INF)
        if span < t_best:
            # bound flip, no basis change
            self.xval[self.basis] = xb - direction * span * w
            self.xval[q] = self.hi[q] if self.state[q] == _AT_LO else self.lo[q]
            self.state[q] = _AT_HI if self.state[q] == _AT_LO else _AT_LO
            self.iterations += 1
            return "continue"
        if not np.isfinite(t_best):
            return "unbounded"
        ties = np.flatnonzero(t_rows <= t_best + 1e-12)
        if self._bland:
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(w[ties]))])
        if abs(w[r]) < TOL_PIV:
            # numerically void pivot: fall back to Bland choice among ties
            r = int(ties[np.argmax(np.abs(w[ties]))])
            if abs(w[r]) < TOL_PIV:
                raise LpError("no acceptable pivot (ill-conditioned problem)")
        leave = self.basis[r]
        leaves_at_lo = delta[r] < 0.0
        self.xval[self.basis] = xb - direction * t_best * w
        self.xval[leave] = lo_b[r] if leaves_at_lo else hi_b[r]
        self.state[leave] = _AT_LO if leaves_at_lo else _AT_HI
        newval = self.xval[q] + direction * t_best
        self._pivot(r, q, [self.d1, self.d2])
        self.basis[r] = q
        self.state[q] = _BASIC
        self.xval[q] = newval
        self.iterations += 1
        self._stall = self._stall + 1 if t_best <= 1e-12 else 0
        if self._stall > STALL_LIMIT:
            self._bland = True
        elif self._stall == 0:
            self._bland = False
        return "continue"

    def _run_primal(self, d: np.ndarray, max_iter: int) -> str:
        k = 0
        while True:
            if k % 64 == 0:
                self._recompute_xb()
            status = self._primal_step(d)
            if status != "continue":
                self._recompute_xb()
                return status
            k += 1
            if self.iterations >= max_iter:
                return "iteration-limit"

    # -- public API ----------------------------------------------------------

    def solve(self, max_iter: int) -> str:
        status = self._run_primal(self.d1, max_iter)
        if status == "iteration-limit":
            return status
        if status == "unbounded":
            raise LpError("phase 1 reported unbounded (numerical failure)")
        if self.phase1_objective() > 1e-7:
            return "infeasible"
        # pin all artificials at zero so they never re-enter
        self.lo[self.art0:] = 0.0
        self.hi[self.art0:] = 0.0
        self.xval[self.art0:][self.state[self.art0:] != _BASIC] = 0.0
        self.phase1_done = True
        self._bland = False
        self._stall = 0
        return self._run_primal(self.d2, max_iter)

    def phase1_objective(self) -> float:
        vals = self.xval[self.art0:]
        return float(np.abs(vals).sum())

    def objective(self) -> float:
        return float(self.c2 @ np.where(np.isfinite(self.xval), self.xval, 0.0))

    def x_struct(self) -> np.ndarray:
        return self.xval[:self.n_struct].copy()

    def set_bounds(self, col: int, lo: float, hi: float):
        """Change one structural variable's bounds (keeps the basis)."""
        self.lo[col] = lo
        self.hi[col] = hi
        if self.state[col] == _AT_LO:
            self.xval[col] = lo
        elif self.state[col] == _AT_HI:
            self.xval[col] = hi

    def reoptimize_dual(self, max_iter: int) -> str:
        """Restore optimality after bound changes via the bounded dual simplex."""
        self._recompute_xb()
        for _ in range(max_iter):
            xb = self.xval[self.basis]
            lo_b, hi_b = self.lo[self.basis], self.hi[self.basis]
            below = np.where(np.isfinite(lo_b), lo_b - xb, -INF)
            above = np.where(np.isfinite(hi_b), xb - hi_b, -INF)
            viol = np.maximum(below, above)
            r = int(np.argmax(viol))
            if viol[r] <= TOL_FEAS:
                return "optimal"
            want_increase = below[r] > above[r]  # basic value below its lower bound
            alpha = self.t[r]
            fixed = self.lo == self.hi
            if want_increase:
                lo_ok = (self.state == _AT_LO) & (alpha < -TOL_PIV) & ~fixed
                hi_ok = (self.state == _AT_HI) & (alpha > TOL_PIV) & ~fixed
                fr_ok = (self.state == _FREE) & (np.abs(alpha) > TOL_PIV)
            else:
                lo_ok = (self.state == _AT_LO) & (alpha > TOL_PIV) & ~fixed
                hi_ok = (self.state == _AT_HI) & (alpha < -TOL_PIV) & ~fixed
                fr_ok = (self.state == _FREE) & (np.abs(alpha) > TOL_PIV)
            ok = lo_ok | hi_ok | fr_ok
            if self.phase1_done:
                ok &= ~((np.arange(self.n_all) >= self.art0))
            if not ok.any():
                return "infeasible"
            idx = np.flatnonzero(ok)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.abs(self.d2[idx] / alpha[idx])
            q = int(idx[np.argmin(ratios)])
            leave = self.basis[r]
            self.state[leave] = _AT_LO if want_increase else _AT_HI
            self.xval[leave] = self.lo[leave] if want_increase else self.hi[leave]
            self._pivot(r, q, [self.d1, self.d2])
            self.basis[r] = q
            self.state[q] = _BASIC
            self.iterations += 1
            self._recompute_xb()
        return "iteration-limit"


def _status_from(engine_status: str) -> str:
    return engine_status


def solve_lp(prog: MixedIntegerProgram, options: SolverOptions | None = None) -> MipSolution:
    """Solve the continuous relaxation (the integer set is ignored)."""
    options = options or SolverOptions()
    eng = DenseSimplex(prog)
    status = eng.solve(options.max_iter)
    if status != "optimal":
        return MipSolution(status=_status_from(status), x=None, objective=None,
                           iterations=eng.iterations)
    return MipSolution(status="optimal", x=eng.x_struct(), objective=eng.objective(),
                       iterations=eng.iterations)


def check_feasibility(prog: MixedIntegerProgram, x: np.ndarray, tol: float = 1e-7) -> float:
    """Largest constraint/bound violation of x (tests lean on this)."""
    worst = 0.0
    if prog.a_eq is not None and prog.a_eq.shape[0]:
        worst = max(worst, float(np.abs(prog.a_eq @ x - prog.b_eq).max()))
    if prog.a_ub is not None and prog.a_ub.shape[0]:
        worst = max(worst, float(np.maximum(prog.a_ub @ x - prog.b_ub, 0.0).max()))
    worst = max(worst, float(np.maximum(prog.lo - x, 0.0).max(initial=0.0)))
    worst = max(worst, float(np.maximum(x - prog.hi, 0.0).max(initial=0.0)))
    return worst


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    lo: np.ndarray = field(compare=False)
    hi: np.ndarray = field(compare=False)


def solve_milp(prog: MixedIntegerProgram, options: SolverOptions | None = None,
               warm_int: np.ndarray | None = None) -> MipSolution:
    """Best-bound branch & bound on the fractional integer variables.

    ``warm_int``: optional integral values to try as an initial incumbent
    (bounds-fixed LP); ignored if infeasible.
    """
    options = options or SolverOptions()
    ints = np.array(sorted(prog.integers), dtype=int)
    if ints.size == 0:
        return solve_lp(prog, options)

    eng = DenseSimplex(prog)
    status = eng.solve(options.max_iter)
    if status != "optimal":
        return MipSolution(status=_status_from(status), x=None, objective=None,
                           iterations=eng.iterations)

    root_lo = prog.lo.copy()
    root_hi = prog.hi.copy()

    def apply_bounds(lo, hi) -> str:
        for j in ints:
            eng.set_bounds(int(j), lo[j], hi[j])
        return eng.reoptimize_dual(options.dual_iter_limit)

    incumbent_x = None
    incumbent_obj = INF
    nodes_evaluated = 1
    seq = 0

    def frac_mask(x):
        f = np.abs(x[ints] - np.round(x[ints]))
        return f

    # optional warm incumbent from caller-provided integer values
    if warm_int is not None:
        lo_w, hi_w = root_lo.copy(), root_hi.copy()
        lo_w[ints] = warm_int
        hi_w[ints] = warm_int
        if np.all(lo_w[ints] >= root_lo[ints] - 1e-9) and np.all(hi_w[ints] <= root_hi[ints] + 1e-9):
            st = apply_bounds(lo_w, hi_w)
            nodes_evaluated += 1
            if st == "optimal":
                incumbent_x = eng.x_struct()
                incumbent_obj = eng.objective()

    heap: list[_Node] = []
    root = _Node(bound=-INF, seq=seq, lo=root_lo, hi=root_hi)
    heapq.heappush(heap, root)
    dive: _Node | None = None
    last_status = "optimal"

    while heap or dive is not None:
        if nodes_evaluated >= options.node_limit:
            remaining = min((nd.bound for nd in heap), default=INF)
            if dive is not None:
                remaining = min(remaining, dive.bound)
            gap = max(0.0, incumbent_obj - remaining) if incumbent_x is not None else INF
            return MipSolution(status="node-limit",
                               x=incumbent_x, objective=incumbent_obj if incumbent_x is not None else None,
                               iterations=eng.iterations, nodes=nodes_evaluated, gap=gap)
        if dive is not None:
            node, dive = dive, None
        else:
            node = heapq.heappop(heap)
        if incumbent_x is not None and node.bound >= incumbent_obj - options.gap:
            continue
        st = apply_bounds(node.lo, node.hi)
        nodes_evaluated += 1
        if st == "infeasible":
            continue
        if st == "iteration-limit":
            # warm start failed to converge: cold solve this node
            sub = MixedIntegerProgram(c=prog.c, a_eq=prog.a_eq, b_eq=prog.b_eq,
                                      a_ub=prog.a_ub, b_ub=prog.b_ub,
                                      lo=node.lo, hi=node.hi, integers=prog.integers)
            eng = DenseSimplex(sub)
            st2 = eng.solve(options.max_iter)
            if st2 == "infeasible":
                continue
            if st2 != "optimal":
                last_status = st2
                break
        obj = eng.objective()
        if incumbent_x is not None and obj >= incumbent_obj - options.gap:
            continue
        x = eng.x_struct()
        fr = frac_mask(x)
        if fr.max(initial=0.0) <= TOL_INT:
            incumbent_x = x
            incumbent_obj = obj
            continue
        # branch on the most fractional integer variable (lowest index on ties)
        dist = np.minimum(fr, 1.0 - fr)
        j = int(ints[np.argmax(dist)])
        xj = x[j]
        floor_j = np.floor(xj)
        lo_l, hi_l = node.lo.copy(), node.hi.copy()
        hi_l[j] = floor_j
        lo_r, hi_r = node.lo.copy(), node.hi.copy()
        lo_r[j] = floor_j + 1.0
        seq += 1
        left = _Node(bound=obj, seq=seq, lo=lo_l, hi=hi_l)
        seq += 1
        right = _Node(bound=obj, seq=seq, lo=lo_r, hi=hi_r)
        # dive first into the child on the nearer-integer side until an incumbent exists
        first, second = (left, right) if (xj - floor_j) <= 0.5 else (right, left)
        if incumbent_x is None:
            dive = first
            heapq.heappush(heap, second)
        else:
            heapq.heappush(heap, first)
            heapq.heappush(heap, second)

    if last_status not in ("optimal",):
        return MipSolution(status=last_status, x=incumbent_x,
                           objective=incumbent_obj if incumbent_x is not None else None,
                           iterations=eng.iterations, nodes=nodes_evaluated, gap=INF)
    if incumbent_x is None:
        return MipSolution(status="infeasible", x=None, objective=None,
                           iterations=eng.iterations, nodes=nodes_evaluated)
    return MipSolution(status="optimal", x=incumbent_x, objective=incumbent_obj,
                       iterations=eng.iterations, nodes=nodes_evaluated, gap=0.0)


def dump_program(prog: MixedIntegerProgram, fp):
    """Plain-text tabular dump for external cross-checking.

    Format: one header line `vars <n> eq <me> ub <mu>`, then per-variable lines
    `var <idx> <name> <lo> <hi> <int|cont> obj <c>`, then per-row lines
    `eq|ub <idx> : <col>*x<idx> ... <=|=> <rhs>` listing nonzero coefficients.
    """
    me = prog.a_eq.shape[0] if prog.a_eq is not None else 0
    mu = prog.a_ub.shape[0] if prog.a_ub is not None else 0
    fp.write(f"vars {prog.n} eq {me} ub {mu}\n")
    names = prog.names or tuple(f"x{j}" for j in range(prog.n))
    intset = set(prog.integers)
    for j in range(prog.n):
        kind = "int" if j in intset else "cont"
        fp.write(f"var {j} {names[j]} {prog.lo[j]:.17g} {prog.hi[j]:.17g} "
                 f"{kind} obj {prog.c[j]:.17g}\n")

    def rows(tag, a, b):
        a = sp.csr_matrix(a)
        for i in range(a.shape[0]):
            sl = slice(a.indptr[i], a.indptr[i + 1])
            terms = " ".join(f"{v:.17g}*x{j}" for j, v in zip(a.indices[sl], a.data[sl]))
            op = "=" if tag == "eq" else "<="
            fp.write(f"{tag} {i}: {terms} {op} {b[i]:.17g}\n")

    if me:
        rows("eq", prog.a_eq, prog.b_eq)
    if mu:
        rows("ub", prog.a_ub, prog.b_ub)
