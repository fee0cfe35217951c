"""Conic subproblem representation and solver backends.

The beamformer designs in this package all reduce to small second-order
cone programs over complex beam vectors plus a few real scalars. This
module owns that reduction: a ConicSubproblem collects constraints in
their natural form, tagged by origin and by cone kind, and a backend
lowers them to a solver.

Two backends are provided. ClarabelBackend assembles the cone matrices
directly and calls the native solver, which keeps per-solve overhead in
the tens of microseconds and makes large Monte Carlo sweeps practical.
CvxpyBackend routes the same subproblem through cvxpy with a different
lowering of the geometric-mean constraints; it exists as an independent
path for cross-checking, not for speed.

Conventions: a complex inner product written c^H w contributes
Re(c)^T Re(w) + Im(c)^T Im(w) and Re(c)^T Im(w) - Im(c)^T Re(w) to the
real embedding. Geometric-mean bounds r^c <= y are decomposed into
rotated second-order cones over a power-of-two padded binary tree,
using that u^2 <= a b with a, b >= 0 is ||(a - b, 2u)|| <= a + b.
"""

from dataclasses import dataclass, field
from math import ceil, log2, sqrt

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, SolverFailure


@dataclass
class AffineExpr:
    """Real affine expression: const + sum(scalar coefs) + sum 2 Re(g^H w)."""

    const: float = 0.0
    scalars: dict = field(default_factory=dict)
    beams: dict = field(default_factory=dict)  # beam key -> complex gradient g

    def add_scalar(self, name, coef):
        self.scalars[name] = self.scalars.get(name, 0.0) + coef
        return self

    def add_beam_grad(self, key, g):
        if key in self.beams:
            self.beams[key] = self.beams[key] + g
        else:
            self.beams[key] = np.asarray(g, dtype=complex)
        return self

    def evaluate(self, beams, scalars):
        val = self.const
        for name, c in self.scalars.items():
            val += c * scalars[name]
        for key, g in self.beams.items():
            val += 2.0 * float(np.real(np.vdot(g, beams[key])))
        return val


@dataclass
class Constraint:
    kind: str  # 'linear' | 'soc' | 'geomean' | 'zero'
    tag: str   # origin: 'mac', 'sinr', 'power', 'zf', 'phase', 'snr-floor', ...
    data: dict


@dataclass
class ConicSubproblem:
    """Max of one scalar (or pure feasibility) under tagged conic constraints."""

    beam_keys: list
    L: int
    scalars: list = field(default_factory=list)          # (name, nonneg flag)
    constraints: list = field(default_factory=list)
    objective: str | None = None                          # scalar to maximize

    def add_scalar(self, name, nonneg=True):
        self.scalars.append((name, nonneg))
        return name

    def linear_leq(self, expr: AffineExpr, tag):
        """expr <= 0"""
        self.constraints.append(Constraint("linear", tag, {"expr": expr}))

    def power_budget(self, budget: float, tag="power"):
        """sum over all beams of ||w||^2 <= budget"""
        if budget <= 0:
            raise ParameterError("power budget must be positive")
        self.constraints.append(Constraint("soc", tag, {"power": float(budget)}))

    def quad_leq_affine(self, terms, noise: float, rhs: AffineExpr, tag):
        """noise + sum |c_i^H w_{key_i}|^2 <= rhs for terms = [(c_i, key_i)]"""
        self.constraints.append(
            Constraint("soc", tag, {"terms": terms, "noise": float(noise), "rhs": rhs})
        )

    def geomean_leq(self, scalar: str, power: int, sum_scalars, offset: float, tag):
        """scalar^power <= offset + sum of the listed scalars"""
        if power < 1:
            raise ParameterError("geometric-mean power must be at least 1")
        kind = "linear" if power == 1 else "geomean"
        self.constraints.append(
            Constraint(kind, tag,
                       {"scalar": scalar, "power": power,
                        "sum": list(sum_scalars), "offset": float(offset)})
        )

    def norm_leq_re(self, terms, consts, rhs_vec, rhs_key, tag):
        """||(c_i^H w_i ..., consts ...)|| <= Re(rhs_vec^H w_rhs)"""
        self.constraints.append(
            Constraint("soc", tag,
                       {"terms": terms, "consts": list(consts),
                        "rhs_vec": np.asarray(rhs_vec, dtype=complex), "rhs_key": rhs_key})
        )

    def complex_zero(self, vec, key, tag="zf"):
        """vec^H w_key == 0"""
        self.constraints.append(
            Constraint("zero", tag, {"vec": np.asarray(vec, dtype=complex), "key": key})
        )

    def imag_zero(self, vec, key, tag="phase"):
        """Im(vec^H w_key) == 0"""
        self.constraints.append(
            Constraint("zero", tag, {"vec": np.asarray(vec, dtype=complex), "key": key,
                                     "imag_only": True})
        )

    def fix_scalar(self, name, value, tag="fix"):
        self.constraints.append(Constraint("zero", tag, {"scalar": name, "value": float(value)}))

    def count(self, tag=None, kind=None):
        return sum(
            1 for c in self.constraints
            if (tag is None or c.tag == tag) and (kind is None or c.kind == kind)
        )


@dataclass
class SubproblemSolution:
    status: str           # 'optimal' | 'infeasible' | 'unbounded' | 'failed'
    beams: dict | None
    scalars: dict | None
    objective: float | None
    solve_time: float = 0.0

    @property
    def ok(self):
        return self.status == "optimal"


class SolverBackend:
    """Interface for lowering and solving a ConicSubproblem."""

    supports_geomean = False
    name = "abstract"

    def solve(self, problem: ConicSubproblem) -> SubproblemSolution:
        raise NotImplementedError


class ClarabelBackend(SolverBackend):
    """Direct assembly of the cone program for the Clarabel solver."""

    supports_geomean = True
    name = "clarabel"

    def __init__(self, tol=1e-9, max_iter=200):
        self.tol = tol
        self.max_iter = max_iter

    def solve(self, problem: ConicSubproblem) -> SubproblemSolution:
        import clarabel

        asm = _Assembly(problem)
        for con in problem.constraints:
            asm.lower(con)
        A, b, cones = asm.finish(clarabel)
        n = asm.nvars
        q = np.zeros(n)
        if problem.objective is not None:
            q[asm.scalar_col[problem.objective]] = -1.0
        P = sp.csc_matrix((n, n))
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.max_iter = self.max_iter
        settings.tol_gap_abs = self.tol
        settings.tol_gap_rel = self.tol
        settings.tol_feas = self.tol
        solver = clarabel.DefaultSolver(P, q, A, b, cones, settings)
        sol = solver.solve()
        status = _clarabel_status(clarabel, sol.status)
        if status != "optimal":
            return SubproblemSolution(status=status, beams=None, scalars=None,
                                      objective=None, solve_time=sol.solve_time)
        x = np.asarray(sol.x)
        beams = {}
        for key in problem.beam_keys:
            off = asm.beam_off[key]
            beams[key] = x[off:off + problem.L] + 1j * x[off + problem.L:off + 2 * problem.L]
        scalars = {name: float(x[asm.scalar_col[name]]) for name, _ in problem.scalars}
        obj = scalars[problem.objective] if problem.objective is not None else 0.0
        return SubproblemSolution(status="optimal", beams=beams, scalars=scalars,
                                  objective=obj, solve_time=sol.solve_time)


def _clarabel_status(clarabel, status):
    S = clarabel.SolverStatus
    if status == S.Solved:
        return "optimal"
    if status == S.AlmostSolved:
        return "optimal"
    if status in (S.PrimalInfeasible, S.AlmostPrimalInfeasible):
        return "infeasible"
    if status in (S.DualInfeasible, S.AlmostDualInfeasible):
        return "unbounded"
    return "failed"


class _Assembly:
    """Accumulates rows of s = b - A x split by cone family.

    Zero-cone rows come first, then the nonnegative block, then the
    second-order cone blocks in emission order, which is the layout
    Clarabel expects.
    """

    def __init__(self, problem: ConicSubproblem):
        self.problem = problem
        self.L = problem.L
        self.beam_off = {}
        off = 0
        for key in problem.beam_keys:
            self.beam_off[key] = off
            off += 2 * problem.L
        self.scalar_col = {}
        for name, _ in problem.scalars:
            self.scalar_col[name] = off
            off += 1
        self.nvars_base = off
        self.nvars = off
        self.zero_rows = []     # (coeffs dict col->val, b)
        self.nonneg_rows = []
        self.soc_blocks = []    # list of row lists
        for name, nonneg in problem.scalars:
            if nonneg:
                self.nonneg_rows.append(({self.scalar_col[name]: -1.0}, 0.0))

    def new_aux(self, nonneg=True):
        col = self.nvars
        self.nvars += 1
        if nonneg:
            self.nonneg_rows.append(({col: -1.0}, 0.0))
        return col

    # ---- affine helpers -------------------------------------------------

    def _re_inner(self, g, key, scale=1.0):
        """coeffs of scale * Re(g^H w_key)"""
        off = self.beam_off[key]
        out = {}
        gr, gi = np.real(g), np.imag(g)
        for i in range(self.L):
            if gr[i] != 0.0:
                out[off + i] = scale * gr[i]
            if gi[i] != 0.0:
                out[off + self.L + i] = scale * gi[i]
        return out

    def _im_inner(self, g, key, scale=1.0):
        """coeffs of scale * Im(g^H w_key)"""
        off = self.beam_off[key]
        out = {}
        gr, gi = np.real(g), np.imag(g)
        for i in range(self.L):
            if gr[i] != 0.0:
                out[off + self.L + i] = scale * gr[i]
            if gi[i] != 0.0:
                out[off + i] = -scale * gi[i]
        return out

    def _affine(self, expr: AffineExpr):
        """(coeffs, const) of a real affine expression"""
        coeffs = {}
        for name, c in expr.scalars.items():
            col = self.scalar_col[name]
            coeffs[col] = coeffs.get(col, 0.0) + c
        for key, g in expr.beams.items():
            for col, v in self._re_inner(g, key, 2.0).items():
                coeffs[col] = coeffs.get(col, 0.0) + v
        return coeffs, expr.const

    @staticmethod
    def _negate(coeffs):
        return {c: -v for c, v in coeffs.items()}

    # ---- constraint lowerings -------------------------------------------

    def lower(self, con: Constraint):
        d = con.data
        if con.kind == "linear":
            if "expr" in d:
                coeffs, const = self._affine(d["expr"])
                self.nonneg_rows.append((coeffs, -const))
            else:
                # scalar^1 <= offset + sum: scalar - sum <= offset
                coeffs = {self.scalar_col[d["scalar"]]: 1.0}
                for s in d["sum"]:
                    col = self.scalar_col[s]
                    coeffs[col] = coeffs.get(col, 0.0) - 1.0
                self.nonneg_rows.append((coeffs, d["offset"]))
        elif con.kind == "zero":
            if "scalar" in d:
                self.zero_rows.append(({self.scalar_col[d["scalar"]]: 1.0}, d["value"]))
            elif d.get("imag_only"):
                self.zero_rows.append((self._im_inner(d["vec"], d["key"]), 0.0))
            else:
                self.zero_rows.append((self._re_inner(d["vec"], d["key"]), 0.0))
                self.zero_rows.append((self._im_inner(d["vec"], d["key"]), 0.0))
        elif con.kind == "geomean":
            self._lower_geomean(d)
        elif con.kind == "soc":
            if "power" in d:
                rows = [({}, sqrt(d["power"]))]
                for key in self.problem.beam_keys:
                    off = self.beam_off[key]
                    for i in range(2 * self.L):
                        rows.append(({off + i: -1.0}, 0.0))
                self.soc_blocks.append(rows)
            elif "rhs_vec" in d:
                rows = [(self._negate(self._re_inner(d["rhs_vec"], d["rhs_key"])), 0.0)]
                for c, key in d["terms"]:
                    rows.append((self._negate(self._re_inner(c, key)), 0.0))
                    rows.append((self._negate(self._im_inner(c, key)), 0.0))
                for v in d["consts"]:
                    rows.append(({}, float(v)))
                self.soc_blocks.append(rows)
            else:
                # noise + sum |c^H w|^2 <= rhs as ||(2u, z - 1)|| <= z + 1
                # with z = rhs - noise
                zc, z0 = self._affine(d["rhs"])
                z0 -= d["noise"]
                rows = [(self._negate(zc), z0 + 1.0)]
                for c, key in d["terms"]:
                    rows.append((self._negate(self._re_inner(c, key, 2.0)), 0.0))
                    rows.append((self._negate(self._im_inner(c, key, 2.0)), 0.0))
                rows.append((self._negate(zc), z0 - 1.0))
                self.soc_blocks.append(rows)
        else:
            raise ParameterError(f"unknown constraint kind {con.kind}")

    def _lower_geomean(self, d):
        """rtil^c <= y via a power-of-two padded tree of rotated cones."""
        c, rtil = d["power"], d["scalar"]
        y_coeffs = {}
        for s in d["sum"]:
            col = self.scalar_col[s]
            y_coeffs[col] = y_coeffs.get(col, 0.0) + 1.0
        y = ("affine", y_coeffs, d["offset"])
        one = ("const", 1.0)
        rt = ("var", self.scalar_col[rtil])
        m = 1 << ceil(log2(c))
        leaves = [y] + [one] * (c - 1) + [rt] * (m - c)

        def as_affine(node):
            if node[0] == "affine":
                return node[1], node[2]
            if node[0] == "const":
                return {}, node[1]
            return {node[1]: 1.0}, 0.0

        def pair(a, b):
            if a[0] == "const" and b[0] == "const":
                return ("const", sqrt(a[1] * b[1]))
            if a == b and a[0] == "var":
                return a
            ca, k0a = as_affine(a)
            cb, k0b = as_affine(b)
            u = self.new_aux()
            # u^2 <= a b  <=>  ||(a - b, 2u)|| <= a + b
            plus = dict(ca)
            for col, v in cb.items():
                plus[col] = plus.get(col, 0.0) + v
            minus = dict(ca)
            for col, v in cb.items():
                minus[col] = minus.get(col, 0.0) - v
            rows = [
                (self._negate(plus), k0a + k0b),
                (self._negate(minus), k0a - k0b),
                ({u: -2.0}, 0.0),
            ]
            self.soc_blocks.append(rows)
            return ("var", u)

        while len(leaves) > 2:
            leaves = [pair(leaves[i], leaves[i + 1]) for i in range(0, len(leaves), 2)]
        # root: rtil^2 <= leaf_a * leaf_b
        ca, k0a = as_affine(leaves[0])
        cb, k0b = as_affine(leaves[1])
        plus = dict(ca)
        for col, v in cb.items():
            plus[col] = plus.get(col, 0.0) + v
        minus = dict(ca)
        for col, v in cb.items():
            minus[col] = minus.get(col, 0.0) - v
        rows = [
            (self._negate(plus), k0a + k0b),
            (self._negate(minus), k0a - k0b),
            ({self.scalar_col[rtil]: -2.0}, 0.0),
        ]
        self.soc_blocks.append(rows)

    # ---- final matrices ---------------------------------------------------

    def finish(self, clarabel):
        rows, cols, data, bvals = [], [], [], []
        cones = []
        r = 0
        for coeffs, bv in self.zero_rows:
            for col, v in coeffs.items():
                rows.append(r); cols.append(col); data.append(v)
            bvals.append(bv)
            r += 1
        if self.zero_rows:
            cones.append(clarabel.ZeroConeT(len(self.zero_rows)))
        for coeffs, bv in self.nonneg_rows:
            for col, v in coeffs.items():
                rows.append(r); cols.append(col); data.append(v)
            bvals.append(bv)
            r += 1
        if self.nonneg_rows:
            cones.append(clarabel.NonnegativeConeT(len(self.nonneg_rows)))
        for block in self.soc_blocks:
            for coeffs, bv in block:
                for col, v in coeffs.items():
                    rows.append(r); cols.append(col); data.append(v)
                bvals.append(bv)
                r += 1
            cones.append(clarabel.SecondOrderConeT(len(block)))
        A = sp.csc_matrix((data, (rows, cols)), shape=(r, self.nvars))
        return A, np.array(bvals), cones


class CvxpyBackend(SolverBackend):
    """Independent lowering through cvxpy, used to cross-check the direct path."""

    supports_geomean = True
    name = "cvxpy"

    def __init__(self, solver=None):
        self.solver = solver

    def solve(self, problem: ConicSubproblem) -> SubproblemSolution:
        import cvxpy as cp

        w = {key: cp.Variable(problem.L, complex=True) for key in problem.beam_keys}
        sc = {name: cp.Variable(nonneg=nonneg) for name, nonneg in problem.scalars}

        def affine(expr: AffineExpr):
            out = expr.const
            for name, c in expr.scalars.items():
                out = out + c * sc[name]
            for key, g in expr.beams.items():
                out = out + 2.0 * cp.real(np.conj(g) @ w[key])
            return out

        cons = []
        for con in problem.constraints:
            d = con.data
            if con.kind == "linear":
                if "expr" in d:
                    cons.append(affine(d["expr"]) <= 0)
                else:
                    cons.append(sc[d["scalar"]] <= d["offset"] + sum(sc[s] for s in d["sum"]))
            elif con.kind == "geomean":
                y = d["offset"] + sum(sc[s] for s in d["sum"])
                cons.append(cp.power(sc[d["scalar"]], d["power"]) <= y)
            elif con.kind == "zero":
                if "scalar" in d:
                    cons.append(sc[d["scalar"]] == d["value"])
                elif d.get("imag_only"):
                    cons.append(cp.imag(np.conj(d["vec"]) @ w[d["key"]]) == 0)
                else:
                    cons.append(np.conj(d["vec"]) @ w[d["key"]] == 0)
            elif con.kind == "soc":
                if "power" in d:
                    stack = cp.hstack([w[key] for key in problem.beam_keys])
                    cons.append(cp.sum_squares(stack) <= d["power"])
                elif "rhs_vec" in d:
                    parts = [cp.reshape(np.conj(c) @ w[key], (1,), order="C")
                             for c, key in d["terms"]]
                    parts += [cp.Constant(np.array([v])) for v in d["consts"]]
                    lhs = cp.norm(cp.hstack(parts), 2)
                    cons.append(lhs <= cp.real(np.conj(d["rhs_vec"]) @ w[d["rhs_key"]]))
                else:
                    quad = d["noise"]
                    if d["terms"]:
                        stack = cp.hstack(
                            [cp.reshape(np.conj(c) @ w[key], (1,), order="C")
                             for c, key in d["terms"]]
                        )
                        quad = quad + cp.sum_squares(stack)
                    cons.append(quad <= affine(d["rhs"]))
        if problem.objective is not None:
            obj = cp.Maximize(sc[problem.objective])
        else:
            obj = cp.Minimize(0)
        prob = cp.Problem(obj, cons)
        try:
            prob.solve(solver=self.solver or cp.CLARABEL)
        except cp.error.SolverError as exc:
            raise SolverFailure(str(exc)) from exc
        if prob.status in ("optimal", "optimal_inaccurate"):
            beams = {key: np.asarray(w[key].value) for key in problem.beam_keys}
            scalars = {name: float(sc[name].value) for name, _ in problem.scalars}
            objective = scalars[problem.objective] if problem.objective is not None else 0.0
            return SubproblemSolution(status="optimal", beams=beams, scalars=scalars,
                                      objective=objective)
        if prob.status in ("infeasible", "infeasible_inaccurate"):
            return SubproblemSolution(status="infeasible", beams=None, scalars=None,
                                      objective=None)
        if prob.status in ("unbounded", "unbounded_inaccurate"):
            return SubproblemSolution(status="unbounded", beams=None, scalars=None,
                                      objective=None)
        return SubproblemSolution(status="failed", beams=None, scalars=None, objective=None)


def solve_maxmin(problem: ConicSubproblem, backend: SolverBackend,
                 mode: str = "direct", hi: float = None,
                 tol: float = 1e-10) -> SubproblemSolution:
    """Solve a subproblem whose objective scalar enters geometric-mean bounds.

    Direct mode hands the whole problem to the backend. Bisection mode
    never relies on geometric-mean support: it fixes the objective
    scalar, solves a pure feasibility cone program per step, and binary
    searches the largest feasible value. Both return the same solution
    up to tolerance; bisection is the fallback for backends without
    geometric-mean cones and a useful cross-check on those with.
    """
    if problem.objective is None:
        raise ParameterError("solve_maxmin needs an objective scalar")
    if mode == "direct":
        if not backend.supports_geomean:
            raise ParameterError(f"backend {backend.name} cannot solve geomean directly")
        return backend.solve(problem)
    if mode != "bisection":
        raise ParameterError(f"unknown solve mode {mode}")
    if hi is None:
        raise ParameterError("bisection mode needs an upper bound hi")
    lo = 0.0
    best = None
    name = problem.objective

    def feasibility_at(value):
        """Same constraint set with the objective scalar pinned to a value.

        Geometric-mean bounds on the pinned scalar collapse to linear
        rows, so each step is a plain SOC feasibility program.
        """
        feas = ConicSubproblem(beam_keys=problem.beam_keys, L=problem.L,
                               scalars=list(problem.scalars), objective=None)
        for con in problem.constraints:
            d = con.data
            if con.kind in ("geomean", "linear") and d.get("scalar") == name:
                need = value ** d["power"] - d["offset"]
                expr = AffineExpr(const=need)
                for s in d["sum"]:
                    expr.add_scalar(s, -1.0)
                feas.linear_leq(expr, con.tag)
            else:
                feas.constraints.append(con)
        feas.fix_scalar(name, value)
        return feas

    for _ in range(200):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        sol = backend.solve(feasibility_at(mid))
        if sol.ok:
            lo = mid
            best = sol
        else:
            hi = mid
    if best is None:
        return SubproblemSolution(status="infeasible", beams=None, scalars=None, objective=None)
    scalars = dict(best.scalars)
    scalars[name] = lo
    return SubproblemSolution(status="optimal", beams=best.beams, scalars=scalars,
                              objective=lo, solve_time=best.solve_time)
