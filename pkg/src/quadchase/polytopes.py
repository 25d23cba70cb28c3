"""H-representation polytopes and the set operations the planner needs.

Everything here works on ``{x : A x <= b}``. Support functions, Chebyshev
balls and emptiness checks go through scipy's HiGHS LP; variable elimination
is Fourier-Motzkin with LP-based redundancy pruning, which stays tractable
because every projection in this project happens on a 2- to 5-dimensional
sub-system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog


class EmptyPolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class Polytope:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError("row count mismatch between A and b")
        if A.shape[0] and np.any(np.all(A == 0.0, axis=1)):
            raise ValueError("polytope has an all-zero row")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def nrows(self) -> int:
        return self.A.shape[0]

    @staticmethod
    def box(lower, upper) -> "Polytope":
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        if np.any(lower > upper):
            raise ValueError("box lower bound exceeds upper bound")
        n = lower.size
        eye = np.eye(n)
        return Polytope(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float).reshape(self.dim)
        return bool(np.all(self.A @ x <= self.b + tol))

    def violation(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(self.dim)
        return float(np.max(self.A @ x - self.b, initial=0.0))

    def intersect(self, other: "Polytope") -> "Polytope":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch in intersection")
        return Polytope(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]))

    def support(self, d) -> float:
        """max d.x over the polytope (+inf when unbounded in that direction)."""
        d = np.asarray(d, dtype=float).reshape(self.dim)
        res = linprog(-d, A_ub=self.A, b_ub=self.b,
                      bounds=[(None, None)] * self.dim, method="highs")
        if res.status == 3:
            return float("inf")
        if not res.success:
            raise EmptyPolytopeError(f"support LP failed: {res.message}")
        return float(-res.fun)

    def interval(self, d):
        """[min, max] of d.x over the polytope."""
        return -self.support(-np.asarray(d, dtype=float)), self.support(d)

    def chebyshev(self):
        """(center, radius) of the largest inscribed ball; raises when empty."""
        norms = np.linalg.norm(self.A, axis=1)
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        A_ub = np.column_stack([self.A, norms])
        res = linprog(c, A_ub=A_ub, b_ub=self.b,
                      bounds=[(None, None)] * self.dim + [(0, None)], method="highs")
        if not res.success or res.x[-1] < 0:
            raise EmptyPolytopeError("polytope is empty (no Chebyshev ball)")
        return res.x[:self.dim], float(res.x[-1])

    def is_empty(self, tol: float = 1e-9) -> bool:
        try:
            _, r = self.chebyshev()
        except EmptyPolytopeError:
            return True
        return r < -tol

    def slice_coords(self, idx) -> "Polytope":
        """Projection onto the given coordinates, eliminating the rest."""
        idx = list(idx)
        drop = [j for j in range(self.dim) if j not in idx]
        # move kept coordinates first, then eliminate the tail
        order = idx + drop
        P = Polytope(self.A[:, order], self.b)
        for _ in drop:
            P = P.eliminate_last()
        return P.pruned()

    def eliminate_last(self) -> "Polytope":
        """Fourier-Motzkin elimination of the last coordinate."""
        A, b = self.A, self.b
        col = A[:, -1]
        rest = A[:, :-1]
        pos = col > 1e-12
        neg = col < -1e-12
        zero = ~(pos | neg)

        rows = [rest[zero]]
        rhs = [b[zero]]
        if np.any(pos) and np.any(neg):
            # upper bounds from positive rows, lower bounds from negative rows
            up_A = rest[pos] / col[pos, None]
            up_b = b[pos] / col[pos]
            lo_A = rest[neg] / col[neg, None]
            lo_b = b[neg] / col[neg]
            comb_A = up_A[:, None, :] - lo_A[None, :, :]
            comb_b = up_b[:, None] - lo_b[None, :]
            rows.append(comb_A.reshape(-1, rest.shape[1]))
            rhs.append(comb_b.reshape(-1))
        A_new = np.vstack(rows)
        b_new = np.concatenate(rhs)
        keep = np.linalg.norm(A_new, axis=1) > 1e-12
        if not np.any(keep):
            # unbounded projection: fall back to a huge box so downstream
            # LPs stay well-posed
            n = rest.shape[1]
            return Polytope.box([-1e12] * n, [1e12] * n)
        return Polytope(A_new[keep], b_new[keep]).pruned()

    def pruned(self, tol: float = 1e-9) -> "Polytope":
        """Drop duplicate and LP-redundant rows."""
        A, b = self.A, self.b
        norms = np.linalg.norm(A, axis=1)
        A = A / norms[:, None]
        b = b / norms

        # dedupe (rounded row signatures)
        sig = np.round(np.column_stack([A, b]), 9)
        _, uniq = np.unique(sig, axis=0, return_index=True)
        order = np.sort(uniq)
        A, b = A[order], b[order]

        keep = np.ones(len(b), dtype=bool)
        for i in range(len(b)):
            others = keep.copy()
            others[i] = False
            if not np.any(others):
                continue
            res = linprog(-A[i], A_ub=A[others], b_ub=b[others] + tol,
                          bounds=[(None, None)] * self.dim, method="highs")
            if res.status == 3:
                continue  # unbounded without this row: it is essential
            if res.success and -res.fun <= b[i] + tol:
                keep[i] = False
        return Polytope(A[keep], b[keep])

    def sample(self, rng: np.random.Generator, n: int, burn: int = 50) -> np.ndarray:
        """Hit-and-run samples from the interior, seeded and deterministic."""
        x, r = self.chebyshev()
        if r <= 0:
            raise EmptyPolytopeError("cannot sample a lower-dimensional polytope")
        out = np.empty((n, self.dim))
        total = burn + n
        for k in range(total):
            d = rng.standard_normal(self.dim)
            d /= np.linalg.norm(d)
            # feasible step interval along x + t d
            Ad = self.A @ d
            slack = self.b - self.A @ x
            with np.errstate(divide="ignore"):
                ratios = slack / Ad
            t_hi = np.min(ratios[Ad > 1e-12], initial=1e12)
            t_lo = np.max(ratios[Ad < -1e-12], initial=-1e12)
            if t_hi <= t_lo:
                continue
            x = x + rng.uniform(t_lo, t_hi) * d
            if k >= burn:
                out[k - burn] = x
        return out

    def to_csv(self, path) -> None:
        data = np.column_stack([self.A, self.b])
        header = ",".join([f"a{i}" for i in range(self.dim)] + ["b"])
        np.savetxt(path, data, delimiter=",", header=header, comments="")

    @staticmethod
    def from_csv(path) -> "Polytope":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return Polytope(data[:, :-1], data[:, -1])


def inner_box(P: Polytope, center=None) -> Polytope:
    """A large axis box inside a polytope, centered at its Chebyshev center.

    Half-widths solve an LP: every row constrains the box corner in its own
    direction, ``a.c + sum_i |a_i| w_i <= b``. The objective weights each
    axis by the inverse of the polytope's support width so no coordinate
    starves when scales differ by orders of magnitude. Used to arrest facet
    growth in iterated reach computations while staying an
    under-approximation.
    """
    if center is None:
        center, _ = P.chebyshev()
    center = np.asarray(center, dtype=float).reshape(P.dim)
    widths = np.array([max(P.support(d) + P.support(-d), 1e-9)
                       for d in np.eye(P.dim)])
    res = linprog(-1.0 / widths, A_ub=np.abs(P.A), b_ub=P.b - P.A @ center,
                  bounds=[(0, None)] * P.dim, method="highs")
    if not res.success:
        raise EmptyPolytopeError("no inscribed box (center outside polytope?)")
    w = np.maximum(res.x, 1e-9)
    return Polytope.box(center - w, center + w)


def pre_set(target: Polytope, A: np.ndarray, B: np.ndarray, G: np.ndarray,
            U: Polytope, X: Polytope | None = None) -> Polytope:
    """One-step backward reachable set of ``target`` under x+ = A x + B u + G.

    Pre(S) = { x : exists u in U with A x + B u + G in S }, computed by
    stacking the lifted constraints over (x, u) and eliminating the inputs
    with Fourier-Motzkin. When ``X`` is given the result is intersected with
    it, yielding the constrained backward reachable step.
    """
    n = A.shape[0]
    m = B.shape[1]
    G = np.asarray(G, dtype=float).reshape(n)
    # target rows over (x, u): S_A A x + S_A B u <= S_b - S_A G
    lift_A = np.hstack([target.A @ A, target.A @ B])
    lift_b = target.b - target.A @ G
    # input rows over (x, u)
    u_rows = np.hstack([np.zeros((U.nrows, n)), U.A])
    P = Polytope(np.vstack([lift_A, u_rows]), np.concatenate([lift_b, U.b]))
    for _ in range(m):
        P = P.eliminate_last()
    if X is not None:
        P = P.intersect(X).pruned()
    return P


def backward_reachable(target: Polytope, A: np.ndarray, B: np.ndarray,
                       G: np.ndarray, U: Polytope, X: Polytope,
                       steps: int) -> Polytope:
    """N-step backward reachable set by iterating constrained Pre.

    Exact: every iterate keeps its full H-representation. Facet counts of
    reach sets grow quickly with the horizon, so this is for low-dimensional
    sub-systems and modest step counts; long-horizon feasible-start sets are
    certified directly instead (see the terminal-set module).
    """
    S = target
    for _ in range(steps):
        S = pre_set(S, A, B, G, U, X=X)
        if S.is_empty():
            raise EmptyPolytopeError("backward reachable set became empty")
    return S


def contains_polytope(outer: Polytope, inner: Polytope, tol: float = 1e-7) -> bool:
    """True when every point of ``inner`` satisfies ``outer`` (support LPs)."""
    for i in range(outer.nrows):
        if inner.support(outer.A[i]) > outer.b[i] + tol:
            return False
    return True
