"""Convex box-constrained QP solver with equality duals.

Solves
    min  0.5 x' diag(p) x + q' x
    s.t. A x = b,   lb <= x <= ub

by operator splitting (ADMM) on the stacked constraint C = [A; I], after
Ruiz equilibration of the problem data, followed by an active-set polish
that solves the KKT system of the detected active constraints.  The
returned duals satisfy the stationarity convention

    diag(p) x + q + A' y_eq + y_bounds = 0,

so y_bounds is negative at a binding lower bound and positive at a binding
upper bound.  The solver is deterministic; equality dual accuracy is what
the dispatch layer's price extraction relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import Infeasible, IterationLimit

_SIGMA = 1e-6
_ALPHA = 1.6
_RHO_EQ_FACTOR = 1e3
_CHECK_EVERY = 25
_POLISH_DELTA = 1e-9
_RUIZ_ITERS = 10


@dataclass
class QpSolution:
    """Primal/dual solution with the worst KKT residual achieved."""

    x: np.ndarray
    y_eq: np.ndarray
    y_bounds: np.ndarray
    objective: float
    status: str
    kkt_residual: float
    iterations: int


def _kkt_residual(p_diag, q, a, b, lb, ub, x, y_eq, y_bounds) -> float:
    stat = p_diag * x + q + y_bounds
    if a.shape[0]:
        stat = stat + a.T @ y_eq
        r_eq = float(np.max(np.abs(a @ x - b)))
    else:
        r_eq = 0.0
    r_stat = float(np.max(np.abs(stat)))
    r_lb = float(np.max(np.maximum(lb - x, 0.0), initial=0.0))
    r_ub = float(np.max(np.maximum(x - ub, 0.0), initial=0.0))
    pos = np.maximum(y_bounds, 0.0)
    neg = np.maximum(-y_bounds, 0.0)
    gap_ub = np.where(np.isfinite(ub), np.abs(ub - x), np.inf)
    gap_lb = np.where(np.isfinite(lb), np.abs(x - lb), np.inf)
    comp_terms = np.concatenate([pos * np.where(pos > 0, gap_ub, 0.0), neg * np.where(neg > 0, gap_lb, 0.0)])
    r_comp = float(np.max(comp_terms, initial=0.0))
    return max(r_stat, r_eq, r_lb, r_ub, r_comp)


def problem_scale(q, b, lb, ub) -> float:
    finite = [np.abs(q).max(initial=0.0)]
    if b.size:
        finite.append(np.abs(b).max(initial=0.0))
    for bound in (lb, ub):
        vals = bound[np.isfinite(bound)]
        if vals.size:
            finite.append(np.abs(vals).max())
    return float(max(finite))


class AdmmQpSolver:
    """Reusable solver: scaling and KKT factorization depend only on the
    cost and equality data, so repeated solves with different bounds (the
    rolling-horizon pattern) share them."""

    def __init__(self, p_diag, q, a, b):
        self.p_diag = np.asarray(p_diag, dtype=float)
        self.q = np.asarray(q, dtype=float)
        self.a = np.asarray(a, dtype=float).reshape(-1, self.p_diag.shape[0])
        self.b = np.asarray(b, dtype=float)
        self.n = self.p_diag.shape[0]
        self.m_eq = self.a.shape[0]
        self._equilibrate()
        self._rho_scalar = 0.1
        self._factorize()

    # -- scaling -----------------------------------------------------------

    def _equilibrate(self):
        n, m_eq = self.n, self.m_eq
        d = np.ones(n)
        e_eq = np.ones(m_eq)
        e_box = np.ones(n)
        cost = 1.0
        p_s = self.p_diag.copy()
        q_s = self.q.copy()
        a_s = self.a.copy()
        c_box = np.ones(n)  # scaled coefficients of the identity block
        for _ in range(_RUIZ_ITERS):
            col_a = np.abs(a_s).max(axis=0, initial=0.0) if m_eq else np.zeros(n)
            col_norm = np.maximum.reduce([np.abs(p_s), col_a, np.abs(c_box)])
            dd = 1.0 / np.sqrt(np.where(col_norm > 0, col_norm, 1.0))
            row_a = np.abs(a_s).max(axis=1, initial=0.0) if m_eq else np.zeros(0)
            ee_eq = 1.0 / np.sqrt(np.where(row_a > 0, row_a, 1.0))
            ee_box = 1.0 / np.sqrt(np.where(np.abs(c_box) > 0, np.abs(c_box), 1.0))
            p_s = dd * p_s * dd
            q_s = dd * q_s
            if m_eq:
                a_s = ee_eq[:, None] * a_s * dd[None, :]
            c_box = ee_box * c_box * dd
            d *= dd
            e_eq *= ee_eq
            e_box *= ee_box
            gamma_den = max(float(np.mean(np.abs(p_s))), float(np.abs(q_s).max(initial=0.0)))
            gamma = 1.0 / gamma_den if gamma_den > 0 else 1.0
            p_s *= gamma
            q_s *= gamma
            cost *= gamma
        self.d = d
        self.e_eq = e_eq
        self.e_box = e_box
        self.cost = cost
        self.p_scaled = p_s
        self.q_scaled = q_s
        self.a_scaled = a_s
        self.c_box = c_box
        self.b_scaled = e_eq * self.b if m_eq else self.b.copy()

    def _rho_vector(self) -> np.ndarray:
        rho = np.full(self.m_eq + self.n, self._rho_scalar)
        rho[: self.m_eq] *= _RHO_EQ_FACTOR
        return rho

    def _factorize(self):
        n, m_eq = self.n, self.m_eq
        m = m_eq + n
        rho = self._rho_vector()
        kkt = np.zeros((n + m, n + m))
        kkt[np.arange(n), np.arange(n)] = self.p_scaled + _SIGMA
        if m_eq:
            kkt[:n, n : n + m_eq] = self.a_scaled.T
            kkt[n : n + m_eq, :n] = self.a_scaled
        box = np.arange(n)
        kkt[box, n + m_eq + box] = self.c_box
        kkt[n + m_eq + box, box] = self.c_box
        diag = np.arange(n, n + m)
        kkt[diag, diag] = -1.0 / rho
        self._lu = lu_factor(kkt)
        self._rho = rho

    # -- main loop ---------------------------------------------------------

    def solve(self, lb, ub, warm=None, tol: float = 1e-6, max_iter: int = 20000) -> QpSolution:
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if np.any(lb > ub):
            raise Infeasible("a variable's lower bound exceeds its upper bound")
        n, m_eq = self.n, self.m_eq
        m = m_eq + n
        scale = max(1.0, problem_scale(self.q, self.b, lb, ub))

        l_s = np.concatenate([self.b_scaled, np.where(np.isfinite(lb), self.e_box * lb, -np.inf)])
        u_s = np.concatenate([self.b_scaled, np.where(np.isfinite(ub), self.e_box * ub, np.inf)])

        if warm is not None:
            x_w, yeq_w, ybox_w = warm
            x = x_w / self.d
            y = np.concatenate(
                [self.cost * yeq_w / self.e_eq if m_eq else np.zeros(0), self.cost * ybox_w / self.e_box]
            )
            z = np.clip(np.concatenate([self.a_scaled @ x if m_eq else np.zeros(0), self.c_box * x]), l_s, u_s)
        else:
            x = np.zeros(n)
            y = np.zeros(m)
            z = np.clip(np.zeros(m), l_s, u_s)

        best = None
        iterations = 0
        y_prev_check = y.copy()
        for k in range(1, max_iter + 1):
            iterations = k
            rhs = np.concatenate([_SIGMA * x - self.q_scaled, z - y / self._rho])
            sol = lu_solve(self._lu, rhs)
            x_tilde, nu = sol[:n], sol[n:]
            z_tilde = z + (nu - y) / self._rho
            x = _ALPHA * x_tilde + (1.0 - _ALPHA) * x
            z_relaxed = _ALPHA * z_tilde + (1.0 - _ALPHA) * z
            z_new = np.clip(z_relaxed + y / self._rho, l_s, u_s)
            y = y + self._rho * (z_relaxed - z_new)
            z = z_new

            if k % _CHECK_EVERY:
                continue

            x_u = self.d * x
            y_u = self.e_box * y[m_eq:] / self.cost
            yeq_u = self.e_eq * y[:m_eq] / self.cost if m_eq else np.zeros(0)
            z_u = np.concatenate([z[:m_eq] / self.e_eq if m_eq else np.zeros(0), z[m_eq:] / self.e_box])
            cx_u = np.concatenate([self.a @ x_u if m_eq else np.zeros(0), x_u])
            r_prim = float(np.abs(cx_u - z_u).max(initial=0.0))
            grad = self.p_diag * x_u + self.q + y_u
            if m_eq:
                grad = grad + self.a.T @ yeq_u
            r_dual = float(np.abs(grad).max(initial=0.0))

            prim_norm = max(np.abs(cx_u).max(initial=0.0), np.abs(z_u).max(initial=0.0), 1.0)
            dual_norm = max(
                np.abs(self.p_diag * x_u).max(initial=0.0), np.abs(self.q).max(initial=0.0), 1.0
            )

            near = r_prim <= 1e-5 * prim_norm and r_dual <= 1e-5 * dual_norm
            if near:
                candidate = self._finish(x_u, yeq_u, y_u, lb, ub)
                if candidate is not None:
                    if best is None or candidate.kkt_residual < best.kkt_residual:
                        best = candidate
                    if candidate.kkt_residual <= tol * (1.0 + scale):
                        candidate.iterations = k
                        return candidate
                if r_prim <= 1e-8 * (1.0 + prim_norm) and r_dual <= 1e-8 * (1.0 + dual_norm):
                    break

            dy = (
                np.concatenate(
                    [self.e_eq * (y[:m_eq] - y_prev_check[:m_eq]) if m_eq else np.zeros(0),
                     self.e_box * (y[m_eq:] - y_prev_check[m_eq:])]
                )
                / self.cost
            )
            if self._primal_infeasible(dy, lb, ub):
                raise Infeasible("primal infeasibility certificate found")
            y_prev_check = y.copy()

            ratio = (r_prim / prim_norm) / max(r_dual / dual_norm, 1e-16)
            if ratio > 25.0 or ratio < 0.04:
                new_scalar = float(np.clip(self._rho_scalar * np.sqrt(ratio), 1e-6, 1e6))
                if new_scalar != self._rho_scalar:
                    self._rho_scalar = new_scalar
                    self._factorize()

        x_u = self.d * x
        y_u = self.e_box * y[m_eq:] / self.cost
        yeq_u = self.e_eq * y[:m_eq] / self.cost if m_eq else np.zeros(0)
        candidate = self._finish(x_u, yeq_u, y_u, lb, ub)
        if best is None or (candidate is not None and candidate.kkt_residual < best.kkt_residual):
            best = candidate
        if best is None or not best.kkt_residual <= tol * (1.0 + scale):
            raise IterationLimit(
                f"no solution at tolerance {tol:g} within {max_iter} iterations",
                best_residual=None if best is None else best.kkt_residual,
            )
        best.iterations = iterations
        return best

    # -- helpers -----------------------------------------------------------

    def _primal_infeasible(self, dy, lb, ub) -> bool:
        den = float(np.abs(dy).max(initial=0.0))
        if den <= 1e-12:
            return False
        direction = dy / den
        d_eq, d_box = direction[: self.m_eq], direction[self.m_eq :]
        lhs = d_box.copy()
        if self.m_eq:
            lhs = lhs + self.a.T @ d_eq
        mat_scale = max(1.0, float(np.abs(self.a).max(initial=0.0)) if self.m_eq else 1.0)
        if float(np.abs(lhs).max(initial=0.0)) > 1e-8 * mat_scale:
            return False
        pos = np.maximum(direction, 0.0)
        neg = np.maximum(-direction, 0.0)
        u_full = np.concatenate([self.b, ub])
        l_full = np.concatenate([self.b, lb])
        if np.any(pos[~np.isfinite(u_full)] > 1e-10) or np.any(neg[~np.isfinite(l_full)] > 1e-10):
            return False
        support = float(np.sum(u_full[pos > 0] * pos[pos > 0]) - np.sum(l_full[neg > 0] * neg[neg > 0]))
        return support < -1e-8 * max(1.0, problem_scale(self.q, self.b, lb, ub))

    def _finish(self, x, y_eq, y_box, lb, ub) -> QpSolution | None:
        raw_res = _kkt_residual(self.p_diag, self.q, self.a, self.b, lb, ub, x, y_eq, y_box)
        pick = (x, y_eq, y_box, raw_res)
        y_scale = 1e-8 * (1.0 + float(np.abs(y_box).max(initial=0.0)))
        x_scale = 1e-7 * (1.0 + float(np.abs(x).max(initial=0.0)))
        candidates = (
            ((y_box < -y_scale), (y_box > y_scale)),
            ((x - lb <= x_scale), (ub - x <= x_scale)),
        )
        for low, up in candidates:
            polished = self._polish(low, up, lb, ub)
            if polished is None:
                continue
            x_p, yeq_p, ybox_p = polished
            res_p = _kkt_residual(self.p_diag, self.q, self.a, self.b, lb, ub, x_p, yeq_p, ybox_p)
            if res_p < pick[3]:
                pick = (x_p, yeq_p, ybox_p, res_p)
        x_f, yeq_f, ybox_f, res_f = pick
        if not np.isfinite(res_f):
            return None
        objective = float(0.5 * x_f @ (self.p_diag * x_f) + self.q @ x_f)
        return QpSolution(
            x=x_f,
            y_eq=yeq_f,
            y_bounds=ybox_f,
            objective=objective,
            status="optimal",
            kkt_residual=res_f,
            iterations=0,
        )

    def _polish(self, low, up, lb, ub):
        n, m_eq = self.n, self.m_eq
        low = low & np.isfinite(lb)
        up = up & np.isfinite(ub)
        fixed = np.isfinite(lb) & np.isfinite(ub) & (lb == ub)
        low |= fixed
        up &= ~fixed
        up &= ~low
        n_low, n_up = int(low.sum()), int(up.sum())
        m_act = m_eq + n_low + n_up
        size = n + m_act
        kkt = np.zeros((size, size))
        kkt[np.arange(n), np.arange(n)] = self.p_diag + _POLISH_DELTA
        c_act = np.zeros((m_act, n))
        b_act = np.zeros(m_act)
        if m_eq:
            c_act[:m_eq] = self.a
            b_act[:m_eq] = self.b
        li = np.flatnonzero(low)
        ui = np.flatnonzero(up)
        c_act[m_eq + np.arange(n_low), li] = 1.0
        b_act[m_eq + np.arange(n_low)] = lb[li]
        c_act[m_eq + n_low + np.arange(n_up), ui] = 1.0
        b_act[m_eq + n_low + np.arange(n_up)] = ub[ui]
        kkt[:n, n:] = c_act.T
        kkt[n:, :n] = c_act
        kkt[np.arange(n, size), np.arange(n, size)] = -_POLISH_DELTA
        rhs = np.concatenate([-self.q, b_act])
        try:
            lu = lu_factor(kkt)
            t = lu_solve(lu, rhs)
            # Refine against the unregularized KKT system; a degenerate
            # active set makes that system singular, so stop on stall.
            best_t, best_res = t, float(np.abs(rhs - self._apply_kkt(t, c_act)).max())
            for _ in range(3):
                resid = rhs - self._apply_kkt(t, c_act)
                t = t + lu_solve(lu, resid)
                res = float(np.abs(rhs - self._apply_kkt(t, c_act)).max())
                if res < best_res:
                    best_t, best_res = t, res
                else:
                    break
            t = best_t
        except np.linalg.LinAlgError:
            t, best_res = None, np.inf
        rhs_scale = max(1.0, float(np.abs(rhs).max()))
        if t is None or best_res > 1e-9 * rhs_scale:
            # Redundant active constraints: fall back to the least-squares
            # (min-norm) solution of the unregularized KKT system.
            k0 = kkt.copy()
            diag = np.arange(n, size)
            k0[diag, diag] = 0.0
            k0[np.arange(n), np.arange(n)] = self.p_diag
            t = np.linalg.lstsq(k0, rhs, rcond=None)[0]
        x = t[:n]
        nu = t[n:]
        y_box_p = np.zeros(n)
        y_box_p[li] = nu[m_eq : m_eq + n_low]
        y_box_p[ui] = nu[m_eq + n_low :]
        y_eq_p = nu[:m_eq]
        return x, y_eq_p, y_box_p

    def _apply_kkt(self, t, c_act):
        n = self.n
        x, nu = t[:n], t[n:]
        top = self.p_diag * x + (c_act.T @ nu if c_act.shape[0] else 0.0)
        bottom = c_act @ x if c_act.shape[0] else np.zeros(0)
        return np.concatenate([top, bottom])


def solve_box_qp(p_diag, q, a, b, lb, ub, tol: float = 1e-6, warm=None, max_iter: int = 20000) -> QpSolution:
    """One-shot convenience wrapper around :class:`AdmmQpSolver`."""
    return AdmmQpSolver(p_diag, q, a, b).solve(lb, ub, warm=warm, tol=tol, max_iter=max_iter)
