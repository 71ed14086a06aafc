"""Parameter selection for the two-level method.

The spectrum-clustering triple (alpha, delta0, c) solves a nonlinear
3-equation system that removes every frequency dependence from the error
symbol's eigenvalues; its components are roots of three quartics, isolated
and polished here without external solvers.  Baseline choices (relaxation
only, or relaxation plus penalty, at continuous interpolation c = 1/2) are
found by direct minimization of the two-level convergence factor, and the
2D optimum by Nelder-Mead on the dense spectral radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lfa, spectrum
from .discretization import DiscretizationConfig
from .twolevel import MethodParams

# quartics whose bracketed real roots give the clustering parameters,
# highest-degree coefficient first
DISCONTINUITY_QUARTIC = (4.0, -8.0, 8.0, -8.0, 3.0)  # c in (0, 1)
PENALTY_QUARTIC = (12.0, -32.0, 24.0, -4.0, -1.0)  # delta0 in (1, inf)
RELAXATION_QUARTIC = (183.0, -352.0, 214.0, -40.0, -1.0)  # alpha in (0, 1)


class NewtonDivergenceError(RuntimeError):
    """Newton iteration failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = tuple(last_iterate)


@dataclass(frozen=True)
class ClusteringSolution:
    """A parameter triple with its system residuals and predicted factor."""

    params: MethodParams
    residuals: tuple[float, float, float]
    rho: float
    iterations: int = 0


def polyval(coeffs, x: float) -> float:
    """Horner evaluation, highest-degree coefficient first."""
    acc = 0.0
    for co in coeffs:
        acc = acc * x + co
    return acc


def _polyder(coeffs):
    n = len(coeffs) - 1
    return [co * (n - i) for i, co in enumerate(coeffs[:-1])]


def _bisect_newton(coeffs, dcoeffs, lo, hi):
    """Refine a sign-change bracket to machine precision."""
    flo = polyval(coeffs, lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = polyval(coeffs, mid)
        if fmid == 0.0:
            lo = hi = mid
            break
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < 1e-6 * max(1.0, abs(mid)):
            break
    x = 0.5 * (lo + hi)
    for _ in range(60):
        fx = polyval(coeffs, x)
        dfx = polyval(dcoeffs, x)
        if dfx == 0.0:
            break
        step = fx / dfx
        x_new = x - step
        if not lo - 1e-12 <= x_new <= hi + 1e-12:
            x_new = 0.5 * (lo + hi)  # fall back into the bracket
        if x_new == x:
            break
        x = x_new
        if abs(step) < 1e-17 * max(1.0, abs(x)):
            break
    return x


def real_roots_in_interval(coeffs, lo: float, hi: float) -> list[float]:
    """All real roots of the polynomial in the open interval (lo, hi).

    Isolation by recursive subdivision at the roots of the derivative,
    sign-change bisection on each monotone piece, Newton polishing; each
    returned root r satisfies |p(r)| < 1e-12 * max|coeff|.
    """
    if lo >= hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    coeffs = list(np.trim_zeros(np.asarray(coeffs, dtype=float), "f"))
    if len(coeffs) <= 1:
        return []
    if len(coeffs) == 2:
        r = -coeffs[1] / coeffs[0]
        return [r] if lo < r < hi else []
    dcoeffs = _polyder(coeffs)
    crit = real_roots_in_interval(dcoeffs, lo, hi)
    pts = [lo] + crit + [hi]
    scale = max(abs(co) for co in coeffs)

    def sgn(v):  # dead zone so a grazing zero is not a sign change
        return 0 if abs(v) < 1e-13 * scale else (1 if v > 0 else -1)

    roots = []
    for x in pts[1:-1]:  # tangent (multiple) roots sit at critical points
        if sgn(polyval(coeffs, x)) == 0:
            roots.append(x)
    for a, b in zip(pts[:-1], pts[1:]):
        sa, sb = sgn(polyval(coeffs, a)), sgn(polyval(coeffs, b))
        if sa != 0 and sb != 0 and sa != sb:
            roots.append(_bisect_newton(coeffs, dcoeffs, a, b))
    roots = sorted(r for r in roots if lo < r < hi)
    deduped = []
    for r in roots:
        if not deduped or abs(r - deduped[-1]) > 1e-9 * max(1.0, abs(r)):
            deduped.append(r)
    return deduped


def clustering_system_residuals(params: MethodParams) -> tuple[float, float, float]:
    """Residuals of the three conditions that make the error-symbol
    eigenvalues frequency independent."""
    alpha, d0, c = params.as_tuple()
    if c == 1.0 or d0 == 0.0:
        raise lfa.DegenerateParameterError("residuals undefined at c=1 or delta0=0")
    r1 = alpha + alpha * c * (d0 - 2) + (c - 1) * d0
    r2 = alpha * (
        3 * c**2 * d0 * (4 * d0 - 3) + c * (-12 * d0**2 + 9 * d0 + 1) + 4 * d0**2 - 2 * d0 - 1
    ) - d0 * (c**2 * (8 * d0**2 - 4 * d0 - 1) + c * (-8 * d0**2 + 4 * d0 + 2) + 2 * d0**2 - 1)
    den_l = (c - 1) ** 4 * d0**2
    den_r = 2 * d0**2 * (
        -2 * (2 * c**2 - 3 * c + 1) ** 2 * d0**2 + 4 * c * (c - 1) ** 3 * d0 + (c - 1) ** 4
    )
    if abs(den_l) < 1e-300 or abs(den_r) < 1e-300:
        raise lfa.DegenerateParameterError("zero denominator in the third condition")
    lhs = 2 * alpha**2 * (c - 1) ** 2 * c * (c * ((d0 - 4) * d0 + 2) + 2 * (d0 - 1)) / den_l
    rhs = (
        4
        * alpha**2
        * (4 * (c - 1) * c * d0**2 - 3 * (c - 1) * c * d0 + c + d0 - 1)
        * (c * (3 * (c - 1) * d0 - 2 * c + 3) + d0 - 1)
        / den_r
    )
    return (r1, r2, lhs - rhs)


def _residual_vector(v) -> np.ndarray:
    alpha, d0, c = v
    r1 = alpha + alpha * c * (d0 - 2) + (c - 1) * d0
    r2 = alpha * (
        3 * c**2 * d0 * (4 * d0 - 3) + c * (-12 * d0**2 + 9 * d0 + 1) + 4 * d0**2 - 2 * d0 - 1
    ) - d0 * (c**2 * (8 * d0**2 - 4 * d0 - 1) + c * (-8 * d0**2 + 4 * d0 + 2) + 2 * d0**2 - 1)
    den_l = (c - 1) ** 4 * d0**2
    den_r = 2 * d0**2 * (
        -2 * (2 * c**2 - 3 * c + 1) ** 2 * d0**2 + 4 * c * (c - 1) ** 3 * d0 + (c - 1) ** 4
    )
    lhs = 2 * alpha**2 * (c - 1) ** 2 * c * (c * ((d0 - 4) * d0 + 2) + 2 * (d0 - 1)) / den_l
    rhs = (
        4
        * alpha**2
        * (4 * (c - 1) * c * d0**2 - 3 * (c - 1) * c * d0 + c + d0 - 1)
        * (c * (3 * (c - 1) * d0 - 2 * c + 3) + d0 - 1)
        / den_r
    )
    return np.array([r1, r2, lhs - rhs])


def predicted_radius(params: MethodParams) -> float:
    """|lambda| predicted by the closed form at the zero phase."""
    ev = lfa.eigenvalues_closed_form_at(1.0, params)
    return max(abs(ev.lambda_plus), abs(ev.lambda_minus))


def clustering_parameters() -> ClusteringSolution:
    """The clustering triple from the three quartic roots.

    The relaxation quartic may have several roots in (0, 1); the one that
    also zeroes the nonlinear system (together with the other two roots)
    is selected.
    """
    c_roots = real_roots_in_interval(DISCONTINUITY_QUARTIC, 0.0, 1.0)
    d_roots = real_roots_in_interval(PENALTY_QUARTIC, 1.0, 10.0)
    a_roots = real_roots_in_interval(RELAXATION_QUARTIC, 0.0, 1.0)
    if len(c_roots) != 1 or len(d_roots) != 1 or not a_roots:
        raise RuntimeError(
            f"unexpected quartic root pattern: {c_roots}, {d_roots}, {a_roots}"
        )
    c, d0 = c_roots[0], d_roots[0]
    alpha = min(
        a_roots,
        key=lambda a: np.max(np.abs(_residual_vector((a, d0, c)))),
    )
    params = MethodParams(alpha, d0, c)
    res = clustering_system_residuals(params)
    return ClusteringSolution(params, res, predicted_radius(params))


def solve_clustering_system(
    initial: MethodParams, tol: float = 1e-10, max_iter: int = 100
) -> ClusteringSolution:
    """Damped Newton on the clustering system with finite-difference
    Jacobian; raises NewtonDivergenceError with the last iterate if the
    residual cannot be driven below tol."""
    from .discretization import ConfigError

    x = np.array(initial.as_tuple(), dtype=float)
    fx = _residual_vector(x)
    for it in range(max_iter):
        norm = np.max(np.abs(fx))
        if norm < tol:
            try:
                params = MethodParams(*x)
            except ConfigError as exc:  # never return a triple outside the box
                raise NewtonDivergenceError(
                    f"converged outside the valid box: {exc}", x
                ) from exc
            return ClusteringSolution(
                params, clustering_system_residuals(params), predicted_radius(params), it
            )
        Jac = np.empty((3, 3))
        for j in range(3):
            step = 1e-7 * max(abs(x[j]), 1.0)
            xp = x.copy()
            xp[j] += step
            Jac[:, j] = (_residual_vector(xp) - fx) / step
        try:
            delta = np.linalg.solve(Jac, -fx)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergenceError(f"singular Jacobian: {exc}", x) from exc
        lam = 1.0
        for _ in range(40):
            x_new = x + lam * delta
            try:
                f_new = _residual_vector(x_new)
            except (ZeroDivisionError, FloatingPointError):
                f_new = np.array([np.inf] * 3)
            if np.all(np.isfinite(f_new)) and np.max(np.abs(f_new)) < norm:
                break
            lam *= 0.5
        else:
            raise NewtonDivergenceError(
                f"no descent after damping, residual {norm:.3e}", x
            )
        x, fx = x_new, f_new
    raise NewtonDivergenceError(
        f"no convergence in {max_iter} iterations, residual {np.max(np.abs(fx)):.3e}", x
    )


def golden_section(f, lo: float, hi: float, tol: float = 1e-8, max_iter: int = 200):
    """Golden-section minimization of a unimodal scalar function."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    xm = 0.5 * (a + b)
    return xm, f(xm)


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fval: float
    nfev: int
    best_history: list[float]  # best objective after each accepted step


def nelder_mead(f, x0, steps, xtol=1e-9, ftol=1e-12, max_evals=2000) -> NelderMeadResult:
    """Standard Nelder-Mead simplex minimization (reflect/expand/contract/
    shrink); best_history records the best value after every simplex
    update, so accepted steps are non-increasing by construction."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    sim = [x0]
    for j in range(n):
        xj = x0.copy()
        xj[j] += steps[j]
        sim.append(xj)
    sim = np.array(sim)
    fvals = np.array([f(x) for x in sim])
    nfev = n + 1
    history = [float(fvals.min())]
    while nfev < max_evals:
        order = np.argsort(fvals)
        sim, fvals = sim[order], fvals[order]
        if fvals[-1] - fvals[0] < ftol and np.max(np.abs(sim[1:] - sim[0])) < xtol:
            break
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + (centroid - sim[-1])
        fr = f(xr)
        nfev += 1
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - sim[-1])
            fe = f(xe)
            nfev += 1
            if fe < fr:
                sim[-1], fvals[-1] = xe, fe
            else:
                sim[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            sim[-1], fvals[-1] = xr, fr
        else:
            xc = centroid + 0.5 * (sim[-1] - centroid)
            fc = f(xc)
            nfev += 1
            if fc < fvals[-1]:
                sim[-1], fvals[-1] = xc, fc
            else:  # shrink toward the best vertex
                for j in range(1, n + 1):
                    sim[j] = sim[0] + 0.5 * (sim[j] - sim[0])
                    fvals[j] = f(sim[j])
                nfev += n
        history.append(float(fvals.min()))
    order = np.argsort(fvals)
    return NelderMeadResult(sim[order][0], float(fvals[order][0]), nfev, history)


def optimize_1d_alpha(penalty: float, c: float, npoints: int = 256) -> tuple[float, float]:
    """Best relaxation for fixed (penalty, c): minimizes the two-level
    convergence factor over a dense phase grid."""

    def objective(alpha):
        return lfa.symbol_radius(MethodParams(alpha, penalty, c), npoints)

    return golden_section(objective, 1e-4, 1.0, tol=1e-9)


def optimize_1d_alpha_delta(
    c: float, start=(0.9, 1.8), npoints: int = 256, max_evals: int = 400
) -> tuple[float, float, float]:
    """Best (relaxation, penalty) for fixed c; returns (alpha, delta0, rho)."""

    def objective(v):
        alpha, d0 = v
        if not (0.0 < alpha <= 1.0 and d0 > 1.0):
            return np.inf
        return lfa.symbol_radius(MethodParams(alpha, d0, c), npoints)

    result = nelder_mead(objective, start, steps=(0.05, 0.2), max_evals=max_evals)
    alpha, d0 = result.x
    return alpha, d0, result.fval


def optimize_2d(
    config: DiscretizationConfig,
    initial: MethodParams | None = None,
    max_evals: int = 200,
) -> ClusteringSolution:
    """Minimize the dense 2D error-operator spectral radius over the full
    triple by Nelder-Mead, starting from the 1D clustering triple."""
    if config.dim != 2:
        config = config.with_dim(2)
    if initial is None:
        initial = clustering_parameters().params

    def objective(v):
        alpha, d0, c = v
        if not (0.0 < alpha <= 1.0 and d0 > 1.0 and 0.0 < c < 1.0):
            return np.inf
        p = MethodParams(alpha, d0, c)
        cfg = DiscretizationConfig(config.cells_per_dim, d0, config.bc, 2)
        try:
            eigs = spectrum.two_level_error_eigenvalues(cfg, p)
        except np.linalg.LinAlgError:
            return np.inf
        return float(np.max(np.abs(eigs)))

    result = nelder_mead(
        objective,
        np.array(initial.as_tuple()),
        steps=(0.02, 0.05, 0.02),
        max_evals=max_evals,
    )
    params = MethodParams(*result.x)
    return ClusteringSolution(
        params, clustering_system_residuals(params), result.fval, result.nfev
    )
