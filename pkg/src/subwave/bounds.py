"""Exceedance bounds and convergence-rate constants for truncated expansions.

The central estimate: for a process whose reconstruction error has
tau-norm integral c = int_0^T tau(X_n(t) - X(t))^p dt,

    P{ int_0^T |X_n - X|^p dt > eps }  <=  2 exp( -phi*( (eps/c)^(1/p) ) )

valid for eps above a threshold defined through the N-function density.
Two routes produce c: the integral route (exact second moments of the
error, Gaussian-type models, small schemes) and the uniform route (lattice
sup bounds from envelope constants plus k-independent spectral moment
bounds, with the infinite level series closed geometrically).
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DivergenceError,
    InfeasiblePlanError,
    NumericError,
    ResourceLimitError,
    ValidationError,
)
from .expansion import (
    TruncationScheme,
    _scaled_nodes,
    _separable_coef_integral,
    basis_matrix,
    second_moment_eta_spectral_bound,
    second_moment_eta_spectral_bound_ns,
    second_moment_xi_bound,
)
from .orlicz import NFunction, conjugate
from .processes import ProcessModel
from .quad import simpson_nodes
from .wavelets import WaveletPair, tail_constant, envelope_constant

_MAX_SCHEME_COEFFICIENTS = 200


@dataclass(frozen=True)
class TailBoundReport:
    """One evaluation of the exceedance bound.

    ``bound`` is 2 exp(-phi*((epsilon/c)^(1/p))), always in (0, 2];
    ``valid`` records whether epsilon clears the threshold, and ``route``
    which construction produced the c constant.
    """

    c_constant: float
    epsilon: float
    threshold: float
    bound: float
    valid: bool
    route: str = "direct"

    def to_json_dict(self) -> dict:
        return {
            "c": self.c_constant,
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "bound": self.bound,
            "valid": self.valid,
            "route": self.route,
        }


def epsilon_threshold(nf: NFunction, c: float, p: float, method: str = "auto") -> float:
    """Smallest eps with eps > c * f(p (c/eps)^(1/p))^p, f the density.

    The right side is nonincreasing in eps, so the crossing is found by
    bisection; closed forms are used for the built-in families unless
    ``method="numeric"`` forces the solver:

        gaussian:  c p^(p/2)
        power a:   c p^((a-1)/a * p)
    """
    if not c > 0:
        raise ValidationError("threshold needs c > 0")
    if not p >= 1:
        raise ValidationError("threshold needs p >= 1")
    if method not in ("auto", "numeric", "closed"):
        raise ValidationError(f"unknown threshold method {method!r}")
    if method != "numeric":
        if nf.family == "gaussian":
            return c * p ** (p / 2.0)
        if nf.family == "power":
            alpha = nf.params[0]
            return c * p ** ((alpha - 1.0) / alpha * p)
        if method == "closed":
            raise ValidationError("no closed-form threshold for this family")

    def rhs(eps):
        x = p * (c / eps) ** (1.0 / p)
        return c * nf.density_f(x) ** p

    lo = c * 1e-9
    expand = 0
    while lo - rhs(lo) >= 0:
        lo /= 16.0
        expand += 1
        if expand > 200:
            raise NumericError("threshold bisection found no lower bracket")
    hi = max(c, lo * 2.0)
    expand = 0
    while hi - rhs(hi) <= 0:
        hi *= 2.0
        expand += 1
        if expand > 200:
            raise NumericError("threshold bisection found no upper bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - rhs(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * hi:
            break
    return 0.5 * (lo + hi)


def tail_probability_bound(
    nf: NFunction, c: float, p: float, epsilon: float, route: str = "direct"
) -> TailBoundReport:
    """Evaluate the exceedance bound 2 exp(-phi*((eps/c)^(1/p))).

    epsilon below the threshold yields valid=False (the bound value is
    still reported; it is just not asserted by the theory there).
    """
    if not c > 0:
        raise ValidationError("bound needs c > 0")
    if not p >= 1:
        raise ValidationError("bound needs p >= 1")
    if not epsilon > 0:
        raise ValidationError("bound needs epsilon > 0")
    thr = epsilon_threshold(nf, c, p)
    bound = 2.0 * math.exp(-conjugate(nf, (epsilon / c) ** (1.0 / p)))
    return TailBoundReport(
        c_constant=c,
        epsilon=epsilon,
        threshold=thr,
        bound=bound,
        valid=bool(epsilon > thr),
        route=route,
    )


# ---------------------------------------------------------------------------
# Integral route: exact second moments of the reconstruction error


@lru_cache(maxsize=None)
def _scheme_second_moments(model: ProcessModel, basis: WaveletPair, scheme: TruncationScheme):
    """Coefficient cross-covariance data for a scheme.

    Rank-one models factor exactly; otherwise the Gram matrix comes from
    pairwise tensor quadrature (coarse nodes) and cross moments with the
    path kernel use fine nodes.
    """
    idx = scheme.indices()
    if len(idx) > _MAX_SCHEME_COEFFICIENTS:
        raise ResourceLimitError(
            f"scheme has {len(idx)} coefficients "
            f"(limit {_MAX_SCHEME_COEFFICIENTS} for moment quadrature)"
        )
    if model.separable_g is not None:
        gamma = np.array(
            [_separable_coef_integral(model, basis, kind, j, k) for kind, j, k in idx]
        )
        return ("separable", gamma)
    fine, coarse = {}, {}
    for which in ("f", "m"):
        fine[which] = _scaled_nodes(basis, which, True)
        coarse[which] = _scaled_nodes(basis, which, False)
    pre_f, pre_c = [], []
    for kind, j, k in idx:
        for store, (x, w, v) in ((pre_f, fine[kind]), (pre_c, coarse[kind])):
            store.append(((x + k) / 2.0**j, w * v * 2.0 ** (-j / 2.0)))
    C = len(idx)
    G = np.empty((C, C))
    for a in range(C):
        ua, wa = pre_c[a]
        Ka = model.covariance(ua[:, None], ua[None, :])
        G[a, a] = wa @ Ka @ wa
        for b in range(a + 1, C):
            ub, wb = pre_c[b]
            K = model.covariance(ua[:, None], ub[None, :])
            G[a, b] = G[b, a] = wa @ K @ wb
    return ("general", (pre_f, G))


def _ms_error_curve(model, basis, scheme, t):
    """E (X_n(t) - X(t))^2 on an array of points."""
    t = np.asarray(t, dtype=float)
    B = basis_matrix(basis, scheme, t)
    kind, data = _scheme_second_moments(model, basis, scheme)
    if kind == "separable":
        gamma = data
        g = np.asarray(model.separable_g(t), dtype=float)
        resid = g - (gamma @ B if len(gamma) else np.zeros_like(t))
        return resid**2
    pre_f, G = data
    r_tt = np.asarray(model.covariance(t, t), dtype=float)
    if not pre_f:
        return r_tt
    M = np.empty((len(pre_f), len(t)))
    for c, (u, w) in enumerate(pre_f):
        M[c] = w @ model.covariance(u[:, None], t[None, :])
    return r_tt - 2.0 * np.sum(M * B, axis=0) + np.sum((G @ B) * B, axis=0)


def pointwise_ms_error(
    model: ProcessModel, basis: WaveletPair, scheme: TruncationScheme, t: float
) -> float:
    """Mean-square reconstruction error at one point, from covariances:

        R(t,t) - 2 sum_c E[coef_c X(t)] b_c(t) + sum_cc' E[coef coef'] b b'

    Feasible for schemes up to 200 coefficients.
    """
    val = float(_ms_error_curve(model, basis, scheme, np.array([t]))[0])
    if val < -1e-8:
        raise NumericError(f"mean-square error quadrature came out negative ({val:.3e})")
    return max(val, 0.0)


def c_n_infty_integral(
    model: ProcessModel, basis: WaveletPair, scheme: TruncationScheme, p: float, T: float
) -> float:
    """Integral-route rate constant C_X^p int_0^T (E(X_n - X)^2)^(p/2) dt.

    Simpson with 257 nodes on [0, T].
    """
    if not p >= 1:
        raise ValidationError("p must be >= 1")
    t, w = simpson_nodes(0.0, T, 256)
    E = _ms_error_curve(model, basis, scheme, t)
    if np.min(E) < -1e-8:
        raise NumericError("mean-square error curve came out negative")
    E = np.clip(E, 0.0, None)
    return model.det_constant**p * float(np.sum(w * E ** (p / 2.0)))


# ---------------------------------------------------------------------------
# Uniform route: envelope constants plus spectral moment bounds


def _sup_moment_route(model: ProcessModel):
    """Pick the k-independent moment-bound route a model supports."""
    if model.stationary and model.spectral_density is not None:
        return "stationary"
    if model.double_transform is not None:
        return "ns"
    raise ValidationError(
        "uniform-route constants need a stationary spectral density "
        "or a double transform"
    )


def _eta_sup_bound(model, basis, j, alpha, route):
    if route == "stationary":
        return second_moment_eta_spectral_bound(model, basis, j, alpha)
    return second_moment_eta_spectral_bound_ns(model, basis, j, alpha)


def level_cutoff(scheme: TruncationScheme, T: float) -> int:
    """J = min(n, min{j : k_j < 2^j T + 1}); n when the inner set is empty.

    Levels below J admit the dilated-window tail constants; from J on the
    full lattice-sum constant applies.
    """
    for j, kj in enumerate(scheme.levels):
        if kj < 2.0**j * T + 1.0:
            return j
    return scheme.n


def c_n_infty_uniform(
    model: ProcessModel,
    basis: WaveletPair,
    scheme: TruncationScheme,
    p: float,
    T: float,
    alpha: float,
    j_max_extra: int = 8,
) -> float:
    """Uniform-route rate constant

        C_X^p T ( sqrt(sup_k E xi^2) C_phi(T, k0')
                  + sum_{j<J} sqrt(sup_k E eta_j^2) 2^{j/2} C_psi(2^j T, k_j)
                  + sum_{j>=J} sqrt(sup_k E eta_j^2) 2^{j/2} C_psi )^p

    with J = min(n, min{j : k_j < 2^j T + 1}) (J = n when the inner set is
    empty).  Level-j tail constants use the dilated window 2^j T, which is
    exactly the regime where k_j >= 2^j T + 1 makes them defined.  The
    infinite series over j >= J decays geometrically at the exact rate
    2^(-alpha/2) (stationary route) or 2^(-alpha) (double-transform route);
    levels J..J+j_max_extra-1 are computed explicitly and the remainder is
    summed in closed form.
    """
    if not p >= 1:
        raise ValidationError("p must be >= 1")
    if scheme.k0_prime < T + 1:
        raise ValidationError("C_phi(T, k0') needs k0' >= T + 1")
    route = _sup_moment_route(model)
    q = 2.0 ** (-alpha / 2.0) if route == "stationary" else 2.0 ** (-alpha)
    if q >= 1.0 - 1e-12:
        raise DivergenceError("level series does not decay (ratio >= 1)")
    xi_sup = second_moment_xi_bound(model, basis)
    total = math.sqrt(xi_sup) * tail_constant(basis.envelope_f, T, scheme.k0_prime)

    J = level_cutoff(scheme, T)
    c_psi_full = envelope_constant(basis.envelope_m)
    for j in range(J):
        term = math.sqrt(_eta_sup_bound(model, basis, j, alpha, route))
        total += term * 2.0 ** (j / 2.0) * tail_constant(
            basis.envelope_m, 2.0**j * T, scheme.levels[j]
        )
    for j in range(J, J + j_max_extra):
        term = math.sqrt(_eta_sup_bound(model, basis, j, alpha, route))
        total += term * 2.0 ** (j / 2.0) * c_psi_full
    j_tail = J + j_max_extra
    t_tail = (
        math.sqrt(_eta_sup_bound(model, basis, j_tail, alpha, route))
        * 2.0 ** (j_tail / 2.0)
        * c_psi_full
    )
    total += t_tail / (1.0 - q)
    return model.det_constant**p * T * total**p


def series_condition_check(
    model: ProcessModel, basis: WaveletPair, alpha: float, j_probe: int
) -> dict:
    """Partial sums and term ratios of the uniform-route level series.

    The series sqrt(sup E xi^2) C_phi + sum_j sqrt(sup E eta_j^2) 2^{j/2}
    C_psi converges iff the term ratio stays below 1; with the spectral
    moment bounds the ratio is exactly 2^(-alpha/2) (stationary) or
    2^(-alpha) (double transform).
    """
    route = _sup_moment_route(model)
    c_psi = envelope_constant(basis.envelope_m)
    c_phi = envelope_constant(basis.envelope_f)
    xi_term = math.sqrt(second_moment_xi_bound(model, basis)) * c_phi
    terms = [
        math.sqrt(_eta_sup_bound(model, basis, j, alpha, route)) * 2.0 ** (j / 2.0) * c_psi
        for j in range(j_probe + 1)
    ]
    ratios = [b / a for a, b in zip(terms[:-1], terms[1:])]
    q = 2.0 ** (-alpha / 2.0) if route == "stationary" else 2.0 ** (-alpha)
    convergent = bool(ratios and max(ratios) < 1.0 - 1e-9)
    tail = terms[-1] * q / (1.0 - q) if convergent else math.inf
    return {
        "route": route,
        "xi_term": xi_term,
        "terms": terms,
        "ratios": ratios,
        "limit_ratio": q,
        "verdict": "convergent" if convergent else "divergent",
        "partial_sum": xi_term + sum(terms),
        "geometric_tail": tail,
    }


# ---------------------------------------------------------------------------
# Truncation planner


def _lattice_scheme(n: int, m: int, T: float) -> TruncationScheme:
    return TruncationScheme(
        k0_prime=math.ceil(T) + 1 + m,
        levels=tuple(math.ceil(2.0**j * T) + 1 + m for j in range(n)),
    )


def plan_truncation(
    model: ProcessModel,
    basis: WaveletPair,
    nf: NFunction,
    p: float,
    T: float,
    epsilon: float,
    delta: float,
    alpha: float,
    n_max: int = 12,
    m_max: int = 64,
):
    """Smallest lattice scheme whose uniform-route bound meets the target.

    Walks schemes k_j = ceil(2^j T) + 1 + m, k0' = ceil(T) + 1 + m in
    row-major order (n = 1..n_max outer, m = 0..m_max inner) and returns the
    first (scheme, report) whose bound is <= delta with epsilon above the
    validity threshold.  Every lattice scheme keeps k_j >= 2^j T + 1, so the
    level cutoff J equals n throughout.  Exhaustion raises
    InfeasiblePlanError carrying the best bound found.
    """
    if not (0.0 < delta < 1.0):
        raise ValidationError("delta must be in (0, 1)")
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    best = None
    for n in range(1, n_max + 1):
        for m in range(0, m_max + 1):
            scheme = _lattice_scheme(n, m, T)
            c = c_n_infty_uniform(model, basis, scheme, p, T, alpha)
            rep = tail_probability_bound(nf, c, p, epsilon, route="uniform")
            if best is None or rep.bound < best[1].bound:
                best = (scheme, rep)
            if rep.valid and rep.bound <= delta:
                return scheme, rep
    raise InfeasiblePlanError(
        f"no lattice scheme up to n={n_max}, m={m_max} reaches bound <= {delta} "
        f"(best valid-region bound {best[1].bound:.6g})",
        best_bound=best[1],
        best_scheme=best[0],
    )
