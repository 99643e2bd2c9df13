"""Wavelet coefficients of sample paths, truncated reconstructions, and
coefficient second moments.

Index convention: the truncated expansion keeps the scaling band
|k| <= k0' at level 0 and detail levels j = 0..n-1 with |k| <= k_j.
Coefficient order is always: scaling k = -k0'..k0', then per level j
ascending, k = -k_j..k_j.

Second moments of detail coefficients come in three flavors: direct tensor
quadrature of the covariance against the dilated wavelet (any model), the
frequency-side integral (stationary models; this is also the proof-side
upper bound for the direct value), and k-independent spectral bounds driven
by a Lipschitz estimate of the wavelet transform near zero.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from .errors import (
    DivergenceError,
    NumericError,
    SupportCoverageError,
    ValidationError,
)
from .processes import ProcessModel, SamplePath
from .quad import gauss_nodes, piecewise_simpson_nodes, simpson_nodes, trapezoid_weights
from .wavelets import WaveletPair, eval_dilated

_TAIL_MASS = 1e-6  # relative envelope tail mass defining effective supports
_TWO_PI_3 = 2.0 * math.pi / 3.0


@dataclass(frozen=True)
class TruncationScheme:
    """Index cuts of a truncated expansion.

    ``k0_prime = -1`` encodes an empty scaling band (no terms at all when
    ``levels`` is empty too); otherwise k0_prime >= 0.
    """

    k0_prime: int
    levels: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(k) for k in self.levels))
        if self.k0_prime < -1:
            raise ValidationError("k0_prime must be >= 0 (or -1 for an empty band)")
        if any(k < 0 for k in self.levels):
            raise ValidationError("level cuts must be >= 0")

    @property
    def n(self) -> int:
        return len(self.levels)

    def indices(self):
        """Ordered coefficient indices: ("f", 0, k) then ("m", j, k)."""
        out = [("f", 0, k) for k in range(-self.k0_prime, self.k0_prime + 1)]
        for j, kj in enumerate(self.levels):
            out.extend(("m", j, k) for k in range(-kj, kj + 1))
        return out

    def count(self) -> int:
        base = 0 if self.k0_prime < 0 else 2 * self.k0_prime + 1
        return base + sum(2 * k + 1 for k in self.levels)

    def contains(self, other: "TruncationScheme") -> bool:
        """True when every index of ``other`` is also kept by this scheme."""
        if other.k0_prime > self.k0_prime or other.n > self.n:
            return False
        return all(ko <= ks for ko, ks in zip(other.levels, self.levels))

    def spec_string(self) -> str:
        ks = ",".join(str(k) for k in self.levels)
        return f"k0'={self.k0_prime};k={ks}"


def parse_scheme_spec(spec: str) -> TruncationScheme:
    """Parse "k0'=<int>;k=<int,int,...>" (empty k list allowed)."""
    try:
        left, right = spec.split(";")
        if not left.startswith("k0'=") or not right.startswith("k="):
            raise ValueError
        k0 = int(left[4:])
        body = right[2:]
        levels = tuple(int(x) for x in body.split(",")) if body else ()
    except ValueError:
        raise ValidationError(f"bad scheme spec {spec!r}") from None
    return TruncationScheme(k0_prime=k0, levels=levels)


@dataclass(frozen=True)
class CoefficientSet:
    """Computed expansion coefficients matching a scheme's index set."""

    xi: Dict[int, float]
    eta: Dict[Tuple[int, int], float]
    scheme: TruncationScheme

    def __post_init__(self):
        want_xi = set(range(-self.scheme.k0_prime, self.scheme.k0_prime + 1))
        if set(self.xi) != want_xi:
            raise ValidationError("scaling coefficients do not match the scheme")
        want_eta = {
            (j, k)
            for j, kj in enumerate(self.scheme.levels)
            for k in range(-kj, kj + 1)
        }
        if set(self.eta) != want_eta:
            raise ValidationError("detail coefficients do not match the scheme")

    def vector(self) -> np.ndarray:
        vals = []
        for kind, j, k in self.scheme.indices():
            vals.append(self.xi[k] if kind == "f" else self.eta[(j, k)])
        return np.array(vals)


# ---------------------------------------------------------------------------
# Effective supports and basis matrices


@lru_cache(maxsize=None)
def _effective_support(basis: WaveletPair, which: str) -> float:
    env = basis.envelope_f if which == "f" else basis.envelope_m
    return env.effective_support(_TAIL_MASS)


def _support_interval(basis, kind, j, k):
    s = _effective_support(basis, kind)
    return (k - s) / 2.0**j, (k + s) / 2.0**j


def check_support_coverage(basis: WaveletPair, scheme: TruncationScheme, grid):
    """Raise SupportCoverageError when the grid misses an indexed support."""
    lo, hi = float(grid[0]), float(grid[-1])
    for kind, j, k in scheme.indices():
        a, b = _support_interval(basis, kind, j, k)
        if a < lo - 1e-9 or b > hi + 1e-9:
            raise SupportCoverageError(
                f"grid [{lo:g}, {hi:g}] does not cover the effective support "
                f"[{a:g}, {b:g}] of ({kind}, j={j}, k={k})",
                level=kind,
                j=j,
                k=k,
            )


def basis_matrix(basis: WaveletPair, scheme: TruncationScheme, t) -> np.ndarray:
    """Rows of dilated basis values on ``t``, one row per scheme index."""
    t = np.asarray(t, dtype=float)
    rows = [eval_dilated(basis, kind, j, k, t) for kind, j, k in scheme.indices()]
    if not rows:
        return np.zeros((0, len(t)))
    return np.array(rows)


# ---------------------------------------------------------------------------
# Coefficients, reconstruction, Lp error


def compute_coefficients(
    path: SamplePath, basis: WaveletPair, scheme: TruncationScheme
) -> CoefficientSet:
    """Trapezoid inner products of the path against each indexed basis
    function (all shipped bases are real-valued, so conjugation is trivial).

    The path grid must cover the effective support (envelope tail mass
    1e-6) of every indexed function.
    """
    check_support_coverage(basis, scheme, path.grid)
    w = trapezoid_weights(path.grid)
    B = basis_matrix(basis, scheme, path.grid)
    vals = B @ (w * path.values)
    xi, eta = {}, {}
    for (kind, j, k), v in zip(scheme.indices(), vals):
        if kind == "f":
            xi[k] = float(v)
        else:
            eta[(j, k)] = float(v)
    return CoefficientSet(xi=xi, eta=eta, scheme=scheme)


def coefficients_csv(coeffs: CoefficientSet) -> str:
    """CSV dump ``level,j,k,value`` with level in {phi, psi}."""
    lines = ["level,j,k,value"]
    for kind, j, k in coeffs.scheme.indices():
        if kind == "f":
            lines.append(f"phi,0,{k},{coeffs.xi[k]!r}")
        else:
            lines.append(f"psi,{j},{k},{coeffs.eta[(j, k)]!r}")
    return "\n".join(lines) + "\n"


def reconstruct(coeffs: CoefficientSet, basis: WaveletPair, t_grid) -> np.ndarray:
    """Evaluate the truncated expansion at the given points."""
    t_grid = np.asarray(t_grid, dtype=float)
    B = basis_matrix(basis, coeffs.scheme, t_grid)
    if B.shape[0] == 0:
        return np.zeros_like(t_grid)
    return coeffs.vector() @ B


def lp_error(path: SamplePath, recon, p: float, T: float) -> float:
    """int_0^T |X(t) - recon(t)|^p dt by trapezoid on the restricted grid.

    Returns the integral itself (not its p-th root), which is the quantity
    the exceedance bounds refer to.
    """
    if p < 1:
        raise ValidationError("p must be >= 1")
    grid = path.grid
    if grid[0] > 1e-9 or grid[-1] < T - 1e-9:
        raise ValidationError("[0, T] must lie inside the path grid")
    mask = (grid >= -1e-12) & (grid <= T + 1e-12)
    sub = grid[mask]
    diff = np.abs(path.values[mask] - np.asarray(recon)[mask]) ** p
    return float(np.sum(trapezoid_weights(sub) * diff))


# ---------------------------------------------------------------------------
# Quadrature node builders (wavelet-argument coordinates)


def _even(n: int) -> int:
    n = max(int(n), 2)
    return n if n % 2 == 0 else n + 1


@lru_cache(maxsize=None)
def _scaled_nodes(basis: WaveletPair, which: str, fine: bool):
    """Simpson nodes/weights over the effective support in wavelet
    coordinates, plus the wavelet values at the nodes.

    Heavy-tailed envelopes get a dense core plus sparse tails; ``fine``
    selects the resolution (fine for single-coefficient moments, coarse for
    large Gram assemblies).  Haar's jump points become segment boundaries
    and values are taken from segment interiors, which keeps the rule exact
    for its piecewise-constant factors.
    """
    s = _effective_support(basis, which)
    core_h = 1.0 / 32.0
    if basis.family == "haar":
        jumps = [0.0, 0.5] if which == "m" else [0.0]
        breaks = sorted({-s, s} | {x for x in jumps if -s < x < s})
        panels = [_even((b - a) / core_h) for a, b in zip(breaks[:-1], breaks[1:])]
    elif s <= 20.0:
        breaks = [-s, s]
        panels = [_even(2.0 * s / core_h)]
    else:
        core = 16.0 if fine else 8.0
        tail_h = 1.0 / 8.0 if fine else 1.0 / 4.0
        breaks = [-s, -core, core, s]
        panels = [
            _even((s - core) / tail_h),
            _even(2 * core / core_h),
            _even((s - core) / tail_h),
        ]
    which_fn = basis.f_wavelet if which == "f" else basis.m_wavelet
    xs, ws, vs = [], [], []
    for (a, b), n in zip(zip(breaks[:-1], breaks[1:]), panels):
        x, w = simpson_nodes(a, b, n)
        # evaluate strictly inside the segment so jump nodes take the
        # one-sided value belonging to this segment
        nudge = 1e-9 * (b - a)
        vs.append(np.asarray(which_fn(np.clip(x, a + nudge, b - nudge)), dtype=float))
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws), np.concatenate(vs)


def _separable_coef_integral(model, basis, kind, j, k) -> float:
    """int g(t) w_{jk}(t) dt for rank-one models, by 1-D quadrature."""
    x, w, vals = _scaled_nodes(basis, kind, fine=True)
    g = np.asarray(model.separable_g((x + k) / 2.0**j), dtype=float)
    return float(2.0 ** (-j / 2.0) * np.sum(w * g * vals))


@lru_cache(maxsize=None)
def _eta_moment_stationary(model: ProcessModel, basis: WaveletPair, j: int) -> float:
    """Direct tensor quadrature of E|eta_jk|^2 for stationary models
    (k-independent: the kernel depends on the lag only)."""
    x, w, psi = _scaled_nodes(basis, "m", fine=True)
    lag = (x[:, None] - x[None, :]) / 2.0**j
    K = model.covariance(lag, np.zeros_like(lag))
    v = w * psi
    return float(v @ K @ v) / 2.0**j


def second_moment_eta(model: ProcessModel, basis: WaveletPair, j: int, k: int) -> float:
    """E|eta_jk|^2 = int int R(u,v) psi_jk(u) psi_jk(v) du dv.

    Tensor Simpson over the effective support; rank-one models use the
    exact 1-D factorization, stationary models a k-independent kernel.
    """
    if j < 0:
        raise ValidationError("level j must be >= 0")
    if model.separable_g is not None:
        return _separable_coef_integral(model, basis, "m", j, k) ** 2
    if model.stationary:
        val = _eta_moment_stationary(model, basis, j)
    else:
        x, w, psi = _scaled_nodes(basis, "m", fine=True)
        u = (x + k) / 2.0**j
        K = model.covariance(u[:, None], u[None, :])
        v = w * psi
        val = float(v @ K @ v) / 2.0**j
    if val < -1e-8:
        raise NumericError(f"second moment quadrature came out negative ({val:.3e})")
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# Frequency-side integrals


def _hat_window(basis: WaveletPair, which: str):
    """Integration segments covering the transform's effective support."""
    if basis.family == "meyer":
        if which == "m":
            return [(-4 * _TWO_PI_3, -_TWO_PI_3), (_TWO_PI_3, 4 * _TWO_PI_3)]
        return [(-2 * _TWO_PI_3, 2 * _TWO_PI_3)]
    return [(-64.0, 64.0)]


def _hat_quadrature(basis: WaveletPair, which: str, nodes_per_segment: int = 2048):
    xs, ws = [], []
    for a, b in _hat_window(basis, which):
        x, w = gauss_nodes(a, b, nodes_per_segment)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def second_moment_eta_parseval(model: ProcessModel, basis: WaveletPair, j: int) -> float:
    """Frequency-side value (1 / 2^{j+1} pi) int |R_hat(z)| |psi_hat(z/2^j)|^2 dz.

    For nonnegative spectral densities this equals E|eta_jk|^2 exactly; in
    general it is the upper bound the dominance tests compare against.
    """
    if model.spectral_density is None:
        raise ValidationError("frequency-side moment needs a spectral density")
    u, w = _hat_quadrature(basis, "m")
    rh = np.abs(np.asarray(model.spectral_density(2.0**j * u), dtype=float))
    ph = np.abs(np.atleast_1d(basis.m_hat(u))) ** 2
    return float(np.sum(w * rh * ph)) / (2.0 * math.pi)


@lru_cache(maxsize=None)
def _lipschitz_constant(basis: WaveletPair, gamma: float) -> float:
    from .wavelets import lipschitz_fit

    return lipschitz_fit(basis, [gamma])[1]


def _abs_weight_integral(func, order: float) -> float:
    """int_R |func(z)| |z|^order dz with a numeric tail-decay test.

    The inner part uses a z = v^2 substitution (smooth through the |z|^order
    kink at 0) plus log-spaced Gauss segments; beyond the window the decay
    exponent is probed and the tail closed by a power law, or a
    DivergenceError is raised when the probe does not decay.
    """
    def f(z):
        return np.abs(np.asarray(func(z), dtype=float)) * np.abs(z) ** order

    v, wv = gauss_nodes(0.0, math.sqrt(8.0), 512)
    inner = float(np.sum(wv * f(v**2) * 2.0 * v))
    mid = 0.0
    a = 8.0
    while a < 32768.0:
        b = a * 4.0
        z, wz = gauss_nodes(a, b, 256)
        mid += float(np.sum(wz * f(z)))
        a = b
    z_hi = 32768.0
    f_hi = float(f(np.array([z_hi]))[0])
    tail = 0.0
    if f_hi > 1e-300:
        ratios = [float(f(np.array([2.0 * z_hi]))[0]) / f_hi]
        q = math.log2(max(ratios[0], 1e-300))
        if q >= -1.0 - 1e-9:
            raise DivergenceError(
                f"weight integral decays like z^{q:.3f} at the window edge; "
                "int |R_hat| |z|^order dz diverges"
            )
        tail = f_hi * z_hi / (-q - 1.0)
    return 2.0 * (inner + mid) + 2.0 * tail


def second_moment_eta_spectral_bound(
    model: ProcessModel, basis: WaveletPair, j: int, order: float
) -> float:
    """k-independent bound on E|eta_jk|^2 for stationary short-memory models:

        C^2 / (pi 2^{1 + j(1+order)}) * int |R_hat(z)| |z|^order dz,

    where C is the Lipschitz constant of the wavelet transform at exponent
    order/2 (the transform enters squared).  Decays exactly by 2^-(1+order)
    per level.
    """
    if not model.stationary or model.spectral_density is None:
        raise ValidationError("spectral bound needs a stationary model with R_hat")
    if order <= 0:
        raise ValidationError("order must be positive")
    C = _lipschitz_constant(basis, order / 2.0)
    W = _abs_weight_integral(model.spectral_density, order)
    return C * C * W / (math.pi * 2.0 ** (1.0 + j * (1.0 + order)))


def second_moment_eta_spectral_bound_ns(
    model: ProcessModel, basis: WaveletPair, j: int, order: float
) -> float:
    """Non-stationary analogue via the double transform:

        C^2 / ((2 pi)^2 2^{j(1+2 order)}) * int int |R2_hat| |z|^a |w|^a dz dw,

    with C the Lipschitz constant at exponent ``order`` itself.  Rank-one
    models factor the double integral into a 1-D integral squared.
    """
    if model.double_transform is None:
        raise ValidationError("non-stationary spectral bound needs the double transform")
    if order <= 0:
        raise ValidationError("order must be positive")
    C = _lipschitz_constant(basis, order)
    if model.separable_g_hat is not None:
        w1 = _abs_weight_integral(model.separable_g_hat, order)
        W2 = w1 * w1
    else:
        z, wz = gauss_nodes(-64.0, 64.0, 1024)
        F = np.abs(model.double_transform(z[:, None], z[None, :]))
        W2 = float((wz * np.abs(z) ** order) @ F @ (wz * np.abs(z) ** order))
    return C * C * W2 / ((2.0 * math.pi) ** 2 * 2.0 ** (j * (1.0 + 2.0 * order)))


def second_moment_xi_bound(model: ProcessModel, basis: WaveletPair) -> float:
    """k-independent bound on E|xi_0k|^2.

    Stationary: (1/2 pi) int |R_hat(z)| |phi_hat(z)|^2 dz.  Models carrying
    only the double transform use the analogous double integral (rank-one
    factorization when available).
    """
    if model.stationary and model.spectral_density is not None:
        u, w = _hat_quadrature(basis, "f")
        rh = np.abs(np.asarray(model.spectral_density(u), dtype=float))
        ph = np.abs(np.atleast_1d(basis.f_hat(u))) ** 2
        return float(np.sum(w * rh * ph)) / (2.0 * math.pi)
    if model.separable_g_hat is not None:
        u, w = _hat_quadrature(basis, "f")
        gh = np.abs(np.asarray(model.separable_g_hat(u), dtype=float))
        ph = np.abs(np.atleast_1d(basis.f_hat(u)))
        val = float(np.sum(w * gh * ph)) / (2.0 * math.pi)
        return val * val
    if model.double_transform is not None:
        z, wz = gauss_nodes(-64.0, 64.0, 1024)
        F = np.abs(model.double_transform(z[:, None], z[None, :]))
        ph = np.abs(np.atleast_1d(basis.f_hat(z)))
        return float((wz * ph) @ F @ (wz * ph)) / (2.0 * math.pi) ** 2
    raise ValidationError("scaling-coefficient bound needs spectral data")
