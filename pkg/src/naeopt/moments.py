"""Moment functions of RPR2 rounding rules.

For a rounding function f and unit vectors v_1..v_k with pairwise inner
products b_ij, the k-wise moment F_k[f](b_12, ...) is E[X_1 ... X_k] where
X_i are the +-1 outputs of the randomized rounding.  The workhorse facts:

* F_2[f](rho) is the Gaussian noise stability of f at correlation rho;
  for odd f it is odd, non-decreasing, and convex on [0, 1].
* When all pairwise biases equal rho >= 0, the 2l-wise moment collapses to
  a one-dimensional integral  F_2l(rho) = int (U_sqrt(rho) f)^(2l) phi,
  where U_eta is the Ornstein-Uhlenbeck noise operator.
* The satisfaction probability of an NAE_k clause on a symmetric
  configuration is p_f(k, rho) = (2^(k-1) - 1 - sum_{i even} C(k,i) F_i(rho)) / 2^(k-1).

Exact bivariate rectangle probabilities are computed from Owen's T
function, which keeps absolute error near machine precision uniformly in
rho; Monte Carlo estimators serve as the oracle for moments with no
analytic route (general Gram matrices, 4-wise and higher).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri, owens_t

from .core import GramConfig, StepFunction, validate_gram
from .errors import DomainError

_TAIL = 10.0  # Gaussian mass beyond |x| = 10 is < 1.6e-23, below every tolerance


@dataclass(frozen=True)
class MomentEstimate:
    """A moment value with its Monte Carlo standard error (0 when exact)."""

    value: float
    std_error: float
    samples: int

    def __post_init__(self):
        if self.std_error < 0:
            raise DomainError("std_error must be nonnegative")


def exact(value: float) -> MomentEstimate:
    return MomentEstimate(float(value), 0.0, 0)


# ---------------------------------------------------------------------------
# scalar normal helpers


def probit(p) -> float:
    """Inverse standard normal CDF; domain (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise DomainError("probit requires 0 < p < 1")
    out = ndtri(p)
    return float(out) if out.ndim == 0 else out


def equal_prob_grid(n: int) -> np.ndarray:
    """Finite breakpoints a_1 < ... < a_{n-1} with Phi mass 1/n per cell."""
    if n < 2:
        raise DomainError("need at least 2 cells")
    return ndtri(np.arange(1, n) / n)


# ---------------------------------------------------------------------------
# bivariate normal rectangles


def _bvn_cdf(h, k, rho: float):
    """P(X <= h, Y <= k) for standard bivariate normals with correlation rho.

    Owen (1956): Phi2(h,k) = (Phi(h)+Phi(k))/2 - T(h,a_h) - T(k,a_k) - delta
    with a_h = (k - rho h)/(h sqrt(1-rho^2)) and delta = 1/2 iff hk < 0.
    Zero arguments are handled by the closed form
    Phi2(0,k) = Phi(k)/2 - T(k, -rho/sqrt(1-rho^2)).  Requires |rho| < 1.
    """
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    h, k = np.broadcast_arrays(h, k)
    out = np.empty(h.shape, dtype=float)

    root = np.sqrt((1.0 - rho) * (1.0 + rho))

    neg_inf = np.isneginf(h) | np.isneginf(k)
    h_inf = np.isposinf(h) & ~neg_inf
    k_inf = np.isposinf(k) & ~neg_inf & ~h_inf
    finite = ~(neg_inf | h_inf | k_inf)

    out[neg_inf] = 0.0
    if np.any(h_inf):
        out[h_inf] = ndtr(np.where(np.isposinf(k), np.inf, k))[h_inf]
    if np.any(k_inf):
        out[k_inf] = ndtr(h)[k_inf]

    hf, kf = h[finite], k[finite]
    res = np.empty(hf.shape, dtype=float)
    hz, kz = hf == 0.0, kf == 0.0

    m = hz  # covers the double-zero case: Phi2(0,0) = 1/4 + arcsin(rho)/(2 pi)
    if np.any(m):
        res[m] = 0.5 * ndtr(kf[m]) - owens_t(kf[m], -rho / root)
    m = kz & ~hz
    if np.any(m):
        res[m] = 0.5 * ndtr(hf[m]) - owens_t(hf[m], -rho / root)
    m = ~(hz | kz)
    if np.any(m):
        hg, kg = hf[m], kf[m]
        with np.errstate(divide="ignore", over="ignore"):
            ah = (kg - rho * hg) / (hg * root)
            ak = (hg - rho * kg) / (kg * root)
        delta = np.where(hg * kg < 0.0, 0.5, 0.0)
        res[m] = (0.5 * (ndtr(hg) + ndtr(kg))
                  - owens_t(hg, ah) - owens_t(kg, ak) - delta)
    out[finite] = res
    return np.clip(out, 0.0, 1.0)


def binormal_rect(rho: float, x_lo, x_hi, y_lo, y_hi) -> float:
    """P[(X, Y) in [x_lo,x_hi] x [y_lo,y_hi]] at correlation rho.

    Bounds may be +-inf.  |rho| = 1 collapses to one dimension and is
    evaluated exactly.
    """
    if x_lo > x_hi or y_lo > y_hi:
        raise DomainError("need x_lo <= x_hi and y_lo <= y_hi")
    if rho >= 1.0:
        lo, hi = max(x_lo, y_lo), min(x_hi, y_hi)
        return float(max(0.0, ndtr(hi) - ndtr(lo)))
    if rho <= -1.0:
        lo, hi = max(x_lo, -y_hi), min(x_hi, -y_lo)
        return float(max(0.0, ndtr(hi) - ndtr(lo)))
    F = _bvn_cdf(np.array([[x_hi, x_hi], [x_lo, x_lo]]),
                 np.array([[y_hi, y_lo], [y_hi, y_lo]]), rho)
    return float(max(0.0, F[0, 0] - F[0, 1] - F[1, 0] + F[1, 1]))


def rect_lattice(edges_x: np.ndarray, edges_y: np.ndarray, rho: float) -> np.ndarray:
    """Matrix of cell-pair probabilities for the partitions given by edges.

    Entry (i, j) is P[(X,Y) in cell_i x cell_j]; computed from one CDF
    lattice by second differences, so an (n x m) table costs (n+1)(m+1)
    CDF evaluations.
    """
    if abs(rho) >= 1.0:
        # degenerate: Y = rho*X exactly
        px = np.diff(ndtr(edges_x))
        n, m = len(edges_x) - 1, len(edges_y) - 1
        M = np.zeros((n, m))
        ey = edges_y if rho > 0 else -edges_y[::-1]
        for j in range(m):
            lo, hi = ey[j], ey[j + 1]
            for i in range(n):
                l, h = max(edges_x[i], lo), min(edges_x[i + 1], hi)
                if h > l:
                    M[i, j if rho > 0 else m - 1 - j] = ndtr(h) - ndtr(l)
        return M
    F = _bvn_cdf(edges_x[:, None], edges_y[None, :], rho)
    M = F[1:, 1:] - F[:-1, 1:] - F[1:, :-1] + F[:-1, :-1]
    np.maximum(M, 0.0, out=M)
    return M


# ---------------------------------------------------------------------------
# noise operator and exact F_2


def noise_operator(f: StepFunction, eta: float, x):
    """(U_eta f)(x) = E[f(eta x + sqrt(1-eta^2) Z)], closed form for steps.

    Each step contributes b_i times a difference of four normal CDFs; the
    result is bounded by max |b_i| and reduces to f itself at eta = 1 and
    to the mean (0 for odd f) at eta = 0.
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError("eta must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    if eta == 1.0:
        out = np.asarray(f(x))
        return float(out) if out.ndim == 0 else out
    s = np.sqrt((1.0 - eta) * (1.0 + eta))
    a = np.concatenate([[0.0], f.breakpoints, [np.inf]])
    tot = np.zeros(x.shape)
    ex = eta * x
    for i, b in enumerate(f.values):
        if b == 0.0:
            continue
        lo, hi = a[i], a[i + 1]
        tot += b * (ndtr((hi - ex) / s) - ndtr((lo - ex) / s)
                    - ndtr((-lo - ex) / s) + ndtr((-hi - ex) / s))
    return float(tot) if tot.ndim == 0 else tot


def f2(f: StepFunction, rho: float) -> float:
    """Noise stability E[f(X) f(Y)] for rho-correlated standard Gaussians.

    Computed as a signed double sum of exact rectangle probabilities over
    the step cells; rho = +-1 short-circuits to +-int f^2 phi.
    """
    edges, vals = f.cells()
    if rho >= 1.0 or rho <= -1.0:
        mass = np.diff(ndtr(edges))
        total = float(np.dot(vals * vals, mass))
        return total if rho > 0 else -total
    M = rect_lattice(edges, edges, rho)
    return float(vals @ M @ vals)


def f2_selfenergy(f: StepFunction) -> float:
    """int f^2 phi = F_2[f](1)."""
    return f2(f, 1.0)


# ---------------------------------------------------------------------------
# fixed Gauss-Legendre panels (deterministic, vectorizable quadrature)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


def _panel_grid(lo: float, hi: float, panels: int):
    edges = np.linspace(lo, hi, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    xs = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    ws = np.broadcast_to(half[:, None] * _GL_WEIGHTS[None, :], (panels, 40)).ravel()
    return xs, ws


_QX, _QW = _panel_grid(-_TAIL, _TAIL, 24)
_QPHI = np.exp(-_QX * _QX / 2.0) / np.sqrt(2.0 * np.pi)


def f2l_symmetric(f: StepFunction, rho: float, ell: int) -> float:
    """F_2l(rho, ..., rho) = int (U_sqrt(rho) f)^(2l) phi dx for rho >= 0.

    The common-component decomposition behind this identity requires a
    nonnegative correlation; negative-rho moments beyond F_2 have no
    one-dimensional form and belong to moment_mc.
    """
    if rho < 0.0:
        raise DomainError("f2l_symmetric needs rho >= 0; use moment_mc for rho < 0")
    if ell < 1:
        raise DomainError("ell must be a positive integer")
    if rho == 0.0:
        return 0.0
    u = noise_operator(f, float(np.sqrt(rho)), _QX)
    return float(np.sum(_QW * _QPHI * u ** (2 * ell)))


def sat_prob_symmetric(f: StepFunction, k: int, rho: float) -> float:
    """P[NAE_k satisfied] on the symmetric configuration with all biases rho.

    For rho >= 0 evaluates 1 - 2^-k int ((1+u)^k + (1-u)^k) phi with
    u = U_sqrt(rho) f; for k <= 3 only F_2 enters, so negative rho is
    served through the exact two-dimensional route.
    """
    if k < 2:
        raise DomainError("NAE clauses need k >= 2")
    if rho == 0.0:
        # independent projections: every F_i (i >= 1) of an odd f vanishes
        return 1.0 - 2.0 ** (1 - k)
    if rho < 0.0:
        if k > 3:
            raise DomainError("rho < 0 with k >= 4 has no 1-d form; use moment_mc")
        if k == 2:
            return (1.0 - f2(f, rho)) / 2.0
        return (3.0 - 3.0 * f2(f, rho)) / 4.0
    if k == 2:
        return (1.0 - f2(f, rho)) / 2.0
    if k == 3:
        return (3.0 - 3.0 * f2(f, rho)) / 4.0
    u = noise_operator(f, float(np.sqrt(rho)), _QX)
    integrand = (1.0 + u) ** k + (1.0 - u) ** k
    return float(1.0 - 2.0 ** (-k) * np.sum(_QW * _QPHI * integrand))


# ---------------------------------------------------------------------------
# Monte Carlo moments


def _factor_psd(m: np.ndarray, tol: float) -> np.ndarray:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh((m + m.T) / 2)
        if w.min() < -tol:
            raise DomainError(f"matrix is indefinite (min eigenvalue {w.min():.3e})")
        return v * np.sqrt(np.clip(w, 0.0, None))


def moment_mc(f: StepFunction, gram: GramConfig, samples: int = 10**6,
              seed: int = 0, batch: int = 10**6) -> MomentEstimate:
    """Monte Carlo estimate of F_k[f] at the pairwise biases in ``gram``.

    Factors B = L L^T, draws z ~ N(0, I), projects t = L z and averages
    prod_i f(t_i); the rounding coins integrate out exactly because the
    X_i are conditionally independent with mean f(t_i).
    """
    diag = validate_gram(gram)
    if not diag.accepted:
        raise DomainError(f"invalid Gram matrix: {diag}")
    L = _factor_psd(gram.matrix, 1e-9)
    k = gram.order
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        t = rng.standard_normal((m, k)) @ L.T
        prod = np.prod(f(t), axis=1)
        total += float(prod.sum())
        total_sq += float(np.dot(prod, prod))
        done += m
    mean = total / samples
    var = max(0.0, total_sq / samples - mean * mean)
    return MomentEstimate(mean, float(np.sqrt(var / samples)), samples)


# ---------------------------------------------------------------------------
# the F_4 < 0 witness


def f4_witness_vectors(delta: float) -> np.ndarray:
    """Four unit vectors with all pairwise biases positive but F_4 < 0.

    v_2 + v_3 + v_4 = (2-delta) v_1; biases are (2-delta)/3 against v_1 and
    (1 - 4 delta + delta^2)/6 among v_2, v_3, v_4, all positive for
    delta in (0, 2 - sqrt(3)).
    """
    if not 0.0 < delta < 2.0 - np.sqrt(3.0):
        raise DomainError("delta must lie in (0, 2 - sqrt(3))")
    c = (2.0 - delta) / 3.0
    r = np.sqrt(5.0 + 4.0 * delta - delta * delta) / 3.0
    return np.array([
        [1.0, 0.0, 0.0],
        [c, r, 0.0],
        [c, -r / 2.0, r * np.sqrt(3.0) / 2.0],
        [c, -r / 2.0, -r * np.sqrt(3.0) / 2.0],
    ])


def f4_negative_witness(delta: float, eps: float, samples: int = 10**8,
                        seed: int = 0, batch: int = 5 * 10**6) -> MomentEstimate:
    """Estimate E[x1 x2 x3 x4] under the interval rounding scheme.

    Rounding: draw u ~ N(0, I3); x_i = sign(v_i . u) when |v_i . u| lands in
    [eps, 1.5 eps), otherwise an independent fair coin.  Coins are averaged
    out analytically: a sample contributes the sign product when all four
    are determined and 0 otherwise, which leaves the estimator unbiased
    with far smaller variance.  For small eps the estimate is negative even
    though every pairwise bias is positive.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    v = f4_witness_vectors(delta)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        t = rng.standard_normal((m, 3)) @ v.T
        a = np.abs(t)
        det = ((a >= eps) & (a < 1.5 * eps)).all(axis=1)
        contrib = np.prod(np.sign(t[det]), axis=1)
        total += float(contrib.sum())
        total_sq += float(np.dot(contrib, contrib))
        done += m
    mean = total / samples
    var = max(0.0, total_sq / samples - mean * mean)
    return MomentEstimate(mean, float(np.sqrt(var / samples)), samples)
