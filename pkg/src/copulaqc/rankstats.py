"""Rank-based statistics for bivariate samples and MCMC chains.

Pseudo-observations, an O(n log n) Kendall's tau, the quadratic
double-loop oracle it is tested against, resampling estimates of the
tau standard deviation, and effective sample size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainStats",
    "pseudo_observations",
    "kendall_tau",
    "kendall_tau_bruteforce",
    "sigma_tau_jackknife",
    "sigma_tau_bootstrap",
    "ess",
    "chain_stats",
]


def _as_pairs(sample) -> np.ndarray:
    a = np.asarray(sample, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of pairs, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError(f"need at least 2 points, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("sample contains non-finite values")
    return a


def _average_ranks(x: np.ndarray) -> np.ndarray:
    # Average rank for ties: midpoint of the 1-based rank range per value.
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sx = x[order]
    boundaries = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1], True])
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        ranks[order[lo:hi]] = 0.5 * (lo + 1 + hi)
    return ranks


def pseudo_observations(sample) -> np.ndarray:
    """Rank-transform a sample to the open unit square.

    u_i = rank(x_i) / (n + 1) per coordinate, with average ranks for ties.
    """
    a = _as_pairs(sample)
    n = a.shape[0]
    out = np.column_stack([_average_ranks(a[:, 0]), _average_ranks(a[:, 1])])
    return out / (n + 1.0)


def _inversions(a: np.ndarray) -> int:
    """Count pairs i < j with a[i] > a[j] via bottom-up merge counting."""
    n = len(a)
    if n < 2:
        return 0
    # Pad to a multiple of the base block so blocks reshape cleanly.
    base = 32
    m = -(-n // base) * base
    buf = np.full(m, np.inf)
    buf[:n] = a
    # Within-block inversions by direct comparison, then sort each block.
    blocks = buf.reshape(-1, base)
    i_gt_j = blocks[:, :, None] > blocks[:, None, :]
    upper = np.triu(np.ones((base, base), dtype=bool), k=1)
    inv = int(np.sum(i_gt_j & upper[None, :, :]))
    buf = np.sort(blocks, axis=1).reshape(-1)
    width = base
    while width < m:
        for lo in range(0, m, 2 * width):
            mid, hi = lo + width, min(lo + 2 * width, m)
            if mid >= hi:
                continue
            left, right = buf[lo:mid], buf[mid:hi]
            inv += int(np.sum(width - np.searchsorted(left, right, side="right")))
            buf[lo:hi] = np.sort(buf[lo:hi], kind="stable")
        width *= 2
    return inv


def _tie_pairs(x: np.ndarray) -> int:
    _, counts = np.unique(x, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def kendall_tau(pobs) -> float:
    """Empirical Kendall's tau, (concordant - discordant) / C(n, 2).

    Computed in O(n log n): sort by the first coordinate (ties broken by
    the second) and count strict inversions of the second coordinate by
    merge counting.  Tied pairs contribute zero to the numerator; the
    denominator is always C(n, 2).
    """
    a = _as_pairs(pobs)
    n = a.shape[0]
    order = np.lexsort((a[:, 1], a[:, 0]))
    v = a[order, 1]
    discordant = _inversions(v)
    n0 = n * (n - 1) // 2
    n1 = _tie_pairs(a[:, 0])
    n2 = _tie_pairs(a[:, 1])
    n3 = _tie_pairs(a[:, 0] + 1j * a[:, 1])
    concordant = n0 - n1 - n2 + n3 - discordant
    return (concordant - discordant) / n0


def kendall_tau_bruteforce(pobs) -> float:
    """Quadratic reference implementation of ``kendall_tau``.

    Walks every pair explicitly; intended as a test oracle (n <= 5000).
    """
    a = _as_pairs(pobs)
    n = a.shape[0]
    if n > 5000:
        raise ValueError("bruteforce tau is quadratic; use kendall_tau for n > 5000")
    x = a[:, 0].tolist()
    y = a[:, 1].tolist()
    s = 0
    for i in range(n):
        xi, yi = x[i], y[i]
        for j in range(i + 1, n):
            d = (xi - x[j]) * (yi - y[j])
            if d > 0:
                s += 1
            elif d < 0:
                s -= 1
    return s / (n * (n - 1) / 2)


def _per_point_sign_sums(a: np.ndarray, chunk: int = 256) -> np.ndarray:
    """s_i = sum_j sign((x_i-x_j)(y_i-y_j)), computed in row chunks."""
    n = a.shape[0]
    x, y = a[:, 0], a[:, 1]
    s = np.empty(n)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        dx = np.sign(x[lo:hi, None] - x[None, :])
        dy = np.sign(y[lo:hi, None] - y[None, :])
        s[lo:hi] = np.sum(dx * dy, axis=1)
    return s


def sigma_tau_jackknife(pobs) -> float:
    """Leave-one-out estimate of the standard deviation of sqrt(n) tau_hat.

    Returns sigma such that sigma / sqrt(n) estimates sd(tau_hat).  A
    perfectly concordant (or discordant) sample has no leave-one-out
    variability and yields 0.0; an all-identical sample is an error.
    """
    a = _as_pairs(pobs)
    n = a.shape[0]
    if n < 10:
        raise ValueError(f"jackknife needs n >= 10, got {n}")
    if np.all(a == a[0]):
        raise ValueError("degenerate sample: all points identical")
    s = _per_point_sign_sums(a)
    total = s.sum() / 2.0
    denom = (n - 1) * (n - 2) / 2.0
    loo = (total - s) / denom
    var_jack = (n - 1) / n * np.sum((loo - loo.mean()) ** 2)
    return float(np.sqrt(n * var_jack))


def sigma_tau_bootstrap(pobs, n_boot: int = 1000, seed: int = 0) -> float:
    """Bootstrap alternative to the jackknife tau standard deviation."""
    a = _as_pairs(pobs)
    n = a.shape[0]
    if n < 10:
        raise ValueError(f"bootstrap needs n >= 10, got {n}")
    rng = np.random.default_rng(seed)
    taus = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, size=n)
        taus[b] = kendall_tau(a[idx])
    return float(np.sqrt(n) * taus.std(ddof=1))


def ess(chain) -> float:
    """Effective sample size of a scalar chain.

    ESS = n / (1 + 2 sum rho_k) with the autocovariance sum truncated by
    the initial-positive-sequence rule on pair sums rho_{2m} + rho_{2m+1};
    the result is clipped to [1, n].  A zero-variance chain has ESS 1.
    """
    x = np.asarray(chain, dtype=float).ravel()
    n = len(x)
    if n < 10:
        raise ValueError(f"ess needs a chain of length >= 10, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("chain contains non-finite values")
    x = x - x.mean()
    var = np.dot(x, x) / n
    if var == 0.0:
        return 1.0
    # FFT autocovariances gamma_k / gamma_0 for all lags.
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n] / n
    rho = acov / var
    pair = rho[: 2 * (n // 2)].reshape(-1, 2).sum(axis=1)
    positive = np.flatnonzero(pair <= 0.0)
    cutoff = positive[0] if len(positive) else len(pair)
    tau_int = 2.0 * np.sum(pair[:cutoff]) - 1.0
    if tau_int <= 0.0:
        return float(n)
    return float(min(max(n / tau_int, 1.0), n))


@dataclass(frozen=True)
class ChainStats:
    """Summary statistics of a bivariate chain."""

    ess_per_dim: tuple[float, ...]
    mean_ess: float
    tau_hat: float
    n: int
    acceptance_rate: float | None = None


def chain_stats(states, acceptance_rate: float | None = None) -> ChainStats:
    """Compute per-dimension ESS and the empirical tau of a chain."""
    a = _as_pairs(states)
    per_dim = tuple(ess(a[:, d]) for d in range(a.shape[1]))
    return ChainStats(
        ess_per_dim=per_dim,
        mean_ess=float(np.mean(per_dim)),
        tau_hat=kendall_tau(pseudo_observations(a)),
        n=a.shape[0],
        acceptance_rate=acceptance_rate,
    )
