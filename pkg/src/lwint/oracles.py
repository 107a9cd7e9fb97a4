"""Closed-form expectations used to cross-check simulated statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass


def oracle_coupon_collector(n: int) -> float:
    """Expected uniform draws until all ``n`` values are seen: ``n * H_n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return n * math.fsum(1.0 / i for i in range(1, n + 1))


def oracle_duplicate_fraction(n: int, k: int) -> float:
    """Expected share of repeated values among ``k`` independent uniform picks from ``n``.

    ``(k - E[distinct]) / k`` with ``E[distinct] = n * (1 - (1 - 1/n)**k)``.
    """
    if n < 1 or k < 1:
        raise ValueError(f"n and k must be >= 1, got n={n}, k={k}")
    distinct = n * (1.0 - (1.0 - 1.0 / n) ** k)
    return (k - distinct) / k


@dataclass(frozen=True)
class BloomOracle:
    K: int
    N: int
    m: int
    fp_rate: float

    @property
    def optimal_m(self) -> float:
        """``(ln 2) K / N``; raises ZeroDivisionError for an empty filter."""
        if self.N == 0:
            raise ZeroDivisionError("optimal hash count undefined for N = 0")
        return math.log(2) * self.K / self.N


def oracle_bf(K: int, N: int, m: int = 1) -> BloomOracle:
    """False-positive rate ``(1 - exp(-mN/K))**m`` of ``N`` keys in ``K`` cells."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return BloomOracle(K, N, m, (1.0 - math.exp(-m * N / K)) ** m)


def dlint_cycle_packets(n: int, v: int) -> int:
    """Forward packets per collision-free DLINT trace cycle: INIT plus n IDs in v-wide headers."""
    return -(-(n + 1) // v)
