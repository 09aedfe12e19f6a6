"""Finite views of the unfolded basis, and window/cutoff handling."""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..complexes import EXACT, FilteredComplex, Key, unfold_generators
from ..errors import UsageError
from ..fields import parse_rational


class _Auto:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "AUTO"


AUTO = _Auto()


@dataclass(frozen=True)
class Window:
    """Finite range of bidegrees ``(p, q)`` plus an energy cutoff (or AUTO)."""

    p_min: int
    p_max: int
    q_min: int = 0
    q_max: int = 0
    energy: object = AUTO

    def __post_init__(self):
        if self.p_min > self.p_max:
            raise UsageError(f"empty p range [{self.p_min}, {self.p_max}]")
        if self.q_min < 0 or self.q_min > self.q_max:
            raise UsageError(f"invalid q range [{self.q_min}, {self.q_max}]")
        if self.energy is not AUTO and self.energy is not None:
            e = parse_rational(self.energy)
            if e < 0:
                raise UsageError("energy cutoff must be non-negative")
            object.__setattr__(self, "energy", e)

    @property
    def spread(self) -> int:
        return self.p_max - self.p_min

    def bidegrees(self) -> List[Tuple[int, int]]:
        return [(p, q) for q in range(self.q_min, self.q_max + 1) for p in range(self.p_min, self.p_max + 1)]

    def contains(self, p: int, q: int) -> bool:
        return self.p_min <= p <= self.p_max and self.q_min <= q <= self.q_max

    def with_energy(self, energy) -> "Window":
        return Window(self.p_min, self.p_max, self.q_min, self.q_max, energy)

    def enlarged(self, dp: int, dq: int) -> "Window":
        return Window(self.p_min - dp, self.p_max + dp, max(0, self.q_min - dq), self.q_max + dq, self.energy)

    def describe(self) -> Dict[str, object]:
        energy = "auto" if self.energy is AUTO else (None if self.energy is None else str(self.energy))
        return {"p_min": self.p_min, "p_max": self.p_max, "q_min": self.q_min, "q_max": self.q_max,
                "energy": energy}


def entry_energy(C: FilteredComplex) -> Fraction:
    """Largest ``|ω|`` of an exponent occurring in the differential."""
    N = C.novikov
    best = Fraction(0)
    for g in range(len(C.generators)):
        for (_, e, _) in C.differential_row(g):
            best = max(best, abs(N.omega(e)))
    return best


def resolve_energy(C: FilteredComplex, w: Window, r: Optional[int] = None) -> Optional[Fraction]:
    """Turn the window's cutoff into a number (None means no cutoff needed)."""
    N = C.novikov
    if w.energy is not AUTO:
        if w.energy is None and N.needs_energy_bound():
            raise UsageError("this Novikov lattice needs an explicit energy cutoff")
        return w.energy
    if N.rank == 0:
        return None
    k = C.truncation_order
    K = int(k) if k != EXACT else w.spread + 2
    if r is not None:
        K = max(K, r)
    W = entry_energy(C)
    S = Fraction(0)
    if not N.needs_energy_bound():
        margin = 2 * (K + 1)
        for _, e in unfold_generators(C, (w.p_min - margin, w.p_max + margin), None):
            S = max(S, abs(e.omega))
    E = (K + 1) * W + S
    if E == 0 and N.needs_energy_bound():
        raise UsageError("cannot derive an energy cutoff automatically; pass one explicitly")
    return E


def worker_count(workers: Optional[int] = None) -> int:
    if workers is not None:
        if workers < 1:
            raise UsageError("worker count must be positive")
        return workers
    env = os.environ.get("QSERRE_THREADS")
    if env is None or env == "":
        return 1
    try:
        n = int(env)
    except ValueError:
        raise UsageError(f"QSERRE_THREADS must be a positive integer, got {env!r}") from None
    if n < 1:
        raise UsageError(f"QSERRE_THREADS must be a positive integer, got {env!r}")
    return n


class UnfoldedView:
    """Basis keys of a complex, optionally restricted to a box and energy band.

    With bounds set this is the subquotient complex spanned by the keys in
    the box: the differential is projected onto it.
    """

    def __init__(
        self,
        C: FilteredComplex,
        energy: Optional[Fraction] = None,
        p_range: Optional[Tuple[int, int]] = None,
        q_range: Optional[Tuple[int, int]] = None,
    ):
        self.complex = C
        self.energy = energy
        self.p_range = p_range
        self.q_range = q_range
        self.bounded = p_range is not None or q_range is not None
        self._basis: Dict[Tuple[int, int], Tuple[Key, ...]] = {}
        self._lock = threading.Lock()

    def in_view(self, key: Key) -> bool:
        C = self.complex
        if self.p_range is not None:
            fp = C.fp(key)
            if not self.p_range[0] <= fp <= self.p_range[1]:
                return False
        if self.q_range is not None:
            q = C.q(key)
            if not self.q_range[0] <= q <= self.q_range[1]:
                return False
        if self.energy is not None and abs(C.novikov.omega(key[1])) > self.energy:
            return False
        return True

    def basis(self, fp: int, q: int) -> Tuple[Key, ...]:
        """Keys of filtration ``fp`` and complementary degree ``q`` (sorted)."""
        cached = self._basis.get((fp, q))
        if cached is not None:
            return cached
        C = self.complex
        out: List[Key] = []
        ok = q >= 0
        if self.p_range is not None and not self.p_range[0] <= fp <= self.p_range[1]:
            ok = False
        if self.q_range is not None and not self.q_range[0] <= q <= self.q_range[1]:
            ok = False
        if ok:
            words = C.algebra.basis(q)
            if words:
                for i, g in enumerate(C.generators):
                    diff = g.p - fp
                    if diff % 2:
                        continue
                    for e in C.novikov.exponents_with_c1(diff // 2, self.energy):
                        out.extend((i, e, w) for w in words)
        result = tuple(sorted(out))
        with self._lock:
            self._basis[(fp, q)] = result
        return result

    def degree_basis(self, n: int, lo: int, hi: int) -> List[Key]:
        """Keys of total degree ``n`` with filtration in ``[lo, hi]``."""
        out: List[Key] = []
        for fp in range(lo, hi + 1):
            out.extend(self.basis(fp, n - fp))
        return out

    def d(self, key: Key) -> Dict[Key, object]:
        out = self.complex.d_key(key)
        if self.bounded:
            out = {k: c for k, c in out.items() if self.in_view(k)}
        return out

    def d_vector(self, vec) -> Dict[Key, object]:
        from ..linalg import axpy

        f = self.complex.field
        out: Dict[Key, object] = {}
        for k, c in vec.items():
            axpy(f, out, c, self.d(k))
        return out

    def filtration_bounds(self) -> Tuple[float, float]:
        if self.p_range is None:
            return -math.inf, math.inf
        return self.p_range
