"""Privacy amplification with Toeplitz hashing, and key-length budgeting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import fftconvolve

BUDGET_POLICY = "n_out = floor(l*(I_B - I_E)) - leak_excess - s  (artifact policy, no finite-size terms)"


def _bits(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 1 or (a.size and (a.min() < 0 or a.max() > 1)):
        raise ValueError("expected a 1-D array of 0/1 values")
    return a.astype(np.uint8)


@dataclass(frozen=True)
class HashSpec:
    """Toeplitz matrix over GF(2) with T[i, j] = seed[i - j + n_in - 1]."""

    n_in: int
    n_out: int
    seed_bits: np.ndarray

    def __post_init__(self):
        if self.n_in < 1 or not 0 <= self.n_out <= self.n_in:
            raise ValueError("need 0 <= n_out <= n_in and n_in >= 1")
        s = _bits(self.seed_bits)
        if len(s) != self.seed_length(self.n_in, self.n_out):
            raise ValueError(f"seed must have n_in + n_out - 1 = {self.seed_length(self.n_in, self.n_out)} bits")
        object.__setattr__(self, "seed_bits", s)

    @staticmethod
    def seed_length(n_in: int, n_out: int) -> int:
        return n_in + n_out - 1 if n_out else 0

    @classmethod
    def random(cls, n_in: int, n_out: int, seed: int) -> "HashSpec":
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x7A5E])))
        return cls(n_in, n_out, rng.integers(0, 2, cls.seed_length(n_in, n_out), dtype=np.uint8))

    def matrix(self) -> np.ndarray:
        """Dense (n_out, n_in) matrix; for tests and small sizes."""
        i = np.arange(self.n_out)[:, None]
        j = np.arange(self.n_in)[None, :]
        return self.seed_bits[i - j + self.n_in - 1]


def compress(bits, spec: HashSpec) -> np.ndarray:
    """Toeplitz hash T @ bits over GF(2), computed as a real convolution."""
    x = _bits(bits)
    if len(x) != spec.n_in:
        raise ValueError(f"input has {len(x)} bits, hash expects {spec.n_in}")
    if spec.n_out == 0:
        return np.zeros(0, dtype=np.uint8)
    full = fftconvolve(spec.seed_bits.astype(float), x.astype(float))
    seg = full[spec.n_in - 1 : spec.n_in - 1 + spec.n_out]
    counts = np.rint(seg)
    if np.max(np.abs(seg - counts), initial=0.0) > 0.25:
        raise ArithmeticError("FFT convolution lost integer precision")
    return (counts.astype(np.int64) & 1).astype(np.uint8)


def collision_rate(x, y, n_out: int, trials: int, seed: int, chunk: int = 8192) -> float:
    """Fraction of random Toeplitz seeds with h(x) = h(y)."""
    d = _bits(x) ^ _bits(y)
    n_in = len(d)
    if not d.any():
        raise ValueError("inputs must differ")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0xC011])))
    rev = d[::-1].astype(np.int64)
    hits = 0
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        s = rng.integers(0, 2, (c, n_in + n_out - 1), dtype=np.uint8)
        # Row i of T is s[i : i + n_in] reversed, so T d = windows @ reversed(d).
        win = sliding_window_view(s, n_in, axis=1)
        h = (win.astype(np.int64) @ rev) & 1
        hits += int(np.count_nonzero(~h.any(axis=1)))
        done += c
    return hits / trials


@dataclass(frozen=True)
class KeyBudget:
    elements: int
    i_b: float
    i_e: float
    leak_excess: float
    security: int
    n_out: int

    @property
    def no_secrecy(self) -> bool:
        return self.i_b <= self.i_e

    @property
    def rate(self) -> float:
        return self.n_out / self.elements

    policy = BUDGET_POLICY


def budget(
    elements: int,
    i_b: float,
    i_e: float | None = None,
    leak_excess: float = 0.0,
    security: int = 100,
    i_total: float | None = None,
) -> KeyBudget:
    """Final key length from the information balance.

    ``i_b`` and ``i_e`` are bits per element; ``leak_excess`` is the total
    reconciliation disclosure beyond the conditional-entropy bound.  When
    ``i_e`` is unknown it is bounded by ``i_total - i_b``.
    """
    if elements < 0 or security < 0 or leak_excess < 0:
        raise ValueError("elements, security and leak_excess must be nonnegative")
    if i_e is None:
        if i_total is None:
            raise ValueError("give i_e or i_total")
        i_e = max(i_total - i_b, 0.0)
    if i_b < 0 or i_e < 0:
        raise ValueError("information rates must be nonnegative")
    if i_total is not None and (i_b > i_total * (1 + 1e-12) or i_e > i_total * (1 + 1e-12)):
        raise ValueError("rates must not exceed I")
    if i_b <= i_e:
        n_out = 0
    else:
        n_out = max(0, math.floor(elements * (i_b - i_e)) - math.ceil(leak_excess) - security)
    return KeyBudget(elements, i_b, i_e, leak_excess, security, n_out)


# --------------------------------------------------------------------------
# Bit files: uint64 little-endian bit count, then bits packed LSB-first
# --------------------------------------------------------------------------


def pack_bits(bits) -> bytes:
    b = _bits(bits)
    return np.uint64(len(b)).tobytes() + np.packbits(b, bitorder="little").tobytes()


def unpack_bits(data: bytes) -> np.ndarray:
    if len(data) < 8:
        raise ValueError("bit file too short for its header")
    n = int(np.frombuffer(data[:8], dtype="<u8")[0])
    body = np.frombuffer(data[8:], dtype=np.uint8)
    if len(body) != (n + 7) // 8:
        raise ValueError(f"bit file declares {n} bits but holds {len(body)} bytes")
    return np.unpackbits(body, count=n, bitorder="little")


def write_bits(path: str | Path, bits) -> None:
    Path(path).write_bytes(pack_bits(bits))


def read_bits(path: str | Path) -> np.ndarray:
    return unpack_bits(Path(path).read_bytes())
