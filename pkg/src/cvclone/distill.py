"""Sliced reconciliation of correlated Gaussian values into common bit strings.

Alice holds X ~ N(0, S) and Bob X' = X + N(0, s).  X is quantized into 2^m
intervals and the interval index is written as m binary slices, least
significant bit first.  Slices are corrected one after another; Bob's guess
of slice i uses his value and the already-corrected slices below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import minimize
from scipy.special import entr, log_ndtr, logsumexp, ndtr
from scipy.stats import norm

from . import _backend

LN2 = math.log(2.0)
QUAD_TOL = 1e-9
SQRT_2PI = math.sqrt(2 * math.pi)
LEAK_MODES = ("ideal", "cascade")


def binary_entropy(p):
    """h(p) in bits; vectorized, with h(0) = h(1) = 0."""
    p = np.asarray(p, dtype=float)
    out = (entr(p) + entr(1 - p)) / LN2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class JointChannel:
    """X ~ N(0, signal_var), X' = X + N(0, noise_var)."""

    signal_var: float
    noise_var: float

    def __post_init__(self):
        if not (self.signal_var > 0 and self.noise_var > 0):
            raise ValueError("signal and noise variances must be positive")

    @classmethod
    def from_snr(cls, snr: float, noise_var: float = 1.0) -> "JointChannel":
        return cls(snr * noise_var, noise_var)

    @property
    def snr(self) -> float:
        return self.signal_var / self.noise_var

    @property
    def capacity(self) -> float:
        return 0.5 * math.log2(1 + self.snr)

    @property
    def output_std(self) -> float:
        return math.sqrt(self.signal_var + self.noise_var)

    def posterior(self) -> tuple[float, float]:
        """(k, s) with X | X'=y ~ N(k y, s^2)."""
        tot = self.signal_var + self.noise_var
        return self.signal_var / tot, math.sqrt(self.signal_var * self.noise_var / tot)

    def sample(self, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0xD157])))
        x = math.sqrt(self.signal_var) * rng.standard_normal(n)
        return x, x + math.sqrt(self.noise_var) * rng.standard_normal(n)


@dataclass(frozen=True)
class IntervalPartition:
    """2^m intervals [b_{j-1}, b_j) with b_0 = -inf and b_{2^m} = +inf."""

    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or len(b) < 1:
            raise ValueError("need at least one boundary")
        k = len(b) + 1
        if k & (k - 1):
            raise ValueError(f"{len(b)} boundaries do not give a power-of-two interval count")
        if not np.all(np.isfinite(b)) or np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be finite and strictly increasing")
        object.__setattr__(self, "boundaries", b)

    @property
    def intervals(self) -> int:
        return len(self.boundaries) + 1

    @property
    def m(self) -> int:
        return self.intervals.bit_length() - 1

    def label(self, x) -> np.ndarray:
        """Interval index T(x), left-closed intervals."""
        return np.searchsorted(self.boundaries, np.asarray(x, dtype=float), side="right")

    def edges(self) -> np.ndarray:
        return np.concatenate([[-np.inf], self.boundaries, [np.inf]])


@dataclass(frozen=True)
class SliceConfig:
    """Partition plus the interval -> m-bit code bijection.

    ``codes[t]`` is the bit vector of interval t as an integer; slice i
    (1-based) carries bit i-1.  The default is the interval index itself.
    """

    partition: IntervalPartition
    codes: np.ndarray | None = None

    def __post_init__(self):
        k = self.partition.intervals
        codes = np.arange(k) if self.codes is None else np.asarray(self.codes, dtype=np.int64)
        if codes.shape != (k,) or not np.array_equal(np.sort(codes), np.arange(k)):
            raise ValueError("codes must be a permutation of the interval indices")
        object.__setattr__(self, "codes", codes)

    @property
    def m(self) -> int:
        return self.partition.m

    def code_bits(self) -> np.ndarray:
        """(2^m, m) table of slice bits per interval."""
        return ((self.codes[:, None] >> np.arange(self.m)) & 1).astype(np.uint8)

    def interval_of_code(self, code) -> np.ndarray:
        inv = np.empty_like(self.codes)
        inv[self.codes] = np.arange(len(self.codes))
        return inv[np.asarray(code)]


# --------------------------------------------------------------------------
# Partition optimization
# --------------------------------------------------------------------------


class PartitionNotConverged(RuntimeError):
    def __init__(self, message: str, best: IntervalPartition):
        super().__init__(message)
        self.best = best


def _conditional_masses(edges: np.ndarray, k: float, s: float, y: np.ndarray) -> np.ndarray:
    """P(T = t | X' = y) for each y (rows) and interval t (columns)."""
    return np.clip(np.diff(ndtr((edges[None, :] - k * y[:, None]) / s), axis=1), 0.0, None)


class _GridMI:
    """Mutual information on a fixed x' grid; smooth and cheap for the optimizer."""

    def __init__(self, channel: JointChannel, points: int = 1201):
        self.k, self.s = channel.posterior()
        sy = channel.output_std
        self.y = np.linspace(-10 * sy, 10 * sy, points)
        w = np.exp(-0.5 * (self.y / sy) ** 2)
        self.w = w / w.sum()

    def __call__(self, boundaries: np.ndarray) -> float:
        edges = np.concatenate([[-np.inf], np.sort(boundaries), [np.inf]])
        p = _conditional_masses(edges, self.k, self.s, self.y)
        h_t = entr(self.w @ p).sum()
        h_t_given = self.w @ entr(p).sum(axis=1)
        return float((h_t - h_t_given) / LN2)


def _symmetric(h: np.ndarray) -> np.ndarray:
    h = np.sort(np.abs(h))
    return np.concatenate([-h[::-1], [0.0], h])


def optimize_partition(channel: JointChannel, m: int, maxiter: int = 1000) -> IntervalPartition:
    """Boundaries locally maximizing I(T(X); X').

    Starts from the equiprobable quantiles of X.  The mirror-symmetric
    family (a boundary at 0, the rest in +/- pairs) is optimized first with
    L-BFGS-B, then all boundaries are released for a final polish.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    k = 2**m
    if k == 2:
        return IntervalPartition(np.array([0.0]))
    mi = _GridMI(channel)
    start = norm.ppf(np.arange(1, k) / k) * math.sqrt(channel.signal_var)
    sym = minimize(lambda h: -mi(_symmetric(h)), start[k // 2 :], method="L-BFGS-B",
                   options={"maxiter": maxiter})
    b = _symmetric(sym.x)
    full = minimize(lambda v: -mi(v), b, method="L-BFGS-B", options={"maxiter": maxiter})
    best = np.sort(full.x) if -full.fun >= -sym.fun else b
    try:
        part = IntervalPartition(best)
    except ValueError:
        part = IntervalPartition(b)
    if not (sym.success and full.success):
        raise PartitionNotConverged(f"optimizer stopped: {full.message}", part)
    return part


# --------------------------------------------------------------------------
# Quadrature analysis
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SliceAnalysis:
    """Information-theoretic figures of a slice configuration, by quadrature.

    ``error_rates[i]`` is the MAP error of slice i+1 given X' and the
    correct lower slices; ``cond_entropies[i]`` is H(S_{i+1} | X', S_{<=i}).
    """

    entropy: float
    mutual_information: float
    cond_entropy: float
    error_rates: np.ndarray
    cond_entropies: np.ndarray

    @property
    def match_rates(self) -> np.ndarray:
        return 1 - self.error_rates


def _prefix_groups(config: SliceConfig, i: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """For slice i (0-based): per lower-bit prefix, masks of intervals with bit 0 / 1."""
    bits = config.code_bits()
    low = config.codes % (1 << i)
    groups = []
    for p in range(1 << i):
        sel = low == p
        groups.append((sel & (bits[:, i] == 0), sel & (bits[:, i] == 1)))
    return groups


def analyze(config: SliceConfig, channel: JointChannel, tol: float = QUAD_TOL) -> SliceAnalysis:
    """Entropies and slice error rates by adaptive quadrature over x'."""
    edges = config.partition.edges()
    k, s = channel.posterior()
    sy = channel.output_std
    m = config.m
    groups = [_prefix_groups(config, i) for i in range(m)]
    # Stack the masks into matrices: P(S_i=b, prefix | y) = P @ mask.
    zero_cols = np.stack([g0 for gi in groups for g0, _ in gi], axis=1).astype(float)
    one_cols = np.stack([g1 for gi in groups for _, g1 in gi], axis=1).astype(float)
    owner = np.concatenate([[i] * (1 << i) for i in range(m)])

    def integrand(z: float) -> np.ndarray:
        p = _conditional_masses(edges, k, s, np.array([sy * z]))[0]
        p0, p1 = p @ zero_cols, p @ one_cols
        tot = p0 + p1
        err = np.bincount(owner, np.minimum(p0, p1), minlength=m)
        hc = np.bincount(owner, entr(p0) + entr(p1) - entr(tot), minlength=m)
        return math.exp(-0.5 * z * z) / SQRT_2PI * np.concatenate([[entr(p).sum()], err, hc])

    vals, _ = quad_vec(integrand, -np.inf, np.inf, epsabs=tol * 1e-1, epsrel=1e-10)
    probs = np.diff(ndtr(edges / math.sqrt(channel.signal_var)))
    h_t = float(entr(probs).sum() / LN2)
    h_cond = float(vals[0] / LN2)
    return SliceAnalysis(
        entropy=h_t,
        mutual_information=h_t - h_cond,
        cond_entropy=h_cond,
        error_rates=vals[1 : 1 + m],
        cond_entropies=vals[1 + m :] / LN2,
    )


def mutual_information(partition: IntervalPartition, channel: JointChannel) -> float:
    """I(T(X); X') in bits."""
    return analyze(SliceConfig(partition), channel).mutual_information


def slice_entropy(config: SliceConfig, channel: JointChannel) -> float:
    """H(S_1..S_m) = H(T(X)) in bits."""
    probs = np.diff(ndtr(config.partition.edges() / math.sqrt(channel.signal_var)))
    return float(entr(probs).sum() / LN2)


def ideal_leak(config: SliceConfig, channel: JointChannel, tol: float = 1e-6) -> float:
    """Sum_i H(S_i | X', S_<i), checked against H(S_1..m | X')."""
    a = analyze(config, channel)
    total = float(a.cond_entropies.sum())
    if abs(total - a.cond_entropy) > tol:
        raise ArithmeticError(f"chain rule violated: {total} vs {a.cond_entropy}")
    return total


def slice_policy(analysis: SliceAnalysis, threshold: float = 0.25) -> list[str]:
    """'disclose' for slices whose expected error exceeds ``threshold``, else 'correct'."""
    return ["disclose" if e > threshold else "correct" for e in analysis.error_rates]


def binary_correction_leak(config: SliceConfig, channel: JointChannel, threshold: float = 0.25) -> float:
    """Bits per element if disclosed slices cost 1 and the others h(e_i)."""
    a = analyze(config, channel)
    cost = [1.0 if mode == "disclose" else binary_entropy(e)
            for mode, e in zip(slice_policy(a, threshold), a.error_rates)]
    return float(sum(cost))


# --------------------------------------------------------------------------
# Slicing and estimation
# --------------------------------------------------------------------------


def slice_bits(config: SliceConfig, x) -> np.ndarray:
    """(n, m) uint8 slice bits of Alice's values."""
    return config.code_bits()[config.partition.label(x)]


def bits_to_interval(config: SliceConfig, bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    code = (bits << np.arange(bits.shape[-1])).sum(axis=-1)
    return config.interval_of_code(code)


def _log_interval_mass(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """log(Phi(hi) - Phi(lo)) without cancellation in either tail."""
    flip = lo > 0
    a = np.where(flip, -hi, lo)
    b = np.where(flip, -lo, hi)
    la, lb = log_ndtr(a), log_ndtr(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        return lb + np.log1p(-np.exp(la - lb))


class DegenerateEstimate(ValueError):
    pass


def estimate_slice(config: SliceConfig, channel: JointChannel, xp, prev_bits, i: int) -> np.ndarray:
    """Bob's MAP guess of slice i (1-based) from x' and slices 1..i-1.

    Ties go to 0.  Raises DegenerateEstimate where both hypotheses have zero
    conditional mass.
    """
    m = config.m
    if not 1 <= i <= m:
        raise ValueError(f"slice index must be in 1..{m}")
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    prev = np.asarray(prev_bits, dtype=np.int64).reshape(len(xp), -1) if i > 1 else np.zeros((len(xp), 0), np.int64)
    if prev.shape[1] != i - 1:
        raise ValueError(f"need {i - 1} previous bits per element")
    k, s = channel.posterior()
    edges = config.partition.edges()
    z = (edges[None, :] - k * xp[:, None]) / s
    logm = _log_interval_mass(z[:, :-1], z[:, 1:])
    prefix = (prev << np.arange(i - 1)).sum(axis=1)
    match = (config.codes % (1 << (i - 1)))[None, :] == prefix[:, None]
    bit = config.code_bits()[:, i - 1][None, :]
    l0 = logsumexp(np.where(match & (bit == 0), logm, -np.inf), axis=1)
    l1 = logsumexp(np.where(match & (bit == 1), logm, -np.inf), axis=1)
    bad = ~(np.isfinite(l0) | np.isfinite(l1))
    if np.any(bad):
        raise DegenerateEstimate(f"{int(bad.sum())} elements have zero conditional mass")
    return (l1 > l0).astype(np.uint8)


# --------------------------------------------------------------------------
# Cascade
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeResult:
    corrected: np.ndarray
    leak: int
    residual_errors: int

    @property
    def success(self) -> bool:
        return self.residual_errors == 0


def cascade_block_sizes(n: int, crossover: float, passes: int = 4) -> np.ndarray:
    k1 = max(1, math.ceil(0.73 / crossover))
    return np.array([max(1, min(n, k1 * 2**j)) for j in range(passes)], dtype=np.int64)


def cascade_correct(alice_bits, bob_bits, crossover: float, seed: int, passes: int = 4) -> CascadeResult:
    """Interactive parity correction of Bob's string towards Alice's.

    Every pass shuffles the bits, discloses all block parities and bisects
    each mismatched block; a corrected bit re-opens blocks of earlier passes,
    which are then bisected too.  Sub-block parities already disclosed are
    reused.  ``residual_errors`` is measured against Alice's string, which a
    real Bob could not do; it flags failures in simulation.
    """
    a = np.ascontiguousarray(alice_bits, dtype=np.uint8)
    b = np.array(bob_bits, dtype=np.uint8)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two 1-D bit strings of equal length")
    if not 0 < crossover < 0.5:
        raise ValueError("crossover must lie in (0, 0.5)")
    if passes < 1:
        raise ValueError("need at least one pass")
    n = len(a)
    if n == 0:
        return CascadeResult(b, 0, 0)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0xCA5C])))
    perms = np.stack([rng.permutation(n) for _ in range(passes)]).astype(np.int64)
    leak = _backend.cascade_run(a, b, perms, cascade_block_sizes(n, crossover, passes))
    return CascadeResult(b, int(leak), int(np.count_nonzero(a != b)))


# --------------------------------------------------------------------------
# Reconciliation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SliceReport:
    slice: int
    mode: str  # 'disclose' or 'correct'
    expected_error: float
    match_rate: float  # Bob's estimate before correction
    leak_bits: float
    residual_errors: int = 0


@dataclass
class CorrectionTranscript:
    elements: int
    accounting: str
    entropy: float  # H(S_1..m)
    cond_entropy: float  # H(S_1..m | X'), the disclosure lower bound
    slices: list[SliceReport] = field(default_factory=list)
    flagged: np.ndarray | None = None

    @property
    def total_leak(self) -> float:
        return float(sum(r.leak_bits for r in self.slices))

    @property
    def leak_per_element(self) -> float:
        return self.total_leak / self.elements

    @property
    def net_rate(self) -> float:
        return self.entropy - self.leak_per_element

    @property
    def leak_excess(self) -> float:
        """Total disclosed bits beyond the conditional-entropy bound."""
        return max(self.total_leak - self.elements * self.cond_entropy, 0.0)

    @property
    def success(self) -> bool:
        return all(r.residual_errors == 0 for r in self.slices)


@dataclass(frozen=True)
class Reconciliation:
    alice_bits: np.ndarray  # (n, m)
    bob_bits: np.ndarray
    transcript: CorrectionTranscript

    @property
    def shared(self) -> np.ndarray:
        """Slice-major key string (all of slice 1, then slice 2, ...)."""
        return np.ascontiguousarray(self.alice_bits.T).reshape(-1)


def reconcile(
    config: SliceConfig,
    channel: JointChannel,
    alice_values,
    bob_values,
    threshold: float = 0.25,
    mode: str = "ideal",
    seed: int = 0,
    passes: int = 4,
) -> Reconciliation:
    """Correct the slices in order 1..m.

    Slices whose expected error exceeds ``threshold`` are disclosed outright
    (1 bit per element).  The others are corrected from Bob's MAP estimates:
    in ``ideal`` accounting a perfect binary correction is assumed and
    charged h(e) bits per element at the observed error rate e; in
    ``cascade`` accounting Cascade is run and its parities are counted.
    The entropy term is H(T) of the partition.
    """
    if mode == "measured":
        mode = "cascade"
    if mode not in LEAK_MODES:
        raise ValueError(f"mode must be one of {LEAK_MODES}")
    x = np.asarray(alice_values, dtype=float)
    xp = np.asarray(bob_values, dtype=float)
    if x.shape != xp.shape or x.ndim != 1:
        raise ValueError("value vectors must be 1-D and of equal length")
    n, m = len(x), config.m
    analysis = analyze(config, channel)
    policy = slice_policy(analysis, threshold)
    alice = slice_bits(config, x)
    bob = np.zeros_like(alice)
    flagged = np.zeros(n, dtype=bool)
    transcript = CorrectionTranscript(n, mode, analysis.entropy, analysis.cond_entropy)
    seeds = np.random.SeedSequence([seed, 0x511C]).generate_state(m)

    for i in range(1, m + 1):
        e_exp = float(analysis.error_rates[i - 1])
        guess = estimate_slice(config, channel, xp, bob[:, : i - 1], i)
        match = float(np.mean(guess == alice[:, i - 1]))
        residual = 0
        if policy[i - 1] == "disclose":
            bob[:, i - 1] = alice[:, i - 1]
            leak = float(n)
        elif mode == "ideal":
            bob[:, i - 1] = alice[:, i - 1]
            leak = n * binary_entropy(1 - match)
        else:
            crossover = min(max(e_exp, 1e-6), 0.49)
            res = cascade_correct(alice[:, i - 1], guess, crossover, int(seeds[i - 1]), passes)
            bob[:, i - 1] = res.corrected
            leak = float(res.leak)
            residual = res.residual_errors
            flagged |= res.corrected != alice[:, i - 1]
        transcript.slices.append(SliceReport(i, policy[i - 1], e_exp, match, leak, residual))

    transcript.flagged = flagged
    return Reconciliation(alice, bob, transcript)


# --------------------------------------------------------------------------
# Persistence
# --------------------------------------------------------------------------


def save_partition(path: str | Path, partition: IntervalPartition, comment: str = "") -> None:
    """One boundary per line, full precision; '#' lines are comments."""
    lines = [f"# {comment}"] if comment else []
    lines += [repr(float(b)) for b in partition.boundaries]
    Path(path).write_text("\n".join(lines) + "\n")


def load_partition(path: str | Path) -> IntervalPartition:
    vals = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            vals.append(float(line))
    return IntervalPartition(np.array(vals))
