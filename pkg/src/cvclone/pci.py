"""Phase-conjugated-inputs (PCI) cloners.

N copies of |psi> and N' copies of |psi*> are concentrated into two modes,
mixed by a phase-insensitive amplifier, and distributed into M clones and
M' = M + N' - N anticlones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloners import fidelity as standard_fidelity
from .phasespace import Circuit, Distributor, TwoModeAmp

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class PCISpec:
    n: int
    n_conj: int
    m: int
    m_conj: int | None = None

    def __post_init__(self):
        mc = self.m + self.n_conj - self.n
        if self.m_conj is None:
            object.__setattr__(self, "m_conj", mc)
        elif self.m_conj != mc:
            raise ValueError(f"clone balance violated: M' - M must equal N' - N (M' = {mc})")
        if self.n < 0 or self.n_conj < 0 or self.n + self.n_conj < 1:
            raise ValueError("need N, N' >= 0 with N + N' >= 1")
        if self.m < 1:
            raise ValueError("need M >= 1")
        if self.m_conj < 0:
            raise ValueError(f"M' = M + N' - N = {mc} is negative")
        if self.n_conj == 0 and self.m < self.n:
            raise ValueError("standard cloning needs M >= N")
        # sqrt(G) + sqrt(G-1) = (sqrt(M) + sqrt(M')) / (sqrt(N) + sqrt(N')) must be >= 1.
        lhs = math.sqrt(self.m) + math.sqrt(self.m_conj)
        if lhs < math.sqrt(self.n) + math.sqrt(self.n_conj) - 1e-12:
            raise ValueError("spec would need an attenuating amplifier (gain < 1)")


@dataclass(frozen=True)
class PCIStats:
    gain: float
    n_th_clone: float
    n_th_anticlone: float | None
    clone_fidelity: float
    anticlone_fidelity: float | None


def _sqrt_gain(n: float, n_conj: float, m: float, m_conj: float) -> float:
    # (sqrt(N'M') - sqrt(NM)) / (N' - N) with the common factor cancelled;
    # finite at N = N' where it equals (M + N) / (2 sqrt(MN)).
    return (m + n_conj) / (math.sqrt(n_conj * m_conj) + math.sqrt(n * m))


def gain(n: int, n_conj: int, m: int) -> float:
    """Amplifier gain of the optimal (N, N') -> (M, M') PCI cloner."""
    spec = PCISpec(n, n_conj, m)
    g = _sqrt_gain(spec.n, spec.n_conj, spec.m, spec.m_conj) ** 2
    if g < 1 - 1e-12:
        raise ValueError(f"spec {spec} needs gain {g} < 1")
    return max(g, 1.0)


def pci_stats(spec: PCISpec) -> PCIStats:
    g = gain(spec.n, spec.n_conj, spec.m)
    nc = (g - 1) / spec.m
    na = (g - 1) / spec.m_conj if spec.m_conj > 0 else None
    return PCIStats(
        gain=g,
        n_th_clone=nc,
        n_th_anticlone=na,
        clone_fidelity=1 / (1 + nc),
        anticlone_fidelity=None if na is None else 1 / (1 + na),
    )


def balanced_noise(n: int, m: int) -> float:
    """Thermal photon number (M - N)^2 / (4 M^2 N) of the balanced PCI cloner."""
    return (m - n) ** 2 / (4 * m * m * n)


def balanced_fidelity(n: int, m: int) -> float:
    return 4 * m * m * n / (4 * m * m * n + (m - n) ** 2)


# --------------------------------------------------------------------------
# Phase-conjugate fraction
# --------------------------------------------------------------------------


def _check_fraction(a: float, n: float, m: float) -> None:
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"fraction a must lie in [0, 1], got {a}")
    if n <= 0 or m <= 0:
        raise ValueError("n and M must be positive")
    if m / n + 2 * a - 1 < -1e-12:
        raise ValueError("M' = M + n(2a - 1) would be negative")


def gain_vs_fraction(a: float, n: float, m: float) -> float:
    """G(a) for a = N'/n, relaxed to real-valued N'."""
    _check_fraction(a, n, m)
    r = m / n
    den = math.sqrt(a * max(r + 2 * a - 1, 0.0)) + math.sqrt((1 - a) * r)
    return max(((r + a) / den) ** 2, 1.0)


def gain_vs_fraction_direct(a: float, n: float, m: float) -> float:
    """The unrationalized form; singular at a = 1/2, kept for cross-checks."""
    _check_fraction(a, n, m)
    r = m / n
    return ((math.sqrt(a) * math.sqrt(r + 2 * a - 1) - math.sqrt(r) * math.sqrt(1 - a)) / (2 * a - 1)) ** 2


def noise_vs_fraction(a: float, n: float, m: float) -> float:
    """Clone thermal noise (G(a) - 1) / M."""
    return (gain_vs_fraction(a, n, m) - 1) / m


def fraction_curve(n: float, m: float, points: int = 201) -> np.ndarray:
    """Rows (a, G(a), sqrt(n_th(a))) on a uniform grid over [0, 1]."""
    a = np.linspace(0.0, 1.0, points)
    g = np.array([gain_vs_fraction(v, n, m) for v in a])
    return np.column_stack([a, g, np.sqrt((g - 1) / m)])


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def optimal_fraction(n: float, m: float, grid_step: float = 1e-3, tol: float = 1e-9) -> tuple[float, float]:
    """Phase-conjugate fraction minimizing clone noise, and that noise."""
    if m < n:
        raise ValueError("optimal_fraction needs M >= n")

    def f(a: float) -> float:
        return noise_vs_fraction(a, n, m)

    grid = np.linspace(0.0, 1.0, int(round(1 / grid_step)) + 1)
    vals = np.array([f(a) for a in grid])
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    a = _golden_min(f, lo, hi, tol)
    # The minimum may sit on an endpoint (e.g. a = 0 when M = n).
    best = min((a, lo, hi), key=lambda v: (f(v), v))
    return float(best), f(best)


def best_integer_split(n: int, m: int) -> tuple[int, float]:
    """Integer N' minimizing clone noise for n total inputs and M clones."""
    best = None
    for nc in range(n + 1):
        try:
            s = pci_stats(PCISpec(n - nc, nc, m))
        except ValueError:
            continue
        if best is None or s.n_th_clone < best[1] - 1e-15:
            best = (nc, s.n_th_clone)
    if best is None:
        raise ValueError("no valid split")
    return best


# --------------------------------------------------------------------------
# Comparisons
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    n: int
    m: int
    pci_noise: float
    pci_fidelity: float
    standard_noise: float
    standard_fidelity: float
    pci_anticlones: int
    pci_anticlone_fidelity: float
    standard_anticlones: int
    standard_anticlone_fidelity: float


def compare_standard(n: int, m: int) -> Comparison:
    """Balanced (N, N) -> M PCI cloner against the standard 2N -> M cloner."""
    if n < 1 or m < 2 * n:
        raise ValueError("comparison needs M >= 2N >= 2")
    return Comparison(
        n=n,
        m=m,
        pci_noise=balanced_noise(n, m),
        pci_fidelity=balanced_fidelity(n, m),
        standard_noise=1 / (2 * n) - 1 / m,
        standard_fidelity=standard_fidelity(2 * n, m),
        pci_anticlones=m,
        pci_anticlone_fidelity=balanced_fidelity(n, m),
        standard_anticlones=m - 2 * n,
        standard_anticlone_fidelity=2 * n / (2 * n + 1),
    )


def measurement_equivalent_replicas(n: int, n_conj: int) -> float:
    """Number of plain replicas whose optimal measurement matches the
    M -> infinity PCI noise; that noise is the reciprocal."""
    if n < 0 or n_conj < 0 or n + n_conj < 1:
        raise ValueError("need N, N' >= 0 with N + N' >= 1")
    return (math.sqrt(n) + math.sqrt(n_conj)) ** 2


# --------------------------------------------------------------------------
# Circuit and output distribution
# --------------------------------------------------------------------------


def build_pci_circuit(spec: PCISpec) -> Circuit:
    """Concentrate, amplify (PCIA), distribute.

    The psi inputs occupy modes 0..N-1 and the psi* inputs N..N+N'-1; extra
    vacua are appended as needed.  Clones are distributed from the first
    concentrated mode, anticlones from the second.
    """
    g = gain(spec.n, spec.n_conj, spec.m)
    count = spec.n + spec.n_conj
    psi_modes = list(range(spec.n))
    conj_modes = list(range(spec.n, count))

    def fresh() -> int:
        nonlocal count
        count += 1
        return count - 1

    elements = []
    a1 = psi_modes[0] if psi_modes else fresh()
    a2 = conj_modes[0] if conj_modes else fresh()
    if len(psi_modes) > 1:
        elements.append(Distributor(tuple(psi_modes), adjoint=True))
    if len(conj_modes) > 1:
        elements.append(Distributor(tuple(conj_modes), adjoint=True))
    elements.append(TwoModeAmp(a1, a2, g))

    clones = [a1] + [m for m in psi_modes if m != a1][: spec.m - 1]
    while len(clones) < spec.m:
        clones.append(fresh())
    anticlones: list[int] = []
    if spec.m_conj > 0:
        anticlones = [a2] + [m for m in conj_modes if m != a2][: spec.m_conj - 1]
        while len(anticlones) < spec.m_conj:
            anticlones.append(fresh())
    if len(clones) > 1:
        elements.append(Distributor(tuple(clones)))
    if len(anticlones) > 1:
        elements.append(Distributor(tuple(anticlones)))
    return Circuit(
        count,
        tuple(elements),
        inputs=tuple(psi_modes),
        conj_inputs=tuple(conj_modes),
        clones=tuple(clones),
        anticlones=tuple(anticlones),
    )


def p_function(xi: complex | np.ndarray, psi: complex, n_th: float) -> np.ndarray | float:
    """Glauber P density of a displaced thermal state with mean photon n_th."""
    if n_th <= 0:
        raise ValueError("n_th must be positive; n_th = 0 is a delta function")
    return np.exp(-np.abs(np.asarray(xi) - psi) ** 2 / n_th) / (np.pi * n_th)


def wigner_function(xi: complex | np.ndarray, psi: complex, n_th: float) -> np.ndarray | float:
    """Wigner density of the same state: the P density smoothed by vacuum noise."""
    if n_th < 0:
        raise ValueError("n_th must be nonnegative")
    return p_function(xi, psi, n_th + 0.5)
