"""Gaussian-key QKD with squeezed states, and the cloning attack on it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloners import asymmetric_variances, build_asymmetric_circuit
from .phasespace import ModePrep, ShotEnsemble, run_circuit, sample_input

X, P = 0, 1


@dataclass(frozen=True)
class ProtocolParams:
    """Modulation variances (``big_x2``, ``big_p2``) and squeezed-state
    variances (``sigma_x2``, ``sigma_p2``) of the two encoding rules."""

    sigma_x2: float
    sigma_p2: float
    big_x2: float
    big_p2: float

    @property
    def snr(self) -> float:
        return self.big_x2 / self.sigma_x2

    def check(self, tol: float = 1e-9) -> None:
        target = 1 / (4 * self.sigma_x2 * self.sigma_p2)
        lx = 1 + self.big_x2 / self.sigma_x2
        lp = 1 + self.big_p2 / self.sigma_p2
        if not (math.isclose(lx, target, rel_tol=tol) and math.isclose(lp, target, rel_tol=tol)):
            raise ValueError("parameters break the indistinguishability constraint")


def solve_params(sigma_x2: float, sigma_p2: float) -> ProtocolParams:
    """Modulation variances making the x and p encodings indistinguishable."""
    if sigma_x2 <= 0 or sigma_p2 <= 0:
        raise ValueError("squeezed variances must be positive")
    room = 1 / (4 * sigma_x2 * sigma_p2)
    if room <= 1:
        raise ValueError("4 sigma_x^2 sigma_p^2 must be < 1: no room for key modulation")
    return ProtocolParams(sigma_x2, sigma_p2, sigma_x2 * (room - 1), sigma_p2 * (room - 1))


def params_for_snr(snr: float) -> ProtocolParams:
    """Symmetric parameters (sigma_x = sigma_p) giving the requested SNR."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    s2 = 0.5 / math.sqrt(1 + snr)
    return solve_params(s2, s2)


def info_rate(params: ProtocolParams) -> float:
    """Bits per key element; both closed forms are evaluated and compared."""
    params.check()
    a = 0.5 * math.log2(1 + params.big_x2 / params.sigma_x2)
    b = -math.log2(2 * math.sqrt(params.sigma_x2 * params.sigma_p2))
    if not math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12):
        raise ArithmeticError(f"information-rate forms disagree: {a} vs {b}")
    return a


def gaussian_capacity(signal: float, noise: float) -> float:
    return 0.5 * math.log2(1 + signal / noise)


@dataclass(frozen=True)
class InfoRates:
    i: float
    i_bx: float
    i_bp: float
    i_ex: float
    i_ep: float


def attack_rates(params: ProtocolParams, chi: float, lam: float) -> InfoRates:
    """Bob's and Eve's information when Eve runs the asymmetric cloner."""
    i = info_rate(params)
    bx, bp, ex, ep = asymmetric_variances(chi, lam)
    return InfoRates(
        i=i,
        i_bx=gaussian_capacity(params.big_x2, params.sigma_x2 + bx),
        i_bp=gaussian_capacity(params.big_p2, params.sigma_p2 + bp),
        i_ex=gaussian_capacity(params.big_x2, params.sigma_x2 + ex),
        i_ep=gaussian_capacity(params.big_p2, params.sigma_p2 + ep),
    )


def security_bound(i: float, i_b: float) -> tuple[float, bool]:
    """Upper bound I - I_B on Eve's information; key is possible iff I_B > I/2."""
    if i_b < 0 or i_b > i * (1 + 1e-12):
        raise ValueError("need 0 <= I_B <= I")
    return max(i - i_b, 0.0), i_b > i / 2


# --------------------------------------------------------------------------
# Session simulation
# --------------------------------------------------------------------------


@dataclass
class Session:
    """Per-element record; bases are 0 for x, 1 for p."""

    params: ProtocolParams
    basis_a: np.ndarray
    basis_b: np.ndarray
    r: np.ndarray
    bob_value: np.ndarray
    eve_value: np.ndarray | None
    seed: int
    chi: float | None = None
    lam: float | None = None

    @property
    def sifted(self) -> np.ndarray:
        return self.basis_a == self.basis_b

    @property
    def sift_fraction(self) -> float:
        return float(np.mean(self.sifted))

    def bob_pairs(self, basis: int) -> tuple[np.ndarray, np.ndarray]:
        sel = self.sifted & (self.basis_a == basis)
        return self.r[sel], self.bob_value[sel]

    def eve_pairs(self, basis: int) -> tuple[np.ndarray, np.ndarray]:
        if self.eve_value is None:
            raise ValueError("session ran without an eavesdropper")
        sel = self.basis_a == basis
        return self.r[sel], self.eve_value[sel]

    def bob_snr(self, basis: int) -> float:
        return empirical_snr(*self.bob_pairs(basis))

    def bob_info(self, basis: int) -> float:
        return empirical_information(*self.bob_pairs(basis))

    def eve_info(self, basis: int) -> float:
        return empirical_information(*self.eve_pairs(basis))


def empirical_snr(sent: np.ndarray, received: np.ndarray) -> float:
    """Signal variance over the variance of the received-minus-sent noise."""
    return float(np.var(sent, ddof=1) / np.var(received - sent, ddof=1))


def empirical_information(sent: np.ndarray, received: np.ndarray) -> float:
    """Gaussian mutual information -1/2 log2(1 - rho^2) from the sample correlation."""
    rho = np.corrcoef(sent, received)[0, 1]
    return float(-0.5 * np.log2(1 - rho**2))


def encoding_preparations(params: ProtocolParams, basis: np.ndarray, r: np.ndarray) -> ModePrep:
    """Per-element squeezed states carrying r in the chosen quadrature."""
    in_x = basis == X
    return ModePrep(
        mean_x=np.where(in_x, r, 0.0),
        mean_p=np.where(in_x, 0.0, r),
        var_x=np.where(in_x, params.sigma_x2, 0.25 / params.sigma_p2),
        var_p=np.where(in_x, 0.25 / params.sigma_x2, params.sigma_p2),
    )


def simulate_session(
    params: ProtocolParams,
    n_elements: int,
    seed: int,
    chi: float | None = None,
    lam: float | None = None,
) -> Session:
    """Run the protocol element by element on the phase-space simulator.

    With ``chi``/``lam`` set, Eve inserts the asymmetric cloner, forwards one
    clone to Bob and keeps the other; her measurement is deferred until the
    bases are announced, so both of her quadratures are recorded and the one
    matching Alice's basis is kept.
    """
    params.check()
    if n_elements < 1:
        raise ValueError("need at least one key element")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x5E55])))
    basis_a = rng.integers(0, 2, n_elements)
    basis_b = rng.integers(0, 2, n_elements)
    spread = np.where(basis_a == X, math.sqrt(params.big_x2), math.sqrt(params.big_p2))
    r = spread * rng.standard_normal(n_elements)
    prep = encoding_preparations(params, basis_a, r)

    attacked = chi is not None or lam is not None
    if attacked:
        circuit = build_asymmetric_circuit(chi if chi is not None else 1.0, lam if lam is not None else 1.0)
        preps = dict(circuit.ancillas)
        preps[circuit.inputs[0]] = prep
        ens = run_circuit(sample_input(circuit.mode_count, n_elements, seed, preps), circuit)
        bob_mode, eve_mode = circuit.clones
    else:
        ens = sample_input(1, n_elements, seed, {0: prep})
        bob_mode, eve_mode = 0, None

    bob = _quadrature_by_basis(ens, bob_mode, basis_b)
    eve = _quadrature_by_basis(ens, eve_mode, basis_a) if attacked else None
    return Session(params, basis_a, basis_b, r, bob, eve, seed, chi, lam)


def _quadrature_by_basis(ens: ShotEnsemble, mode: int, basis: np.ndarray) -> np.ndarray:
    col = ens.amplitudes[:, mode]
    return np.sqrt(2) * np.where(basis == X, col.real, col.imag)


# --------------------------------------------------------------------------
# Density-matrix check of the two encodings
# --------------------------------------------------------------------------


def rho_x_element(x, xp, big_x2: float, sigma_x2: float):
    """<x|rho_x|x'> for the x-encoding mixture (closed form)."""
    if big_x2 < 0 or sigma_x2 <= 0:
        raise ValueError("variances must be positive")
    x, xp = np.asarray(x, dtype=float), np.asarray(xp, dtype=float)
    tot = sigma_x2 + big_x2
    return (
        np.exp(-(x**2 + xp**2) / (4 * tot))
        * np.exp(-big_x2 * (x - xp) ** 2 / (8 * sigma_x2 * tot))
        / (math.sqrt(2 * math.pi) * math.sqrt(tot))
    )


def rho_p_element(x, xp, big_p2: float, sigma_p2: float):
    """<x|rho_p|x'> for the p-encoding mixture (closed form)."""
    if big_p2 < 0 or sigma_p2 <= 0:
        raise ValueError("variances must be positive")
    x, xp = np.asarray(x, dtype=float), np.asarray(xp, dtype=float)
    return (
        2 * math.sqrt(sigma_p2) / math.sqrt(2 * math.pi)
        * np.exp(-sigma_p2 * (x**2 + xp**2))
        * np.exp(-0.5 * big_p2 * (x - xp) ** 2)
    )


def verify_encoding_indistinguishability(params: ProtocolParams, points: int = 101) -> float:
    """Largest |<x|rho_x|x'> - <x|rho_p|x'>| over a square grid."""
    half = 5 * math.sqrt(params.sigma_x2 + params.big_x2)
    g = np.linspace(-half, half, points)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    diff = rho_x_element(xx, yy, params.big_x2, params.sigma_x2) - rho_p_element(
        xx, yy, params.big_p2, params.sigma_p2
    )
    return float(np.max(np.abs(diff)))
