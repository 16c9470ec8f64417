"""Symmetric N -> M and asymmetric 1 -> 2 Gaussian cloners."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phasespace import (
    BeamSplitter,
    Circuit,
    Distributor,
    ModePrep,
    ShotEnsemble,
    SumGate,
    TwoModeAmp,
    estimate_moments,
    measure_quadrature,
    run_circuit,
    sample_input,
    simulate,
)


def _check_nm(n: int, m: int) -> None:
    if n < 1 or m < n:
        raise ValueError(f"need M >= N >= 1, got N={n}, M={m}")


def added_variance(n: int, m: int) -> float:
    """Optimal cloning-induced variance per quadrature, 1/N - 1/M."""
    _check_nm(n, m)
    return 1.0 / n - 1.0 / m


def fidelity(n: int, m: int) -> float:
    """Optimal coherent-state fidelity MN / (MN + M - N)."""
    _check_nm(n, m)
    return m * n / (m * n + m - n)


def fidelity_from_added_variances(var_x: float, var_p: float) -> float:
    """Overlap <psi|rho|psi> for a coherent state blurred by Gaussian noise."""
    if var_x < 0 or var_p < 0:
        raise ValueError("added variances must be nonnegative")
    return 1.0 / np.sqrt((1.0 + var_x) * (1.0 + var_p))


def gaussian_fidelity(psi: complex, means: np.ndarray, cov: np.ndarray) -> float:
    """Fidelity of the coherent state |psi> with a single-mode Gaussian state.

    ``means`` is (<x>, <p>) and ``cov`` the 2x2 quadrature covariance.
    """
    d = np.asarray(means, dtype=float) - np.sqrt(2) * np.array([psi.real, psi.imag])
    s = np.asarray(cov, dtype=float) + 0.5 * np.eye(2)
    return float(np.exp(-0.5 * d @ np.linalg.solve(s, d)) / np.sqrt(np.linalg.det(s)))


def asymmetric_variances(chi: float, lam: float) -> tuple[float, float, float, float]:
    """Added variances (B,x), (B,p), (E,x), (E,p) of the asymmetric cloner.

    ``chi`` trades noise between the two clones and ``lam`` between x and p.
    """
    if chi <= 0 or lam <= 0:
        raise ValueError("chi and lambda must be positive")
    return (0.5 * chi * lam, 0.5 * chi / lam, 0.5 * lam / chi, 0.5 / (chi * lam))


@dataclass(frozen=True)
class CloneStats:
    var_x: float
    var_p: float
    fidelity: float


# --------------------------------------------------------------------------
# Circuits
# --------------------------------------------------------------------------


def build_12_circuit() -> Circuit:
    """Amplifier (G=2) on the input and an idler, then a 50:50 splitter.

    Modes: 0 input, 1 splitter vacuum, 2 amplifier idler.  The idler leaves
    as an anticlone of psi.
    """
    return Circuit(
        3,
        (TwoModeAmp(0, 2, 2.0), BeamSplitter(0, 1, 0.5)),
        inputs=(0,),
        clones=(0, 1),
        anticlones=(2,),
    )


def build_canonical_12_circuit() -> Circuit:
    """The three-factor cloning unitary written as sum gates.

    Factors act right to left on the state: exp(-i x2 p3), then
    exp(-i x1 (p2 + p3)), then exp(-i (x3 - x2) p1).
    """
    return Circuit(
        3,
        (
            SumGate(1, 2),
            SumGate(0, 1),
            SumGate(0, 2),
            SumGate(2, 0, 1.0),
            SumGate(1, 0, -1.0),
        ),
        inputs=(0,),
        clones=(0, 1),
    )


def asymmetric_parameters(chi: float) -> tuple[float, float, float]:
    """Pre-splitter transmittance, gain and output-splitter transmittance.

    Valid for ``0 < chi <= 1``, where chi is the noise ratio of the clone left
    on mode 0 to the one on mode 1; the pre-splitter reflection coefficient
    sqrt(1 - tau) - sqrt(tau) is then nonnegative.
    """
    if not 0 < chi <= 1:
        raise ValueError("asymmetric_parameters expects 0 < chi <= 1")
    tau = chi**2 / (1 + chi**2)
    q = 2 * chi / (1 + chi**2)  # 2 sqrt(tau (1 - tau))
    return q, 1 + 1 / q, tau


def build_asymmetric_circuit(chi: float, lam: float = 1.0) -> Circuit:
    """Asymmetric 1 -> 2 cloner: splitter, amplifier, splitter.

    Modes: 0 input, 1 splitter ancilla, 2 amplifier idler.  Both ancillas are
    squeezed to var_x = lam/2, which tilts the noise toward x for lam > 1
    without leaving the optimal family.  ``clones[0]`` is Bob's copy, with
    noise ratio chi relative to ``clones[1]``.
    """
    if chi <= 0 or lam <= 0:
        raise ValueError("chi and lambda must be positive")
    t, gain, tau = asymmetric_parameters(min(chi, 1.0 / chi))
    clones = (0, 1) if chi <= 1 else (1, 0)
    ancillas = {}
    if lam != 1.0:
        ancillas = {1: ModePrep.squeezed(lam / 2), 2: ModePrep.squeezed(lam / 2)}
    return Circuit(
        3,
        (BeamSplitter(0, 1, t), TwoModeAmp(0, 2, gain), BeamSplitter(0, 1, tau)),
        inputs=(0,),
        clones=clones,
        ancillas=ancillas,
    )


def build_NM_circuit(n: int, m: int) -> Circuit:
    """Concentrate N inputs, amplify with G = M/N, distribute into M clones.

    Modes 0..N-1 hold the inputs, N..M-1 are extra vacua and mode M is the
    amplifier idler.
    """
    _check_nm(n, m)
    idler = m
    elements = []
    if n > 1:
        elements.append(Distributor(tuple(range(n)), adjoint=True))
    elements.append(TwoModeAmp(0, idler, m / n))
    if m > 1:
        elements.append(Distributor(tuple(range(m))))
    return Circuit(
        m + 1,
        tuple(elements),
        inputs=tuple(range(n)),
        clones=tuple(range(m)),
        anticlones=(idler,),
    )


# --------------------------------------------------------------------------
# Monte Carlo checks
# --------------------------------------------------------------------------


def clone_stats(ensemble: ShotEnsemble, mode: int, psi: complex) -> CloneStats:
    """Added variances and fidelity of one output, estimated from samples."""
    mom = estimate_moments(_single(ensemble, mode))
    cov = mom.covariance
    return CloneStats(
        var_x=cov[0, 0] - 0.5,
        var_p=cov[1, 1] - 0.5,
        fidelity=gaussian_fidelity(psi, mom.means[0], cov),
    )


def _single(ensemble: ShotEnsemble, mode: int) -> ShotEnsemble:
    return ShotEnsemble(ensemble.amplitudes[:, mode : mode + 1], ensemble.seed)


def simulate_clones(
    circuit: Circuit, psi: complex, shots: int, seed: int, threads: int = 1
) -> list[CloneStats]:
    ens = simulate(circuit, shots, seed, psi, threads)
    return [clone_stats(ens, c, psi) for c in circuit.clones]


def joint_measurement_check(
    circuit: Circuit,
    psi: complex,
    shots: int,
    seed: int,
    preparations: dict[int, ModePrep] | None = None,
) -> tuple[float, float, float]:
    """Measure x on the first clone and p on the second.

    Returns the error variances about the input means and their product,
    which no physical cloner can push below 1.  ``preparations`` overrides
    the circuit's own (e.g. noisy ancillas for a suboptimal machine).
    """
    if len(circuit.clones) < 2:
        raise ValueError("joint measurement needs at least two clones")
    preps = circuit.preparations(psi)
    preps.update(preparations or {})
    ens = run_circuit(sample_input(circuit.mode_count, shots, seed, preps), circuit)
    x0, p0 = np.sqrt(2) * psi.real, np.sqrt(2) * psi.imag
    ex = measure_quadrature(ens, circuit.clones[0], "x") - x0
    ep = measure_quadrature(ens, circuit.clones[1], "p") - p0
    sx, sp = float(np.mean(ex**2)), float(np.mean(ep**2))
    return sx, sp, sx * sp
