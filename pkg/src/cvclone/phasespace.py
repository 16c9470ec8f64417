"""Wigner-function Monte Carlo for Gaussian linear-optics circuits.

Every state and element handled here is Gaussian, so sampling the input
Wigner functions and pushing the samples through the (linear) element maps
gives exact statistics for the outputs.  Amplitudes are stored as complex
numbers ``a = (x + i p) / sqrt(2)`` with the vacuum having variance 1/2 in
each quadrature.

An exact moment-propagation path (:func:`element_matrix`,
:func:`propagate_moments`) works on real quadrature vectors and is used as an
independent oracle for the sampler.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

VACUUM_VARIANCE = 0.5
BLOCK_SHOTS = 1 << 16

ArrayLike = Union[float, np.ndarray]


# --------------------------------------------------------------------------
# Preparations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModePrep:
    """Gaussian preparation of a single mode (diagonal covariance).

    Fields may be scalars or arrays of length ``shots`` for per-shot
    preparations (used for key elements, where each shot carries its own
    displacement and squeezing axis).
    """

    mean_x: ArrayLike = 0.0
    mean_p: ArrayLike = 0.0
    var_x: ArrayLike = VACUUM_VARIANCE
    var_p: ArrayLike = VACUUM_VARIANCE

    def __post_init__(self):
        vx = np.asarray(self.var_x, dtype=float)
        vp = np.asarray(self.var_p, dtype=float)
        if np.any(vx <= 0) or np.any(vp <= 0):
            raise ValueError("quadrature variances must be positive")
        if np.any(vx * vp < 0.25 * (1 - 1e-12)):
            raise ValueError("variances violate the uncertainty relation var_x*var_p >= 1/4")

    @classmethod
    def vacuum(cls) -> "ModePrep":
        return cls()

    @classmethod
    def coherent(cls, psi: complex) -> "ModePrep":
        psi = complex(psi)
        return cls(np.sqrt(2) * psi.real, np.sqrt(2) * psi.imag)

    @classmethod
    def squeezed(
        cls,
        var_x: ArrayLike,
        var_p: ArrayLike | None = None,
        mean_x: ArrayLike = 0.0,
        mean_p: ArrayLike = 0.0,
        pure: bool = True,
    ) -> "ModePrep":
        """Squeezed (or, with ``pure=False``, mixed) Gaussian state.

        In pure mode the pair must saturate ``var_x * var_p = 1/4``; when
        ``var_p`` is omitted it is derived from that relation.
        """
        vx = np.asarray(var_x, dtype=float)
        if np.any(vx <= 0):
            raise ValueError("squeezing variance must be positive")
        if var_p is None:
            vp = 0.25 / vx
        else:
            vp = np.asarray(var_p, dtype=float)
            if pure and not np.allclose(vx * vp, 0.25, rtol=1e-9, atol=0):
                raise ValueError("pure squeezed state requires var_x * var_p = 1/4")
        return cls(mean_x, mean_p, _scalar_or_array(vx), _scalar_or_array(vp))

    @classmethod
    def thermal(cls, variance: float, psi: complex = 0.0) -> "ModePrep":
        """Displaced thermal state with equal quadrature variance >= 1/2."""
        base = cls.coherent(psi)
        return cls(base.mean_x, base.mean_p, variance, variance)


def _scalar_or_array(v: np.ndarray) -> ArrayLike:
    return float(v) if v.ndim == 0 else v


# --------------------------------------------------------------------------
# Elements and circuits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BeamSplitter:
    """Real beam splitter: a_i' = sqrt(t) a_i + sqrt(1-t) a_j,
    a_j' = sqrt(1-t) a_i - sqrt(t) a_j.  ``t = 1/2`` is the 50:50 splitter."""

    i: int
    j: int
    t: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"transmittance must lie in [0, 1], got {self.t}")
        if self.i == self.j:
            raise ValueError("beam splitter needs two distinct modes")

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i, self.j)


@dataclass(frozen=True)
class TwoModeAmp:
    """Phase-insensitive amplifier: b_i = sqrt(G) a_i + sqrt(G-1) a_j^dagger."""

    i: int
    j: int
    gain: float

    def __post_init__(self):
        if not self.gain >= 1.0:
            raise ValueError(f"amplifier gain must be >= 1, got {self.gain}")
        if self.i == self.j:
            raise ValueError("amplifier needs two distinct modes")

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i, self.j)


@dataclass(frozen=True)
class SumGate:
    """exp(-i s x_control p_target): x_t -> x_t + s x_c, p_c -> p_c - s p_t."""

    control: int
    target: int
    sign: float = 1.0

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("sum gate needs two distinct modes")

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.control, self.target)


def dft_matrix(k: int) -> np.ndarray:
    idx = np.arange(k)
    return np.exp(2j * np.pi * np.outer(idx, idx) / k) / np.sqrt(k)


@dataclass(frozen=True, eq=False)
class Distributor:
    """Passive K-mode network a' = U a over ``targets`` (``targets[0]`` is the
    source).  ``U`` defaults to the K-point DFT; ``adjoint=True`` applies U^dagger,
    which concentrates K identical coherent states into the source mode."""

    targets: tuple[int, ...]
    matrix: np.ndarray | None = None
    adjoint: bool = False

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        k = len(targets)
        if k < 1 or len(set(targets)) != k:
            raise ValueError("distributor targets must be distinct and non-empty")
        u = dft_matrix(k) if self.matrix is None else np.asarray(self.matrix, dtype=complex)
        if u.shape != (k, k):
            raise ValueError(f"distributor matrix must be {k}x{k}")
        if not np.allclose(u.conj().T @ u, np.eye(k), atol=1e-12, rtol=0):
            raise ValueError("distributor matrix is not unitary")
        if not np.allclose(np.abs(u[:, 0]), 1 / np.sqrt(k), atol=1e-12, rtol=0):
            raise ValueError("distributor first column must have uniform modulus 1/sqrt(K)")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def modes(self) -> tuple[int, ...]:
        return self.targets

    @property
    def effective(self) -> np.ndarray:
        return self.matrix.conj().T if self.adjoint else self.matrix

    def __eq__(self, other):
        return (
            isinstance(other, Distributor)
            and self.targets == other.targets
            and self.adjoint == other.adjoint
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.targets, self.adjoint))


GaussianElement = Union[BeamSplitter, TwoModeAmp, SumGate, Distributor]


@dataclass(frozen=True)
class Circuit:
    """Ordered Gaussian elements over ``mode_count`` modes.

    The label tuples record which modes receive copies of psi (``inputs``),
    of psi* (``conj_inputs``), and which outputs are clones/anticlones.
    ``ancillas`` holds non-vacuum preparations for auxiliary modes.
    """

    mode_count: int
    elements: tuple[GaussianElement, ...] = ()
    inputs: tuple[int, ...] = ()
    conj_inputs: tuple[int, ...] = ()
    clones: tuple[int, ...] = ()
    anticlones: tuple[int, ...] = ()
    ancillas: Mapping[int, ModePrep] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.mode_count < 1:
            raise ValueError("circuit needs at least one mode")
        for el in self.elements:
            _check_modes(el.modes, self.mode_count)
        for group in (self.inputs, self.conj_inputs, self.clones, self.anticlones, tuple(self.ancillas)):
            _check_modes(group, self.mode_count)

    def preparations(self, psi: complex = 0.0) -> dict[int, ModePrep]:
        """Input preparations: psi on ``inputs``, psi* on ``conj_inputs``."""
        preps = dict(self.ancillas)
        for m in self.inputs:
            preps[m] = ModePrep.coherent(psi)
        for m in self.conj_inputs:
            preps[m] = ModePrep.coherent(np.conj(psi))
        return preps


def _check_modes(modes: Iterable[int], n: int) -> None:
    for m in modes:
        if not 0 <= m < n:
            raise IndexError(f"mode index {m} out of range for {n} modes")


# --------------------------------------------------------------------------
# Ensembles
# --------------------------------------------------------------------------


@dataclass
class ShotEnsemble:
    amplitudes: np.ndarray  # (shots, modes) complex
    seed: int | None = None

    @property
    def shots(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def modes(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def x(self) -> np.ndarray:
        return np.sqrt(2) * self.amplitudes.real

    @property
    def p(self) -> np.ndarray:
        return np.sqrt(2) * self.amplitudes.imag

    def copy(self) -> "ShotEnsemble":
        return ShotEnsemble(self.amplitudes.copy(), self.seed)


def _block_normals(seed: int, block: int, rows: int, modes: int) -> np.ndarray:
    # Philox keyed by (seed, block): any shot depends only on (seed, shot index).
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.standard_normal((rows, modes, 2))


def _per_shot(v: ArrayLike, lo: int, hi: int) -> ArrayLike:
    v = np.asarray(v, dtype=float)
    return v if v.ndim == 0 else v[lo:hi]


def sample_input(
    modes: int,
    shots: int,
    seed: int,
    preparations: Mapping[int, ModePrep] | None = None,
    threads: int = 1,
) -> ShotEnsemble:
    """Draw Wigner samples of a product Gaussian state.

    Unlisted modes are vacuum.  Shots are generated in fixed blocks with one
    counter-based stream per block, so the result does not depend on
    ``threads``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if modes < 1:
        raise ValueError("modes must be >= 1")
    preparations = dict(preparations or {})
    _check_modes(preparations, modes)
    for prep in preparations.values():
        for v in (prep.mean_x, prep.mean_p, prep.var_x, prep.var_p):
            if np.ndim(v) and np.shape(v) != (shots,):
                raise ValueError("per-shot preparation arrays must have length `shots`")

    nblocks = (shots + BLOCK_SHOTS - 1) // BLOCK_SHOTS
    out = _sample_blocks(modes, shots, seed, preparations, range(nblocks), threads)
    return ShotEnsemble(out, seed)


def _sample_blocks(
    modes: int,
    shots: int,
    seed: int,
    preparations: Mapping[int, ModePrep],
    blocks: range,
    threads: int,
) -> np.ndarray:
    """Amplitudes for the shots of a contiguous range of blocks."""
    start = blocks.start * BLOCK_SHOTS
    stop = min(shots, blocks.stop * BLOCK_SHOTS)
    out = np.empty((stop - start, modes), dtype=complex)

    def fill(b: int) -> None:
        lo, hi = b * BLOCK_SHOTS, min(shots, (b + 1) * BLOCK_SHOTS)
        z = _block_normals(seed, b, hi - lo, modes)
        x = np.sqrt(VACUUM_VARIANCE) * z[..., 0]
        p = np.sqrt(VACUUM_VARIANCE) * z[..., 1]
        for m, prep in preparations.items():
            x[:, m] = _per_shot(prep.mean_x, lo, hi) + np.sqrt(_per_shot(prep.var_x, lo, hi)) * z[:, m, 0]
            p[:, m] = _per_shot(prep.mean_p, lo, hi) + np.sqrt(_per_shot(prep.var_p, lo, hi)) * z[:, m, 1]
        out[lo - start : hi - start] = (x + 1j * p) / np.sqrt(2)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, blocks))
    else:
        for b in blocks:
            fill(b)
    return out


def _apply_inplace(a: np.ndarray, el: GaussianElement) -> None:
    if isinstance(el, BeamSplitter):
        st, sr = np.sqrt(el.t), np.sqrt(1.0 - el.t)
        ai, aj = a[:, el.i].copy(), a[:, el.j].copy()
        a[:, el.i] = st * ai + sr * aj
        a[:, el.j] = sr * ai - st * aj
    elif isinstance(el, TwoModeAmp):
        g, h = np.sqrt(el.gain), np.sqrt(el.gain - 1.0)
        ai, aj = a[:, el.i].copy(), a[:, el.j].copy()
        a[:, el.i] = g * ai + h * np.conj(aj)
        a[:, el.j] = h * np.conj(ai) + g * aj
    elif isinstance(el, SumGate):
        # x_c and p_t are untouched by the gate, so update order is free.
        a[:, el.target] += el.sign * a[:, el.control].real
        a[:, el.control] -= 1j * el.sign * a[:, el.target].imag
    elif isinstance(el, Distributor):
        idx = list(el.targets)
        a[:, idx] = a[:, idx] @ el.effective.T
    else:
        raise TypeError(f"unknown element {el!r}")


def apply_element(ensemble: ShotEnsemble, element: GaussianElement) -> ShotEnsemble:
    _check_modes(element.modes, ensemble.modes)
    out = ensemble.copy()
    _apply_inplace(out.amplitudes, element)
    return out


def run_circuit(ensemble: ShotEnsemble, circuit: Circuit) -> ShotEnsemble:
    if ensemble.modes != circuit.mode_count:
        raise ValueError(
            f"ensemble has {ensemble.modes} modes, circuit expects {circuit.mode_count}"
        )
    out = ensemble.copy()
    for el in circuit.elements:
        _apply_inplace(out.amplitudes, el)
    return out


def simulate(
    circuit: Circuit,
    shots: int,
    seed: int,
    psi: complex = 0.0,
    threads: int = 1,
) -> ShotEnsemble:
    """Sample the circuit's input state for ``psi`` and run it."""
    ens = sample_input(circuit.mode_count, shots, seed, circuit.preparations(psi), threads)
    for el in circuit.elements:
        _apply_inplace(ens.amplitudes, el)
    return ens


def measure_quadrature(ensemble: ShotEnsemble, mode: int, which: str) -> np.ndarray:
    _check_modes((mode,), ensemble.modes)
    col = ensemble.amplitudes[:, mode]
    if which == "x":
        return np.sqrt(2) * col.real
    if which == "p":
        return np.sqrt(2) * col.imag
    raise ValueError(f"quadrature must be 'x' or 'p', got {which!r}")


# --------------------------------------------------------------------------
# Moments
# --------------------------------------------------------------------------


@dataclass
class MomentEstimate:
    """Sample moments over the quadrature vector (x0, p0, x1, p1, ...)."""

    means: np.ndarray  # (modes, 2)
    covariance: np.ndarray  # (2 modes, 2 modes)
    mean_stderr: np.ndarray  # (modes, 2)
    cov_stderr: np.ndarray  # (2 modes, 2 modes)
    shots: int

    def variance(self, mode: int, which: str = "x") -> float:
        k = 2 * mode + (0 if which == "x" else 1)
        return float(self.covariance[k, k])

    def variance_stderr(self, mode: int, which: str = "x") -> float:
        k = 2 * mode + (0 if which == "x" else 1)
        return float(self.cov_stderr[k, k])


def quadrature_matrix(ensemble: ShotEnsemble) -> np.ndarray:
    q = np.empty((ensemble.shots, 2 * ensemble.modes))
    q[:, 0::2] = ensemble.x
    q[:, 1::2] = ensemble.p
    return q


def estimate_moments(ensemble: ShotEnsemble) -> MomentEstimate:
    n = ensemble.shots
    if n < 2:
        raise ValueError("need at least two shots to estimate moments")
    q = quadrature_matrix(ensemble)
    mu = q.mean(axis=0)
    d = q - mu
    return _moment_estimate(n, mu, d.T @ d / (n - 1))


def _moment_estimate(n: int, mu: np.ndarray, cov: np.ndarray) -> MomentEstimate:
    cov = 0.5 * (cov + cov.T)
    var = np.diag(cov)
    # Gaussian standard error of a sample covariance entry.
    cov_se = np.sqrt((np.outer(var, var) + cov**2) / (n - 1))
    return MomentEstimate(
        means=mu.reshape(-1, 2),
        covariance=cov,
        mean_stderr=np.sqrt(var / n).reshape(-1, 2),
        cov_stderr=cov_se,
        shots=n,
    )


def simulate_moments(
    circuit: "Circuit",
    shots: int,
    seed: int,
    psi: complex = 0.0,
    threads: int = 1,
    chunk_blocks: int = 16,
) -> MomentEstimate:
    """Output moments of ``simulate`` without holding every shot in memory.

    The samples are the ones ``simulate`` would draw; only the order of the
    floating-point sums differs.
    """
    if shots < 2:
        raise ValueError("need at least two shots to estimate moments")
    preps = circuit.preparations(psi)
    nblocks = (shots + BLOCK_SHOTS - 1) // BLOCK_SHOTS
    shift = s1 = s2 = None
    for b0 in range(0, nblocks, chunk_blocks):
        a = _sample_blocks(circuit.mode_count, shots, seed, preps, range(b0, min(nblocks, b0 + chunk_blocks)), threads)
        for el in circuit.elements:
            _apply_inplace(a, el)
        q = quadrature_matrix(ShotEnsemble(a, seed))
        if shift is None:
            shift = q.mean(axis=0)
            s1 = np.zeros_like(shift)
            s2 = np.zeros((len(shift), len(shift)))
        d = q - shift
        s1 += d.sum(axis=0)
        s2 += d.T @ d
    mean_d = s1 / shots
    return _moment_estimate(shots, shift + mean_d, (s2 - shots * np.outer(mean_d, mean_d)) / (shots - 1))


# --------------------------------------------------------------------------
# Exact moment propagation (oracle)
# --------------------------------------------------------------------------


def element_matrix(element: GaussianElement, n: int) -> np.ndarray:
    """Real 2n x 2n map acting on (x0, p0, x1, p1, ...)."""
    _check_modes(element.modes, n)
    s = np.eye(2 * n)
    if isinstance(element, BeamSplitter):
        st, sr = np.sqrt(element.t), np.sqrt(1 - element.t)
        i, j = element.i, element.j
        for q in (0, 1):
            s[2 * i + q, 2 * i + q], s[2 * i + q, 2 * j + q] = st, sr
            s[2 * j + q, 2 * i + q], s[2 * j + q, 2 * j + q] = sr, -st
    elif isinstance(element, TwoModeAmp):
        g, h = np.sqrt(element.gain), np.sqrt(element.gain - 1)
        i, j = element.i, element.j
        s[2 * i, 2 * i], s[2 * i, 2 * j] = g, h
        s[2 * i + 1, 2 * i + 1], s[2 * i + 1, 2 * j + 1] = g, -h
        s[2 * j, 2 * i], s[2 * j, 2 * j] = h, g
        s[2 * j + 1, 2 * i + 1], s[2 * j + 1, 2 * j + 1] = -h, g
    elif isinstance(element, SumGate):
        c, t, sg = element.control, element.target, element.sign
        s[2 * t, 2 * c] += sg
        s[2 * c + 1, 2 * t + 1] -= sg
    elif isinstance(element, Distributor):
        u = element.effective
        for r, mr in enumerate(element.targets):
            for c, mc in enumerate(element.targets):
                re, im = u[r, c].real, u[r, c].imag
                s[2 * mr, 2 * mc] = re
                s[2 * mr, 2 * mc + 1] = -im
                s[2 * mr + 1, 2 * mc] = im
                s[2 * mr + 1, 2 * mc + 1] = re
    else:
        raise TypeError(f"unknown element {element!r}")
    return s


def circuit_matrix(circuit: Circuit) -> np.ndarray:
    s = np.eye(2 * circuit.mode_count)
    for el in circuit.elements:
        s = element_matrix(el, circuit.mode_count) @ s
    return s


def input_moments(n: int, preparations: Mapping[int, ModePrep] | None = None) -> tuple[np.ndarray, np.ndarray]:
    mu = np.zeros(2 * n)
    cov = VACUUM_VARIANCE * np.eye(2 * n)
    for m, prep in (preparations or {}).items():
        mu[2 * m], mu[2 * m + 1] = float(prep.mean_x), float(prep.mean_p)
        cov[2 * m, 2 * m], cov[2 * m + 1, 2 * m + 1] = float(prep.var_x), float(prep.var_p)
    return mu, cov


def propagate_moments(means: np.ndarray, cov: np.ndarray, circuit: Circuit) -> tuple[np.ndarray, np.ndarray]:
    s = circuit_matrix(circuit)
    return s @ means, s @ cov @ s.T


def exact_moments(circuit: Circuit, psi: complex = 0.0) -> tuple[np.ndarray, np.ndarray]:
    mu, cov = input_moments(circuit.mode_count, circuit.preparations(psi))
    return propagate_moments(mu, cov, circuit)


def symplectic_form(n: int) -> np.ndarray:
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


# --------------------------------------------------------------------------
# Text / CSV interfaces
# --------------------------------------------------------------------------


def write_csv(ensemble: ShotEnsemble, fh: IO[str], header_comment: str | None = None) -> None:
    """Write rows ``shot,mode,x,p``."""
    if header_comment:
        fh.write(f"# {header_comment}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["shot", "mode", "x", "p"])
    x, p = ensemble.x, ensemble.p
    for s in range(ensemble.shots):
        for m in range(ensemble.modes):
            w.writerow([s, m, f"{x[s, m]:.12g}", f"{p[s, m]:.12g}"])


_KINDS = {"bs": BeamSplitter, "amp": TwoModeAmp, "sum": SumGate}
_LABELS = ("inputs", "conj_inputs", "clones", "anticlones")


def _int_list(tok: str) -> tuple[int, ...]:
    return tuple(int(v) for v in tok.split(",") if v)


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format.

    ::

        modes 3
        amp 0 2 2.0        # kind, indices, parameter
        bs 0 1 0.5
        sum 1 2 1
        dft 0,1,2          # distributor (idft: adjoint)
        clones 0,1
        squeezed 2 0.25    # ancilla preparation: mode, var_x
    """
    modes = None
    elements: list[GaussianElement] = []
    labels: dict[str, tuple[int, ...]] = {}
    ancillas: dict[int, ModePrep] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *args = line.split()
        kind = kind.lower()
        try:
            if kind == "modes":
                modes = int(args[0])
            elif kind in _KINDS:
                i, j = int(args[0]), int(args[1])
                if len(args) > 2:
                    elements.append(_KINDS[kind](i, j, float(args[2])))
                elif kind == "amp":
                    raise ValueError("amp needs a gain")
                else:
                    elements.append(_KINDS[kind](i, j))
            elif kind in ("dft", "idft"):
                elements.append(Distributor(_int_list(args[0]), adjoint=(kind == "idft")))
            elif kind in _LABELS:
                labels[kind] = _int_list(args[0]) if args else ()
            elif kind == "squeezed":
                ancillas[int(args[0])] = ModePrep.squeezed(float(args[1]))
            else:
                raise ValueError(f"unknown element kind {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if modes is None:
        used = [m for el in elements for m in el.modes]
        modes = max(used) + 1 if used else 1
    return Circuit(modes, tuple(elements), ancillas=ancillas, **labels)


def format_circuit(circuit: Circuit) -> str:
    lines = [f"modes {circuit.mode_count}"]
    for el in circuit.elements:
        if isinstance(el, BeamSplitter):
            lines.append(f"bs {el.i} {el.j} {el.t!r}")
        elif isinstance(el, TwoModeAmp):
            lines.append(f"amp {el.i} {el.j} {el.gain!r}")
        elif isinstance(el, SumGate):
            lines.append(f"sum {el.control} {el.target} {el.sign!r}")
        elif isinstance(el, Distributor):
            if not np.allclose(el.matrix, dft_matrix(len(el.targets))):
                raise ValueError("only DFT distributors can be written as text")
            kind = "idft" if el.adjoint else "dft"
            lines.append(f"{kind} {','.join(map(str, el.targets))}")
    for name in _LABELS:
        group: Sequence[int] = getattr(circuit, name)
        if group:
            lines.append(f"{name} {','.join(map(str, group))}")
    for m, prep in circuit.ancillas.items():
        if np.ndim(prep.var_x) == 0 and np.isclose(float(prep.var_x) * float(prep.var_p), 0.25):
            lines.append(f"squeezed {m} {float(prep.var_x)!r}")
        else:
            raise ValueError("only pure squeezed ancillas can be written as text")
    return "\n".join(lines) + "\n"
