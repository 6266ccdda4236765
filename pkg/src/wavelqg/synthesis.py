"""Closed-form per-frequency Riccati solutions and gain assembly.

The plant is the spatially discretized wave equation on a ring of n sites,
written in first-order form with state (displacements, velocities).  Because
the dynamics, the cost and the noise model all commute with cyclic shifts,
the unitary DFT splits the 2n-dimensional Riccati equations into n
independent 2x2 problems, one per spatial frequency k, each involving only
the Laplacian eigenvalue

    d(k) = -4 sin(pi k / n)**2 .

Those 2x2 problems admit explicit roots.  Writing the control solution as
[[p1, p0], [p0, p2]], the component equations give

    p0(k) = (d + sqrt(d**2 + pi3**2 (1 - pi1 d))) / pi3**2
    p2(k) = sqrt(2 p0 + pi2) / pi3
    p1(k) = p2 * (pi3**2 p0 - d)          (from the off-diagonal equation)

with state feedback u = -[K1 K2] (displacements, velocities) where

    K1 has spectrum  k0(k)   = d + sqrt(d**2 + pi3**2 (1 - pi1 d))
    K2 has spectrum  sqrt(2 k0 + pi2 pi3**2) .

The estimator error covariance [[s1, s0], [s0, s2]] satisfies the dual
equation with weight w = pi4**2 (1 - pi1 d):

    s0(k) = (d + sqrt(d**2 + w)) / w       (the + root; the - root is not PSD)
    s1(k) = sqrt(2 s0 / w)
    s2(k) = s1 * (w s0 - d)

and the injection gain splits as L = [L1; L2] with

    L2 has spectrum  l0(k)   = d/pi4 + sqrt((d/pi4)**2 - pi1 d + 1)
    L1 has spectrum  sqrt(2 l0 / pi4) .

Both k0 and l0 become frequency-independent (all gains diagonal) exactly on
pi1 = 2/pi3 resp. pi1 = 2/pi4, where the square roots collapse to perfect
squares: k0 = pi3 and l0 = 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .params import NondimParams
from .spectral import (Circulant, Spectrum, SymmetryError,
                       circulant_from_spectrum, laplacian_spectrum)

__all__ = [
    "GainKind",
    "RiccatiKind",
    "RiccatiSpectrum",
    "SpectralGain",
    "GainSet",
    "lqr_riccati_spectrum",
    "lqr_spectral_gain",
    "kf_riccati_spectrum",
    "kf_spectral_gain",
    "assemble_gains",
    "decentralization_tolerance",
]

# |pi1 - 2/pi3| (resp. pi4) below this counts as exactly on the
# decentralization set when classifying parameter points.
decentralization_tolerance = 1e-12

# imaginary leakage allowed when turning symmetric spectra into first rows
_IMAG_TOL = 1e-10


class GainKind(str, enum.Enum):
    LQR = "lqr"
    KF = "kf"


class RiccatiKind(str, enum.Enum):
    CONTROL = "control"
    FILTER = "filter"


@dataclass(frozen=True, eq=False)
class RiccatiSpectrum:
    """Per-frequency 2x2 Riccati solutions [[diag1, p0], [p0, diag2]](k)."""

    p0: np.ndarray
    diag1: np.ndarray
    diag2: np.ndarray
    kind: RiccatiKind

    @property
    def n(self) -> int:
        return self.p0.size

    def block(self, k: int) -> np.ndarray:
        """The dense 2x2 solution at frequency k."""
        return np.array([[self.diag1[k], self.p0[k]],
                         [self.p0[k], self.diag2[k]]])


@dataclass(frozen=True, eq=False)
class SpectralGain:
    """Frequency-wise gain pair.

    ``k0`` holds the primary sequence (regulator displacement gain, or
    filter velocity-update gain l0), ``companion`` the other block's
    sequence; both are real and strictly positive.
    """

    k0: np.ndarray
    companion: np.ndarray
    kind: GainKind

    @property
    def n(self) -> int:
        return self.k0.size


@dataclass(frozen=True, eq=False)
class GainSet:
    """Assembled circulant gain blocks.

    For the regulator, u = -(block1 @ displacements + block2 @ velocities);
    for the filter, the injection is [block1; block2] @ innovation.
    """

    block1: Circulant
    block2: Circulant
    kind: GainKind
    params: NondimParams
    spectral: SpectralGain


def _laplacian_values(p: NondimParams) -> np.ndarray:
    return laplacian_spectrum(p.n).values.real


def lqr_riccati_spectrum(p: NondimParams) -> RiccatiSpectrum:
    """Stabilizing control Riccati solution, one 2x2 block per frequency."""
    d = _laplacian_values(p)
    root = np.sqrt(d * d + p.pi3 ** 2 * (1.0 - p.pi1 * d))
    p0 = (d + root) / p.pi3 ** 2
    p2 = np.sqrt(2.0 * p0 + p.pi2) / p.pi3
    p1 = p2 * (p.pi3 ** 2 * p0 - d)
    return RiccatiSpectrum(p0=p0, diag1=p1, diag2=p2, kind=RiccatiKind.CONTROL)


def lqr_spectral_gain(p: NondimParams) -> SpectralGain:
    """Optimal state-feedback gain spectra (k0, sqrt(2 k0 + pi2 pi3**2))."""
    d = _laplacian_values(p)
    k0 = d + np.sqrt(d * d + p.pi3 ** 2 * (1.0 - p.pi1 * d))
    companion = np.sqrt(2.0 * k0 + p.pi2 * p.pi3 ** 2)
    return SpectralGain(k0=k0, companion=companion, kind=GainKind.LQR)


def kf_riccati_spectrum(p: NondimParams) -> RiccatiSpectrum:
    """Stabilizing filter error covariance, one 2x2 block per frequency."""
    d = _laplacian_values(p)
    w = p.pi4 ** 2 * (1.0 - p.pi1 * d)
    s0 = (d + np.sqrt(d * d + w)) / w
    s1 = np.sqrt(2.0 * s0 / w)
    s2 = s1 * (w * s0 - d)
    return RiccatiSpectrum(p0=s0, diag1=s1, diag2=s2, kind=RiccatiKind.FILTER)


def kf_spectral_gain(p: NondimParams) -> SpectralGain:
    """Optimal injection gain spectra (l0, sqrt(2 l0 / pi4))."""
    d = _laplacian_values(p)
    dp = d / p.pi4
    l0 = dp + np.sqrt(dp * dp - p.pi1 * d + 1.0)
    companion = np.sqrt(2.0 * l0 / p.pi4)
    return SpectralGain(k0=l0, companion=companion, kind=GainKind.KF)


def _mirror(values: np.ndarray) -> np.ndarray:
    """values[(n - k) mod n], the reflection a real circulant spectrum obeys."""
    n = values.size
    return values[(-np.arange(n)) % n]


def assemble_gains(g: SpectralGain, p: NondimParams) -> GainSet:
    """Turn gain spectra into circulant first-row blocks.

    The spectra must be symmetric under k -> n - k (true of everything this
    module produces); otherwise the blocks would be complex and a
    :class:`~wavelqg.spectral.SymmetryError` is raised.
    """
    if g.n != p.n:
        raise ValueError(f"gain is for n={g.n}, parameters say n={p.n}")
    for name, seq in (("k0", g.k0), ("companion", g.companion)):
        scale = 1.0 + float(np.abs(seq).max())
        if np.abs(seq - _mirror(seq)).max() > _IMAG_TOL * scale:
            raise SymmetryError(
                f"{name} spectrum is not symmetric under k -> n-k")
    if g.kind is GainKind.LQR:
        spec1, spec2 = g.k0, g.companion
    else:
        # filter: block1 acts on the displacement estimate, and carries the
        # companion sequence; block2 carries l0
        spec1, spec2 = g.companion, g.k0
    block1 = circulant_from_spectrum(Spectrum(spec1.astype(complex)), _IMAG_TOL)
    block2 = circulant_from_spectrum(Spectrum(spec2.astype(complex)), _IMAG_TOL)
    return GainSet(block1=block1, block2=block2, kind=g.kind, params=p,
                   spectral=g)


def gain_are_residuals(gs: GainSet) -> np.ndarray:
    """Per-frequency Riccati residual of the gains in ``gs``.

    Reconstructs the 2x2 Riccati block each frequency's gain pair implies
    and returns the max-abs residual of its algebraic equation, so a gain
    file whose numbers were tampered with (or computed for other
    parameters) reports nonzero residuals.
    """
    p = gs.params
    d = _laplacian_values(p)
    k0 = np.asarray(gs.spectral.k0, dtype=float)
    kc = np.asarray(gs.spectral.companion, dtype=float)
    if gs.kind is GainKind.LQR:
        p0 = k0 / p.pi3 ** 2
        p2 = kc / p.pi3 ** 2
        e11 = 2.0 * p0 * d - p.pi3 ** 2 * p0 ** 2 + (1.0 - p.pi1 * d)
        e22 = 2.0 * p0 - p.pi3 ** 2 * p2 ** 2 + p.pi2
    else:
        w = p.pi4 ** 2 * (1.0 - p.pi1 * d)
        s0 = p.pi4 * k0 / w
        s1 = p.pi4 * kc / w
        e11 = 2.0 * s0 - w * s1 ** 2
        e22 = 2.0 * d * s0 + 1.0 - w * s0 ** 2
    return np.maximum(np.abs(e11), np.abs(e22))


def gain_set_to_dict(gs: GainSet) -> dict:
    """JSON-ready description of a gain set (schema used by the CLI)."""
    return {
        "kind": gs.kind.value,
        "n": gs.params.n,
        "pi": {"pi1": gs.params.pi1, "pi2": gs.params.pi2,
               "pi3": gs.params.pi3, "pi4": gs.params.pi4},
        "block1_first_row": [float(x) for x in gs.block1.first_row],
        "block2_first_row": [float(x) for x in gs.block2.first_row],
        "spectral": {
            "k0": [float(x) for x in gs.spectral.k0],
            "companion": [float(x) for x in gs.spectral.companion],
        },
    }


def gain_set_from_dict(d: dict) -> GainSet:
    """Inverse of :func:`gain_set_to_dict`."""
    pi = d["pi"]
    p = NondimParams(pi1=pi["pi1"], pi2=pi["pi2"], pi3=pi["pi3"],
                     pi4=pi["pi4"], n=int(d["n"]))
    kind = GainKind(d["kind"])
    g = SpectralGain(k0=np.asarray(d["spectral"]["k0"], dtype=float),
                     companion=np.asarray(d["spectral"]["companion"],
                                          dtype=float),
                     kind=kind)
    return GainSet(block1=Circulant(np.asarray(d["block1_first_row"], float)),
                   block2=Circulant(np.asarray(d["block2_first_row"], float)),
                   kind=kind, params=p, spectral=g)


__all__ += ["gain_are_residuals", "gain_set_to_dict", "gain_set_from_dict"]
