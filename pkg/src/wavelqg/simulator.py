"""Euler-Maruyama Monte Carlo validation of the closed-loop design.

The loop simulated here is exactly the one ``analysis.build_closed_loop``
assembles: plant driven by unit-intensity force disturbance, estimator
driven by the measured displacements corrupted by spatially correlated
noise with covariance (I - pi1 Lap)^-1, control u = -K (estimate).  The
empirical time-averaged quadratic cost and estimation-error power then have
closed-form predictions (``analysis.lqg_cost`` / ``analysis.kf_cost``),
which is what makes the simulator a useful end-to-end check.

Determinism
-----------
Realization i draws from numpy's PCG64 seeded with
``SeedSequence(seed, spawn_key=(i,))`` -- a documented, order-independent
splitting rule, so running realizations in any order (or in parallel)
reproduces identical results.  Within a realization each step consumes 2n
standard normals (n disturbance, n measurement) drawn row-wise, so the
noise stream does not depend on internal chunk sizes and paths agree
across chunkings to floating-point roundoff.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .analysis import build_closed_loop, kf_cost, lqg_cost
from .params import NondimParams
from .spectral import laplacian_circulant, laplacian_spectrum

__all__ = [
    "InstabilityError",
    "SimConfig",
    "Trajectory",
    "SimSummary",
    "sample_correlated_noise",
    "noise_covariance",
    "simulate",
    "kernel_backend",
]

_BLOWUP = 1e12
_MAX_CHUNK = 8192


class InstabilityError(RuntimeError):
    """The discretized loop blew up; the step size is too coarse."""


def kernel_backend() -> str:
    """Which stepping kernel is active ("cython" or "python")."""
    return _kernels.BACKEND


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run description.

    ``dt`` must respect the explicit-integration guard
    dt <= 0.1 / sqrt(4 + pi3 + pi4); the closed-loop frequencies grow with
    the gains, and the guard keeps the forward Euler map comfortably inside
    its stability region for this family.
    """

    params: NondimParams
    dt: float = 0.01
    t_final: float = 200.0
    seed: int = 0
    burn_in: float = 0.2
    n_realizations: int = 1
    noise_scale: float = 1.0
    store_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        guard = 0.1 / math.sqrt(4.0 + self.params.pi3 + self.params.pi4)
        if self.dt > guard:
            raise ValueError(
                f"dt={self.dt!r} exceeds the stability guard {guard:.6g} "
                "= 0.1/sqrt(4 + pi3 + pi4) for these parameters")
        if not (self.t_final > 0.0) or self.n_steps < 10:
            raise ValueError("t_final must cover at least 10 steps")
        if not (0.0 <= self.burn_in < 1.0):
            raise ValueError(f"burn_in must lie in [0, 1), got {self.burn_in!r}")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be at least 1")
        if self.store_every < 1:
            raise ValueError("store_every must be at least 1")
        if not (self.noise_scale >= 0.0):
            raise ValueError("noise_scale must be nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Stored path of the first realization (subsampled by store_every)."""

    times: np.ndarray        # (m,)
    plant_state: np.ndarray  # (m, 2n)
    estimate: np.ndarray     # (m, 2n)
    control: np.ndarray      # (m, n)
    running_cost: np.ndarray  # (m,) cumulative cost integral from t = 0


@dataclass(frozen=True)
class SimSummary:
    """Aggregated Monte Carlo outcome next to the closed-form predictions."""

    empirical_lqg_cost: float
    empirical_est_err_cov_trace: float
    predicted_lqg_cost: float
    predicted_est_err_cov_trace: float
    realization_costs: list[float] = field(default_factory=list)
    realization_err_traces: list[float] = field(default_factory=list)
    seed: int = 0
    dt: float = 0.0
    t_final: float = 0.0
    burn_in: float = 0.0
    n_realizations: int = 0
    noise_scale: float = 1.0
    generator: str = "pcg64"
    backend: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _noise_filter(pi1: float, n: int) -> np.ndarray | None:
    """Spectral scaling turning white noise into covariance (I-pi1 Lap)^-1."""
    if pi1 == 0.0:
        return None
    d = laplacian_spectrum(n).values.real
    return np.sqrt(1.0 / (1.0 - pi1 * d))


def _correlate(white: np.ndarray, scaling: np.ndarray | None) -> np.ndarray:
    if scaling is None:
        return white
    return np.fft.ifft(np.fft.fft(white, axis=-1) * scaling, axis=-1).real


def sample_correlated_noise(pi1: float, n: int, rng: np.random.Generator,
                            size: int | None = None) -> np.ndarray:
    """Gaussian vector(s) with covariance (I - pi1 Lap)^-1.

    Sampling is spectral: scale the DFT of white noise by the square root
    of the per-frequency variance 1/(1 - pi1 d(k)) and transform back; the
    filter is real and symmetric so the output is real.  With ``size`` an
    (size, n) array of independent draws is returned.
    """
    if pi1 < 0.0:
        raise ValueError("pi1 must be nonnegative")
    if n < 2:
        raise ValueError("n must be at least 2")
    shape = (n,) if size is None else (int(size), n)
    white = rng.standard_normal(shape)
    return _correlate(white, _noise_filter(pi1, n))


def noise_covariance(pi1: float, n: int) -> np.ndarray:
    """Dense (I - pi1 Lap)^-1, the measurement noise covariance."""
    lap = laplacian_circulant(n).dense()
    return np.linalg.inv(np.eye(n) - pi1 * lap)


def _segments(n_steps: int, store_every: int, burn_step: int) -> list[tuple[int, int]]:
    """Split [0, n_steps) at stored samples, the burn-in boundary and a
    maximum chunk length; every boundary type is honored simultaneously."""
    cuts = set(range(0, n_steps + 1, store_every))
    cuts.add(n_steps)
    cuts.add(burn_step)
    ordered = sorted(c for c in cuts if 0 <= c <= n_steps)
    segs = []
    for lo, hi in zip(ordered[:-1], ordered[1:]):
        start = lo
        while hi - start > _MAX_CHUNK:
            segs.append((start, start + _MAX_CHUNK))
            start += _MAX_CHUNK
        if hi > start:
            segs.append((start, hi))
    return segs


def simulate(cfg: SimConfig,
             x0: np.ndarray | None = None,
             xh0: np.ndarray | None = None,
             _advance=None) -> tuple[Trajectory, SimSummary]:
    """Run the Monte Carlo experiment described by ``cfg``.

    Returns the (subsampled) trajectory of the first realization together
    with summary statistics over all realizations.  ``x0``/``xh0`` override
    the zero initial plant state / estimate (mainly for decay tests).

    Raises
    ------
    InstabilityError
        If any state magnitude exceeds 1e12, which for this always-stable
        loop means the discretization, not the design, failed.
    """
    advance = _advance if _advance is not None else _kernels.advance
    p = cfg.params
    n = p.n
    cl = build_closed_loop(p)
    m_aug = np.ascontiguousarray(cl.augmented)
    lap = laplacian_circulant(n).dense()
    qbar = np.block([[np.eye(n) - p.pi1 * lap, np.zeros((n, n))],
                     [np.zeros((n, n)), p.pi2 * np.eye(n)]])
    kmat = np.hstack([cl.gain_k.block1.dense(), cl.gain_k.block2.dense()])
    lmat = np.vstack([cl.gain_l.block1.dense(), cl.gain_l.block2.dense()])
    krk = kmat.T @ kmat / p.pi3 ** 2
    qbar = np.ascontiguousarray(qbar)
    krk = np.ascontiguousarray(krk)

    n_steps = cfg.n_steps
    burn_step = int(round(cfg.burn_in * n_steps))
    segs = _segments(n_steps, cfg.store_every, burn_step)
    stored_steps = sorted(set(range(0, n_steps + 1, cfg.store_every)) | {n_steps})
    store_at = {s: i for i, s in enumerate(stored_steps)}
    sqrt_dt = math.sqrt(cfg.dt)
    scaling = _noise_filter(p.pi1, n)

    z0 = np.zeros(4 * n)
    if x0 is not None:
        z0[:2 * n] = np.asarray(x0, dtype=float).reshape(2 * n)
    if xh0 is not None:
        z0[2 * n:] = np.asarray(xh0, dtype=float).reshape(2 * n)

    t_post = (n_steps - burn_step) * cfg.dt
    if t_post <= 0.0:
        raise ValueError("burn_in leaves no post-burn-in samples")

    costs = []
    errs = []
    traj_states = np.empty((len(stored_steps), 4 * n))
    traj_cost = np.empty(len(stored_steps))

    for real in range(cfg.n_realizations):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(real,))))
        z = z0.copy()
        cum_cost = 0.0
        post_cost = 0.0
        post_err = 0.0
        if real == 0:
            traj_states[0] = z
            traj_cost[0] = 0.0
        for lo, hi in segs:
            steps = hi - lo
            raw = rng.standard_normal((steps, 2 * n))
            noise = np.zeros((steps, 4 * n))
            if cfg.noise_scale != 0.0:
                amp = cfg.noise_scale * sqrt_dt
                noise[:, n:2 * n] = amp * raw[:, :n]
                noise[:, 2 * n:] = amp * (_correlate(raw[:, n:], scaling)
                                          @ lmat.T)
            c_int, e_int, mx = advance(z, m_aug, qbar, krk, noise, cfg.dt)
            if mx > _BLOWUP or not math.isfinite(mx):
                raise InstabilityError(
                    f"state magnitude exceeded {_BLOWUP:.0e} at "
                    f"t ~ {hi * cfg.dt:.3g} (realization {real}); "
                    f"reduce dt={cfg.dt!r}")
            cum_cost += c_int
            if lo >= burn_step:
                post_cost += c_int
                post_err += e_int
            if real == 0 and hi in store_at:
                idx = store_at[hi]
                traj_states[idx] = z
                traj_cost[idx] = cum_cost
        costs.append(post_cost / t_post)
        errs.append(post_err / t_post)

    times = np.array(stored_steps, dtype=float) * cfg.dt
    plant = traj_states[:, :2 * n]
    est = traj_states[:, 2 * n:]
    control = -(est @ kmat.T)
    traj = Trajectory(times=times, plant_state=plant, estimate=est,
                      control=control, running_cost=traj_cost)
    summary = SimSummary(
        empirical_lqg_cost=float(np.mean(costs)),
        empirical_est_err_cov_trace=float(np.mean(errs)),
        predicted_lqg_cost=lqg_cost(p),
        predicted_est_err_cov_trace=kf_cost(p),
        realization_costs=[float(c) for c in costs],
        realization_err_traces=[float(e) for e in errs],
        seed=cfg.seed, dt=cfg.dt, t_final=cfg.t_final, burn_in=cfg.burn_in,
        n_realizations=cfg.n_realizations, noise_scale=cfg.noise_scale,
        generator="pcg64", backend=(_kernels.BACKEND if _advance is None
                                    else "custom"))
    return traj, summary
