"""Channel generation: estimates, conditional error samples, true channels.

The fading model is i.i.d. unit-variance complex Gaussian per entry. The
transmitter sees an imperfect estimate whose per-entry error variance is
sigma_e2 = beta * Pt^(-alpha). Conditional realizations mix a normalized
estimate with normalized error draws,

    H(m) = sqrt(1 - sigma_e2) * Hn_hat + sqrt(sigma_e2) * Hn_err(m),

so the total per-entry variance stays 1 for every sigma_e2 in [0, 1).
The scaled estimate itself is H_hat = sqrt(1 - sigma_e2) * Hn_hat.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import InvalidConfigError, SystemConfig

# Sub-stream identifiers for deterministic seed spawning. The error pool
# stream is independent of the estimate index so the same normalized
# errors are reused across channel estimates and across SNR points.
_STREAM_ESTIMATE = 0
_STREAM_ERROR = 1
_STREAM_TRUE = 2
_STREAM_VALIDATION = 3


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: independent real/imag parts with variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelEstimate:
    """Transmitter-side channel estimate with isotropic error statistics.

    H_hat is Nt x K (column k is user k's estimated channel); sigma_e2 is
    the per-entry error variance, identical for all users.
    """

    H_hat: np.ndarray
    sigma_e2: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.H_hat)):
            raise ValueError("H_hat has non-finite entries")
        if not 0.0 <= self.sigma_e2 < 1.0:
            raise InvalidConfigError(f"sigma_e2 = {self.sigma_e2} outside [0, 1)")
        self.H_hat.setflags(write=False)

    @property
    def Nt(self) -> int:
        return self.H_hat.shape[0]

    @property
    def K(self) -> int:
        return self.H_hat.shape[1]


@dataclass(frozen=True)
class ConditionalSample:
    """M conditional channel realizations for one estimate.

    realizations has shape (M, Nt, K). per_user caches the transposed
    (K, M, Nt) view used by the per-user kernels.
    """

    realizations: np.ndarray
    per_user: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.realizations.setflags(write=False)
        pu = np.ascontiguousarray(self.realizations.transpose(2, 0, 1))
        pu.setflags(write=False)
        object.__setattr__(self, "per_user", pu)

    @property
    def M(self) -> int:
        return self.realizations.shape[0]


def generate_scenario(cfg: SystemConfig, rng: np.random.Generator):
    """Draw one (estimate, true channel) pair.

    Returns the scaled estimate H_hat = sqrt(1 - sigma_e2) * Hn and one
    true channel H = H_hat + sqrt(sigma_e2) * N with N ~ CN(0, 1) entries.
    Deterministic for a given generator state.
    """
    se2 = cfg.sigma_e2
    Hn = _complex_gaussian(rng, (cfg.Nt, cfg.K))
    H_hat = np.sqrt(1.0 - se2) * Hn
    H_true = H_hat + np.sqrt(se2) * _complex_gaussian(rng, (cfg.Nt, cfg.K))
    return ChannelEstimate(H_hat=H_hat, sigma_e2=se2), H_true


def sample_conditional(est: ChannelEstimate, M: int, rng: np.random.Generator) -> ConditionalSample:
    """Draw M realizations from the conditional distribution around est."""
    if M < 1:
        raise ValueError("M must be >= 1")
    err = _complex_gaussian(rng, (M, est.Nt, est.K))
    return ConditionalSample(realizations=est.H_hat[None, :, :] + np.sqrt(est.sigma_e2) * err)


def _stream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Deterministic sub-stream of the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


class ScenarioPool:
    """Normalized channel pools shared across SNR points.

    Estimates are indexed; the normalized error pools (one for building
    conditional samples, one for validation) are drawn once from their
    own sub-streams and reused for every estimate and power level. True
    channels come from a third, independent stream.
    """

    def __init__(self, seed: int, Nt: int, K: int, n_channels: int, M: int, M_val: int = 0):
        self.seed = int(seed)
        self.Nt, self.K = int(Nt), int(K)
        self.n_channels = int(n_channels)
        rng_est = _stream(self.seed, _STREAM_ESTIMATE)
        self._Hn_hat = _complex_gaussian(rng_est, (n_channels, Nt, K))
        self._Hn_err = _complex_gaussian(_stream(self.seed, _STREAM_ERROR), (M, Nt, K))
        self._Hn_val = (
            _complex_gaussian(_stream(self.seed, _STREAM_VALIDATION), (M_val, Nt, K))
            if M_val
            else None
        )

    def estimate(self, index: int, cfg: SystemConfig) -> ChannelEstimate:
        se2 = cfg.sigma_e2
        return ChannelEstimate(
            H_hat=np.sqrt(1.0 - se2) * self._Hn_hat[index], sigma_e2=se2
        )

    def conditional_sample(self, index: int, cfg: SystemConfig) -> ConditionalSample:
        est = self.estimate(index, cfg)
        return ConditionalSample(
            realizations=est.H_hat[None, :, :] + np.sqrt(est.sigma_e2) * self._Hn_err
        )

    def validation_sample(self, index: int, cfg: SystemConfig) -> ConditionalSample:
        if self._Hn_val is None:
            raise ValueError("pool was built without a validation stream")
        est = self.estimate(index, cfg)
        return ConditionalSample(
            realizations=est.H_hat[None, :, :] + np.sqrt(est.sigma_e2) * self._Hn_val
        )

    def true_channel(self, index: int, cfg: SystemConfig) -> np.ndarray:
        est = self.estimate(index, cfg)
        err = _complex_gaussian(_stream(self.seed, _STREAM_TRUE, index), (self.Nt, self.K))
        return est.H_hat + np.sqrt(cfg.sigma_e2) * err
