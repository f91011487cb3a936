"""Scenario configuration for the rate-splitting MISO downlink optimizer."""

from dataclasses import dataclass, replace


class InvalidConfigError(ValueError):
    """Raised when a scenario configuration violates a model assumption."""


def snr_db_to_power(snr_db: float, sigma_n2: float = 1.0) -> float:
    """Transmit power for a given SNR in dB: Pt = sigma_n2 * 10^(SNR/10)."""
    return float(sigma_n2) * 10.0 ** (float(snr_db) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """All scenario parameters for one solve.

    Power and noise are linear quantities. The per-entry CSIT error
    variance is derived as sigma_e2 = beta * Pt^(-alpha) and must stay
    in [0, 1) for the normalized conditional-sample construction.
    """

    K: int                  # users
    Nt: int                 # transmit antennas (K <= Nt)
    Pt: float               # total transmit power, linear
    sigma_n2: float = 1.0   # noise variance, linear
    alpha: float = 0.6      # CSIT quality exponent in [0, 1]
    beta: float = 1.0       # CSIT error scale, >= 0
    M: int = 1000           # conditional sample size
    eps_R: float = 1e-4     # AO convergence tolerance (sum-rate units)
    max_iters: int = 200    # AO iteration cap
    seed: int = 0           # master RNG seed

    def __post_init__(self):
        if self.K < 1:
            raise InvalidConfigError("K must be >= 1")
        if self.Nt < self.K:
            raise InvalidConfigError(f"need K <= Nt, got K={self.K}, Nt={self.Nt}")
        if self.Pt <= 0:
            raise InvalidConfigError("Pt must be > 0")
        if self.sigma_n2 <= 0:
            raise InvalidConfigError("sigma_n2 must be > 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidConfigError("alpha must be in [0, 1]")
        if self.beta < 0:
            raise InvalidConfigError("beta must be >= 0")
        if self.M < 1:
            raise InvalidConfigError("M must be >= 1")
        if self.eps_R <= 0:
            raise InvalidConfigError("eps_R must be > 0")
        if self.max_iters < 1:
            raise InvalidConfigError("max_iters must be >= 1")
        if not 0.0 <= self.sigma_e2 < 1.0:
            raise InvalidConfigError(
                f"sigma_e2 = beta * Pt^-alpha = {self.sigma_e2:.6g} is outside [0, 1); "
                "the normalized error mixing is undefined there"
            )

    @property
    def sigma_e2(self) -> float:
        """Per-entry CSIT error variance beta * Pt^(-alpha)."""
        return self.beta * self.Pt ** (-self.alpha)

    @property
    def snr_db(self) -> float:
        import math

        return 10.0 * math.log10(self.Pt / self.sigma_n2)

    def at_power(self, Pt: float) -> "SystemConfig":
        """Same scenario at a different transmit power."""
        return replace(self, Pt=Pt)

    def at_snr_db(self, snr_db: float) -> "SystemConfig":
        return self.at_power(snr_db_to_power(snr_db, self.sigma_n2))
