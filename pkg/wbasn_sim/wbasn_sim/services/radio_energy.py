# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

import math
from dataclasses import dataclass
from typing import List

from wbasn_sim.wbasn_sim.exceptions import DomainError, ConfigError

NANO = 1e-9

PATH_LOSS_LOS = 3.38
PATH_LOSS_NLOS = 5.9


@dataclass(frozen=True)
class RadioParams:
    """
    First-order radio model coefficients, all in joules.

    The amplifier coefficient is tied to the configured path-loss exponent;
    it is never multiplied by the exponent itself.

    Attributes:
        e_tx_elec (float): Transmitter electronics energy per bit (J/bit)
        e_rx_elec (float): Receiver electronics energy per bit (J/bit)
        e_amp (float): Amplifier energy per bit per m^n (J/bit/m^n)
        path_loss_exponent (float): Exponent n on distance
    """

    e_tx_elec: float = 16.7 * NANO
    e_rx_elec: float = 36.1 * NANO
    e_amp: float = 1.97 * NANO
    path_loss_exponent: float = PATH_LOSS_LOS

    @classmethod
    def from_nanojoules(cls, e_tx_elec_nj: float, e_rx_elec_nj: float, e_amp_nj: float,
                        path_loss_exponent: float = PATH_LOSS_LOS) -> "RadioParams":
        """Build params from the nJ figures the config file uses."""
        return cls(e_tx_elec_nj * NANO, e_rx_elec_nj * NANO, e_amp_nj * NANO, path_loss_exponent)

    def with_exponent(self, path_loss_exponent: float) -> "RadioParams":
        """Same coefficients on a link with a different exponent (LOS vs NLOS)."""
        return RadioParams(self.e_tx_elec, self.e_rx_elec, self.e_amp, path_loss_exponent)

    def violations(self, prefix: str = "radio") -> List[str]:
        """
        Check the invariants without raising.

        Returns:
            List[str]: One message per violated rule
        """
        problems = []
        for name in ("e_tx_elec", "e_rx_elec", "e_amp", "path_loss_exponent"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                problems.append(f"{prefix}.{name}: must be strictly positive and finite (got {value!r})")
        n = self.path_loss_exponent
        if isinstance(n, (int, float)) and math.isfinite(n) and not 2.0 <= n <= 6.0:
            problems.append(f"{prefix}.path_loss_exponent: must lie within [2.0, 6.0] (got {n!r})")
        return problems

    def validate(self) -> None:
        """Raise ConfigError listing every violated invariant."""
        problems = self.violations()
        if problems:
            raise ConfigError(problems)


DEFAULT_RADIO = RadioParams()


def _check_bits(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int):
        raise DomainError(f"bit count must be an integer, got {k!r}")
    if k < 0:
        raise DomainError(f"bit count must be non-negative, got {k}")


def transmit_energy(params: RadioParams, k: int, d: float) -> float:
    """
    Energy to transmit k bits over d meters.

    E_tx = e_tx_elec * k + e_amp * k * d^n

    Args:
        params (RadioParams): Radio coefficients
        k (int): Number of bits
        d (float): Link distance in meters

    Returns:
        float: Energy in joules

    Raises:
        DomainError: If k or d is negative, or d is not finite
    """
    _check_bits(k)
    if not math.isfinite(d) or d < 0:
        raise DomainError(f"distance must be finite and non-negative, got {d!r}")
    return params.e_tx_elec * k + params.e_amp * k * d ** params.path_loss_exponent


def receive_energy(params: RadioParams, k: int) -> float:
    """
    Energy for the receiver circuitry to take in k bits.

    Raises:
        DomainError: If k is negative
    """
    _check_bits(k)
    return params.e_rx_elec * k
