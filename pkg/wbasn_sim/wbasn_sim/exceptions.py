# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

from typing import Iterable, List


class ValidationError(Exception):
	"""Base class for every error raised by the simulator."""


class DomainError(ValidationError, ValueError):
	"""An argument lies outside the domain of an energy or statistics formula."""


class NodeStateError(ValidationError):
	"""An operation was attempted on a sensor node in the wrong life state."""


class ConfigError(ValidationError):
	"""
	Configuration failed to parse or validate.

	Carries every violation found, not only the first one.
	"""

	def __init__(self, violations: Iterable[str]):
		self.violations: List[str] = list(violations)
		super().__init__("; ".join(self.violations) or "invalid configuration")


class OutputError(ValidationError, OSError):
	"""The output bundle could not be written."""
