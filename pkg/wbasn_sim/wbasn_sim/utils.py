# Copyright (c) 2025, WBASN Sim contributors
# For license information, please see license.txt

import logging
import math
from typing import Any, Optional

from wbasn_sim import hooks


def logger(module: Optional[str] = None) -> logging.Logger:
    """
    Get the app logger, or a child of it.

    Args:
        module (str): Optional child name, e.g. "simulator"

    Returns:
        logging.Logger: Logger under the app namespace
    """
    name = hooks.logger_name if not module else f"{hooks.logger_name}.{module}"
    return logging.getLogger(name)


def log_error(message: str, title: str = "WBASN Sim") -> None:
    """Record an error under a title, the way failures are reported across the app."""
    logger().error("%s: %s", title, message)


def cint(val: Any) -> int:
    """
    Convert a config value to int.

    Accepts ints, integral floats and their string forms ("12", "12.0").

    Raises:
        ValueError: If the value is empty or not integral
    """
    if isinstance(val, bool):
        return int(val)
    if isinstance(val, int):
        return val
    text = str(val).strip()
    if not text:
        raise ValueError("empty value")
    try:
        return int(text)
    except ValueError:
        number = float(text)
        if not number.is_integer():
            raise ValueError(f"{text!r} is not an integer")
        return int(number)


def flt(val: Any) -> float:
    """
    Convert a config value to a finite float.

    Raises:
        ValueError: If the value is empty, not numeric or not finite
    """
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        number = float(val)
    else:
        text = str(val).strip()
        if not text:
            raise ValueError("empty value")
        number = float(text)
    if not math.isfinite(number):
        raise ValueError(f"{val!r} is not finite")
    return number


_TRUE = {"1", "on", "true", "yes"}
_FALSE = {"0", "off", "false", "no"}


def check(val: Any) -> bool:
    """Convert an on/off style config value to bool."""
    if isinstance(val, bool):
        return val
    text = str(val).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"{val!r} is not one of on/off, true/false, yes/no, 1/0")
