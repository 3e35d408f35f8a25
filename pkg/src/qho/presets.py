"""Built-in coefficient presets used across tests, demos and the CLI.

`sho`        stationary oscillator, a = b = 1/2.
`free`       free particle (a = 1, pure Riccati branch, c0 = 0).
`caldirola-kanai`  damped oscillator with exponentially swapped mass/stiffness.
`driven-sho` oscillator with a cosine force on top of the sho coefficients.
"""

from __future__ import annotations

from .expressions import CoefficientSet

__all__ = ["PRESETS", "preset_coefficients", "preset_names"]

PRESETS = {
    "sho": {
        "coefficients": {"a": "0.5", "b": "0.5", "c": "0", "d": "0", "f": "0", "g": "0"},
        "c0": 1,
    },
    "free": {
        "coefficients": {"a": "1", "b": "0", "c": "0", "d": "0", "f": "0", "g": "0"},
        "c0": 0,
    },
    "caldirola-kanai": {
        "coefficients": {
            "a": "0.5*exp(-0.2*t)",
            "b": "0.5*exp(0.2*t)",
            "c": "0", "d": "0", "f": "0", "g": "0",
        },
        "c0": 1,
    },
    "driven-sho": {
        "coefficients": {
            "a": "0.5", "b": "0.5", "c": "0", "d": "0",
            "f": "0.3*cos(t)", "g": "0",
        },
        "c0": 1,
    },
}


def preset_names():
    return sorted(PRESETS)


def preset_coefficients(name: str):
    """Return (CoefficientSet, c0) for a named preset."""
    try:
        entry = PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return CoefficientSet.from_strings(**entry["coefficients"]), entry["c0"]
