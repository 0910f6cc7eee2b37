"""Truncated-Fourier control waveforms with tranquilized endpoints.

Every Rabi-frequency and detuning channel is either a constant or a real
cosine series on one pulse window.  A coefficient list ``[a_0, ..., a_N]``
with reference duration ``tau`` evaluates to

    f(t) = 2*pi * (a_0 + 2 * sum_n a_n cos(2*pi*n*t/tau)) / (2N + 1)   [rad/us]

with the coefficients kept in MHz-scale units exactly as tabulated.  The
cosine form makes the first derivative vanish at both endpoints, so pulses
switch on and off without abrupt edges.  Constants evaluate to
``2*pi*a_0`` with no ``(2N+1)`` divisor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: Default pulse window in microseconds.
DEFAULT_DURATION = 0.25

# Relative slack when checking the time domain; integrators may probe the
# endpoint with last-bit rounding.
_DOMAIN_SLACK = 1e-9


class WaveformKind(enum.Enum):
    TIME_VARYING = "time_varying"
    CONSTANT = "constant"


class WaveformError(ValueError):
    """Malformed waveform definition or evaluation outside the pulse window."""


@dataclass(frozen=True)
class WaveformSpec:
    """One control channel: a cosine series or a constant.

    Parameters
    ----------
    coefficients : tuple of float
        MHz-scale series coefficients ``a_0..a_N`` (a single value for a
        constant channel).  Stored exactly as published; unit conversion
        happens at evaluation time.
    duration : float
        Pulse window in microseconds, > 0.
    kind : WaveformKind
        Time-varying cosine series or constant.
    """

    coefficients: tuple[float, ...]
    duration: float = DEFAULT_DURATION
    kind: WaveformKind = WaveformKind.TIME_VARYING

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not coeffs:
            raise WaveformError("coefficient list must not be empty")
        if self.kind is WaveformKind.CONSTANT and len(coeffs) != 1:
            raise WaveformError(
                f"constant waveform takes exactly one coefficient, got {len(coeffs)}"
            )
        if not all(math.isfinite(c) for c in coeffs):
            raise WaveformError("coefficients must be finite")
        if not (self.duration > 0.0 and math.isfinite(self.duration)):
            raise WaveformError(f"duration must be positive, got {self.duration}")

    @property
    def harmonics(self) -> int:
        """Highest harmonic index N."""
        return len(self.coefficients) - 1

    def _check_domain(self, t: np.ndarray | float) -> None:
        slack = _DOMAIN_SLACK * self.duration
        tmin = float(np.min(t))
        tmax = float(np.max(t))
        if tmin < -slack or tmax > self.duration + slack:
            raise WaveformError(
                f"time {tmin if tmin < -slack else tmax:.6g} outside pulse window "
                f"[0, {self.duration}]"
            )

    def value(self, t):
        """Angular frequency in rad/us at time ``t`` (scalar or array, us)."""
        self._check_domain(t)
        a = self.coefficients
        if self.kind is WaveformKind.CONSTANT:
            out = TWO_PI * a[0]
            return out if np.isscalar(t) else np.full_like(np.asarray(t, float), out)
        n = np.arange(1, len(a))
        phase = np.multiply.outer(np.asarray(t, float), n) * (TWO_PI / self.duration)
        series = a[0] + 2.0 * np.cos(phase) @ np.asarray(a[1:])
        series *= TWO_PI / (2 * self.harmonics + 1)
        return float(series) if np.isscalar(t) else series

    def derivative(self, t):
        """Time derivative of :meth:`value` in rad/us^2."""
        self._check_domain(t)
        a = self.coefficients
        if self.kind is WaveformKind.CONSTANT:
            return 0.0 if np.isscalar(t) else np.zeros_like(np.asarray(t, float))
        n = np.arange(1, len(a))
        omega = TWO_PI * n / self.duration
        phase = np.multiply.outer(np.asarray(t, float), n) * (TWO_PI / self.duration)
        series = -2.0 * np.sin(phase) @ (np.asarray(a[1:]) * omega)
        series *= TWO_PI / (2 * self.harmonics + 1)
        return float(series) if np.isscalar(t) else series

    def mean_value(self) -> float:
        """Pulse-window average of :meth:`value` in rad/us (closed form)."""
        if self.kind is WaveformKind.CONSTANT:
            return TWO_PI * self.coefficients[0]
        return TWO_PI * self.coefficients[0] / (2 * self.harmonics + 1)

    def scaled(self, factor: float) -> "WaveformSpec":
        """New spec with every coefficient multiplied by ``factor``."""
        return WaveformSpec(
            tuple(factor * c for c in self.coefficients), self.duration, self.kind
        )

    def sign_changes(self) -> int:
        """Count sign flips of the sampled value (pi phase slips of the drive)."""
        if self.kind is WaveformKind.CONSTANT:
            return 0
        t = np.linspace(0.0, self.duration, 2048)
        v = self.value(t)
        s = np.sign(v[np.abs(v) > 1e-12 * (np.max(np.abs(v)) + 1e-300)])
        return int(np.count_nonzero(np.diff(s)))


def constant(value: float, duration: float = DEFAULT_DURATION) -> WaveformSpec:
    """Constant channel at ``2*pi*value`` rad/us."""
    return WaveformSpec((float(value),), duration, WaveformKind.CONSTANT)


def time_varying(
    coefficients, duration: float = DEFAULT_DURATION
) -> WaveformSpec:
    """Cosine-series channel from MHz-scale coefficients ``a_0..a_N``."""
    return WaveformSpec(tuple(coefficients), duration, WaveformKind.TIME_VARYING)


def parse_coefficients(
    text: str,
    duration: float = DEFAULT_DURATION,
    kind: WaveformKind = WaveformKind.TIME_VARYING,
) -> WaveformSpec:
    """Parse a bracketed decimal list like ``"[40.14, 31.41, -6.14]"``.

    Raises
    ------
    WaveformError
        Empty list or non-numeric token, reporting the 1-based token position.
    """
    stripped = text.strip()
    if not (stripped.startswith("[") and stripped.endswith("]")):
        raise WaveformError(f"expected a bracketed list, got {text!r}")
    body = stripped[1:-1].strip()
    if not body:
        raise WaveformError("empty coefficient list")
    values = []
    for pos, token in enumerate(body.split(","), start=1):
        token = token.strip()
        try:
            values.append(float(token))
        except ValueError:
            raise WaveformError(
                f"non-numeric coefficient {token!r} at token {pos}"
            ) from None
    return WaveformSpec(tuple(values), duration, kind)


def serialize_coefficients(spec: WaveformSpec) -> str:
    """Canonical bracketed form; round-trips with :func:`parse_coefficients`."""
    return "[" + ", ".join(repr(c) for c in spec.coefficients) + "]"
