"""Arrhenius retention math for thermally activated bit loss.

All functions are pure. Energies are in joules, temperatures in kelvin and
times in seconds unless a name says otherwise (``*_years``, ``*_kbt``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

import mpmath

K_B = 1.380649e-23  # J/K
EV = 1.602176634e-19  # J
YEAR_S = 3.1557e7  # Julian year
HOUR_S = 3600.0
WEEK_S = 7 * 24 * HOUR_S
T_REF = 300.0

# ln(sys.float_info.max)
_LOG_MAX_FLOAT = 709.782712893384


class DomainError(ValueError):
    """An argument lies outside the domain of a retention formula."""


class RetentionOverflowError(OverflowError):
    """A result exceeds the largest representable float.

    ``exponent`` holds the natural log of the value that could not be
    represented, so callers can still report the magnitude.
    """

    def __init__(self, what: str, exponent: float):
        super().__init__(f"{what} exceeds representable time (ln value = {exponent:.6g})")
        self.exponent = exponent


@dataclass(frozen=True)
class RetentionModel:
    f0: float
    delta_e: float
    temperature: float

    def __post_init__(self):
        if not self.f0 > 0:
            raise DomainError(f"attempt frequency must be > 0, got {self.f0}")
        if not self.delta_e >= 0:
            raise DomainError(f"energy barrier must be >= 0, got {self.delta_e}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0, got {self.temperature}")

    @property
    def barrier_kbt(self) -> float:
        return self.delta_e / (K_B * self.temperature)

    def rate(self) -> float:
        """Switching rate f0*exp(-dE/kT) in 1/s (underflows to 0, never overflows)."""
        return self.f0 * math.exp(-self.barrier_kbt)


@dataclass(frozen=True)
class TestPlan:
    """Accelerated-ageing plan: storage target plus the test that proves it."""

    storage_time: float
    storage_temp: float
    alpha: float
    test_time: float
    alpha_t: float
    f0: float

    def __post_init__(self):
        if not (self.storage_time > 0 and self.test_time > 0):
            raise DomainError("storage and test times must be > 0")
        if not self.storage_temp > 0:
            raise DomainError("storage temperature must be > 0")
        if not self.f0 > 0:
            raise DomainError("attempt frequency must be > 0")
        for name, a in (("alpha", self.alpha), ("alpha_t", self.alpha_t)):
            if not 0 < a < 1:
                raise DomainError(f"{name} must lie in (0, 1), got {a}")


@dataclass(frozen=True)
class CascadeModel:
    """Sequence of barriers crossed one after another to flip a bit."""

    barriers: tuple[float, ...]
    f0s: tuple[float, ...]

    def __init__(self, barriers: Sequence[float], f0s: Sequence[float] | float):
        barriers = tuple(float(b) for b in barriers)
        if isinstance(f0s, (int, float)):
            f0s = (float(f0s),) * len(barriers)
        f0s = tuple(float(f) for f in f0s)
        if not barriers:
            raise DomainError("cascade needs at least one barrier")
        if len(f0s) != len(barriers):
            raise DomainError("one attempt frequency per barrier required")
        if any(not b >= 0 for b in barriers):
            raise DomainError("barriers must be >= 0")
        if any(not f > 0 for f in f0s):
            raise DomainError("attempt frequencies must be > 0")
        object.__setattr__(self, "barriers", barriers)
        object.__setattr__(self, "f0s", f0s)


def kbt_to_joule(barrier_kbt: float, temperature: float = T_REF) -> float:
    return barrier_kbt * K_B * temperature


def joule_to_ev(energy: float) -> float:
    return energy / EV


def log_decay_time(m: RetentionModel) -> float:
    return m.barrier_kbt - math.log(m.f0)


def decay_time(m: RetentionModel) -> float:
    """Mean time before a thermally activated switch, tau = exp(dE/kT)/f0."""
    log_tau = log_decay_time(m)
    if log_tau > _LOG_MAX_FLOAT:
        raise RetentionOverflowError("decay time", log_tau)
    return math.exp(log_tau)


def switching_probability(m: RetentionModel, t: float) -> float:
    """Probability that a bit has switched after ``t`` seconds."""
    if not t >= 0:
        raise DomainError(f"time must be >= 0, got {t}")
    return -math.expm1(-m.rate() * t)


def _log_ratio(t: float, f0: float, alpha: float) -> float:
    if not (t > 0 and f0 > 0):
        raise DomainError("time and attempt frequency must be > 0")
    if not 0 < alpha < 1:
        raise DomainError(f"error fraction must lie in (0, 1), got {alpha}")
    value = math.log(t) + math.log(f0) - math.log(alpha)
    if not value > 0:
        raise DomainError(f"ln(t*f0/alpha) = {value:.6g} must be > 0 (t*f0/alpha > 1)")
    return value


def required_barrier(t: float, alpha: float, f0: float) -> float:
    """Minimum barrier, in units of kT, keeping the error fraction below ``alpha`` for ``t``."""
    return _log_ratio(t, f0, alpha)


def test_temperature(p: TestPlan) -> float:
    """Temperature at which ``p.test_time`` of ageing proves ``p.storage_time`` of retention."""
    return p.storage_temp * _log_ratio(p.storage_time, p.f0, p.alpha) / _log_ratio(p.test_time, p.f0, p.alpha_t)


def log_equivalent_storage_time(
    test_temp: float,
    test_time: float,
    alpha_t: float,
    storage_temp: float,
    alpha: float,
    f0: float,
) -> float:
    if not (test_temp > 0 and storage_temp > 0):
        raise DomainError("temperatures must be > 0")
    exponent = (test_temp / storage_temp) * _log_ratio(test_time, f0, alpha_t)
    if not 0 < alpha < 1:
        raise DomainError(f"error fraction must lie in (0, 1), got {alpha}")
    return math.log(alpha) - math.log(f0) + exponent


def equivalent_storage_time(
    test_temp: float,
    test_time: float,
    alpha_t: float,
    storage_temp: float,
    alpha: float,
    f0: float,
) -> float:
    """Storage time at ``storage_temp`` proven by surviving ``test_time`` at ``test_temp``.

    Inverse of :func:`test_temperature`.
    """
    log_t = log_equivalent_storage_time(test_temp, test_time, alpha_t, storage_temp, alpha, f0)
    if log_t > _LOG_MAX_FLOAT:
        raise RetentionOverflowError("equivalent storage time", log_t)
    return math.exp(log_t)


def barrier_temperature_model(delta_e0: float, slope: float, temperature: float, t_ref: float = T_REF) -> float:
    """Linearly softening barrier dE(T) = dE0 - slope*(T - t_ref)."""
    value = delta_e0 - slope * (temperature - t_ref)
    if value < 0:
        raise DomainError(f"barrier model gives negative barrier {value:.6g} J at {temperature} K")
    return value


def _merge_close(rates: list[mpmath.mpf], rel: float) -> list[mpmath.mpf]:
    # snap near-equal rates to one value so the confluent (Erlang) branch is used
    rates = sorted(rates)
    out: list[mpmath.mpf] = []
    group: list[mpmath.mpf] = []
    for r in rates:
        if group and abs(r - group[0]) > rel * group[0]:
            mean = mpmath.fsum(group) / len(group)
            out.extend([mean] * len(group))
            group = []
        group.append(r)
    mean = mpmath.fsum(group) / len(group)
    out.extend([mean] * len(group))
    return out


def cascade_switch_probability(c: CascadeModel, temperature: float, t: float, *, equal_rel: float = 1e-9) -> float:
    """Probability that all steps of the cascade have completed within ``t``.

    The completion time is a sum of independent exponential waits, so its CDF
    is (-1)^n * prod(r) * D[0, r_1..r_n] exp(-x t), with D a divided
    difference. Repeated nodes use the derivative (Erlang) form. Evaluated in
    extended precision sized to the cancellation depth.
    """
    if not temperature > 0:
        raise DomainError("temperature must be > 0")
    if not t >= 0:
        raise DomainError("time must be >= 0")
    if t == 0:
        return 0.0
    n = len(c.barriers)
    # digits lost to cancellation grow with -log10(r t) per step
    scaled = [math.log(f) - b / (K_B * temperature) + math.log(t) for b, f in zip(c.barriers, c.f0s)]
    lost = sum(max(0.0, -s / math.log(10)) for s in scaled)
    dps = int(min(30 + lost + 5 * n, 4000))
    with mpmath.workdps(dps):
        tt = mpmath.mpf(t)
        rates = [mpmath.mpf(f) * mpmath.exp(-mpmath.mpf(b) / (K_B * temperature)) for b, f in zip(c.barriers, c.f0s)]
        nodes = [mpmath.mpf(0)] + _merge_close(rates, equal_rel)

        def deriv(x, k):
            return (-tt) ** k * mpmath.exp(-x * tt) / mpmath.factorial(k)

        # dd[i] holds D[x_i..x_{i+k}] for the current order k
        dd = [deriv(x, 0) for x in nodes]
        for k in range(1, n + 1):
            nxt = []
            for i in range(len(nodes) - k):
                lo, hi = nodes[i], nodes[i + k]
                if hi == lo:
                    nxt.append(deriv(lo, k))
                else:
                    nxt.append((dd[i + 1] - dd[i]) / (hi - lo))
            dd = nxt
        prob = (-1) ** n * mpmath.fprod(rates) * dd[0]
        return float(min(max(prob, 0), 1))
