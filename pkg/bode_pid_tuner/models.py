import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    """JSON has no inf/nan; report them as null."""
    if value is None or not math.isfinite(value):
        return None
    return value


class Polynomial(BaseModel):
    """Real polynomial in s, coefficients in descending powers."""

    model_config = ConfigDict(frozen=True)

    coeffs: Tuple[float, ...]

    @field_validator("coeffs")
    def leading_coefficient_nonzero(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        """Validate the coefficient sequence."""
        if len(v) == 0:
            raise ValueError("Polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in v):
            raise ValueError("Polynomial coefficients must be finite")
        if v[0] == 0.0 and any(c != 0.0 for c in v):
            raise ValueError("leading coefficient must be nonzero")
        return v

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)


class RationalTf(BaseModel):
    """Rational transfer function num(s)/den(s); coefficients are kept exactly as built."""

    model_config = ConfigDict(frozen=True)

    num: Polynomial
    den: Polynomial

    @field_validator("den")
    def denominator_not_zero(cls, v: Polynomial) -> Polynomial:
        if v.is_zero:
            raise ValueError("zero denominator")
        return v

    @property
    def is_proper(self) -> bool:
        return self.num.is_zero or self.num.degree <= self.den.degree

    @classmethod
    def unity(cls) -> "RationalTf":
        return cls(num=Polynomial(coeffs=(1.0,)), den=Polynomial(coeffs=(1.0,)))


class DeadTimePlant(BaseModel):
    """Rational plant in series with a pure delay e^(-delay*s)."""

    model_config = ConfigDict(frozen=True)

    tf: RationalTf
    delay: float = 0.0

    @field_validator("delay")
    def delay_non_negative(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0.0:
            raise ValueError("delay must be a finite number >= 0")
        return v

    def to_dict(self) -> Dict[str, Any]:
        """Plant file representation: {"num": [...], "den": [...], "delay": seconds}."""
        return {
            "num": list(self.tf.num.coeffs),
            "den": list(self.tf.den.coeffs),
            "delay": self.delay,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DeadTimePlant":
        """Create a plant from its file representation."""
        missing = [key for key in ("num", "den") if key not in data]
        if missing:
            raise ValueError(f"Plant document is missing {', '.join(missing)}")
        return cls(
            tf=RationalTf(
                num=Polynomial(coeffs=tuple(float(c) for c in data["num"])),
                den=Polynomial(coeffs=tuple(float(c) for c in data["den"])),
            ),
            delay=float(data.get("delay", 0.0)),
        )


class FrequencyPoint(BaseModel):
    """Magnitude and unwrapped phase (radians) of a response at one frequency."""

    model_config = ConfigDict(frozen=True)

    omega: float
    magnitude: float
    phase: float

    @field_validator("omega")
    def omega_positive(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("omega must be positive")
        return v

    @field_validator("magnitude")
    def magnitude_non_negative(cls, v: float) -> float:
        if not v >= 0.0:
            raise ValueError("magnitude must be >= 0")
        return v

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": self.omega,
            "magnitude": self.magnitude,
            "phase_deg": math.degrees(self.phase),
        }


class SlopeMethod(str, Enum):
    """How a slope estimate was produced."""

    EXACT = "exact"
    BODE = "bode"
    BODE_DELAYED = "bode_delayed"


class SlopeEstimate(BaseModel):
    """Logarithmic amplitude slope s_a and phase slope s_p at omega0."""

    model_config = ConfigDict(frozen=True)

    omega0: float
    s_a: float
    s_p: float
    method: SlopeMethod

    @field_validator("s_a", "s_p")
    def slope_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("slope estimates must be finite")
        return v

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega0": self.omega0,
            "s_a": self.s_a,
            "s_p": self.s_p,
            "method": self.method.value,
        }


class DesignSpec(BaseModel):
    """Desired gain crossover (rad/s), phase margin and Nyquist slope (radians)."""

    model_config = ConfigDict(frozen=True)

    omega_c: float
    phi_d: float
    psi_d: float

    @field_validator("omega_c")
    def crossover_positive(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("omega_c must be positive")
        return v

    @field_validator("phi_d")
    def margin_in_range(cls, v: float) -> float:
        if not 0.0 < v < math.pi:
            raise ValueError("phase margin must lie strictly between 0 and 180 degrees")
        return v

    @classmethod
    def from_degrees(cls, omega_c: float, pm_deg: float, psi_deg: float) -> "DesignSpec":
        return cls(omega_c=omega_c, phi_d=math.radians(pm_deg), psi_d=math.radians(psi_deg))

    def to_dict(self) -> Dict[str, Any]:
        """Spec file representation; angles in degrees."""
        return {
            "wc": self.omega_c,
            "pm_deg": math.degrees(self.phi_d),
            "psi_deg": math.degrees(self.psi_d),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DesignSpec":
        """Create a spec from {"wc": ..., "pm_deg": ..., "psi_deg": ...}."""
        missing = [key for key in ("wc", "pm_deg", "psi_deg") if key not in data]
        if missing:
            raise ValueError(f"Spec document is missing {', '.join(missing)}")
        return cls.from_degrees(float(data["wc"]), float(data["pm_deg"]), float(data["psi_deg"]))


class PidController(BaseModel):
    """Series-of-terms PID Kp(1 + 1/(Ti s) + Td s).

    ``ti`` may be infinite, which disables integral action.
    """

    model_config = ConfigDict(frozen=True)

    kp: float
    ti: float
    td: float = 0.0

    @field_validator("kp")
    def gain_positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError("kp must be a finite positive number")
        return v

    @field_validator("ti")
    def integral_time_positive(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("ti must be positive")
        return v

    @field_validator("td")
    def derivative_time_non_negative(cls, v: float) -> float:
        if not (math.isfinite(v) and v >= 0.0):
            raise ValueError("td must be a finite number >= 0")
        return v

    @property
    def ki(self) -> float:
        return self.kp / self.ti

    @property
    def kd(self) -> float:
        return self.kp * self.td

    def to_dict(self, include_parallel: bool = True) -> Dict[str, Any]:
        """Controller file representation.

        Args:
            include_parallel: Also emit the derived parallel gains ki, kd

        Returns:
            dict: {"kp", "ti", "td"} plus optionally {"ki", "kd"}
        """
        data: Dict[str, Any] = {"kp": self.kp, "ti": _finite_or_none(self.ti), "td": self.td}
        if include_parallel:
            data["ki"] = self.ki
            data["kd"] = self.kd
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PidController":
        """Create a controller from series (kp, ti, td) or parallel (kp, ki, kd) keys.

        A whole tune report is accepted too; its "controller" entry is used.
        """
        if "controller" in data and isinstance(data["controller"], dict):
            data = data["controller"]
        if "kp" not in data:
            raise ValueError("Controller document is missing kp")
        kp = float(data["kp"])
        if "ti" in data:
            ti = math.inf if data["ti"] is None else float(data["ti"])
            td = float(data.get("td", 0.0))
        elif "ki" in data:
            ki = float(data["ki"])
            ti = math.inf if ki == 0.0 else kp / ki
            td = float(data.get("kd", 0.0)) / kp
        else:
            raise ValueError("Controller document needs ti/td or ki/kd")
        return cls(kp=kp, ti=ti, td=td)


class DesignReport(BaseModel):
    """What a controller actually achieves on a plant, compared with the spec."""

    model_config = ConfigDict(frozen=True)

    achieved_pm: float
    achieved_crossover: float
    achieved_psi: float
    slope_error_fraction: float

    @model_validator(mode="after")
    def all_finite(self) -> "DesignReport":
        values = (self.achieved_pm, self.achieved_crossover, self.achieved_psi, self.slope_error_fraction)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("design report fields must be finite")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "achieved_pm_deg": math.degrees(self.achieved_pm),
            "achieved_crossover": self.achieved_crossover,
            "achieved_psi_deg": math.degrees(self.achieved_psi),
            "slope_error_fraction": self.slope_error_fraction,
        }


class SimConfig(BaseModel):
    """Fixed-step closed-loop simulation settings."""

    model_config = ConfigDict(frozen=True)

    dt: float = 0.01
    horizon: float = 60.0
    deriv_filter_n: float = 100.0

    @field_validator("dt", "deriv_filter_n")
    def strictly_positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError("must be a finite positive number")
        return v

    @model_validator(mode="after")
    def horizon_covers_ten_steps(self) -> "SimConfig":
        if not self.horizon >= 10.0 * self.dt:
            raise ValueError("horizon must be at least 10 time steps")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimConfig":
        return cls(**{key: float(data[key]) for key in ("dt", "horizon", "deriv_filter_n") if key in data})


class Metrics(BaseModel):
    """Step-response quality figures."""

    model_config = ConfigDict(frozen=True)

    itae: float
    overshoot: float
    settling_time_2pct: float
    steady_state_error: float
    rise_time: Optional[float] = None
    iae: float = 0.0
    ise: float = 0.0

    @field_validator("itae")
    def itae_non_negative(cls, v: float) -> float:
        if not v >= 0.0:
            raise ValueError("itae must be >= 0")
        return v

    @field_validator("overshoot")
    def overshoot_non_negative(cls, v: float) -> float:
        if not v >= 0.0:
            raise ValueError("overshoot must be >= 0")
        return v

    @classmethod
    def divergent(cls) -> "Metrics":
        """Metrics of a run flagged as diverged."""
        return cls(
            itae=math.inf,
            overshoot=math.inf,
            settling_time_2pct=math.inf,
            steady_state_error=math.inf,
            iae=math.inf,
            ise=math.inf,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {key: _finite_or_none(value) for key, value in self.model_dump().items()}


class StepResult(BaseModel):
    """Sampled closed-loop unit-step trajectory."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: np.ndarray
    y: np.ndarray
    e: np.ndarray
    metrics: Optional[Metrics] = None
    diverged: bool = False

    @model_validator(mode="after")
    def uniform_matching_grids(self) -> "StepResult":
        if not (len(self.t) == len(self.y) == len(self.e)):
            raise ValueError("t, y and e must have equal length")
        if len(self.t) == 0:
            raise ValueError("step result is empty")
        if len(self.t) > 1:
            steps = np.diff(self.t)
            if not np.all(steps > 0.0):
                raise ValueError("time grid must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ValueError("time grid must be uniformly spaced")
        return self

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0


class GainBounds(BaseModel):
    """Search box [low, high] for each parallel gain."""

    model_config = ConfigDict(frozen=True)

    kp: Tuple[float, float]
    ki: Tuple[float, float]
    kd: Tuple[float, float]

    @field_validator("kp", "ki", "kd")
    def ordered_positive(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        low, high = v
        if not (math.isfinite(low) and math.isfinite(high)):
            raise ValueError("bounds must be finite")
        if not low > 0.0:
            raise ValueError("lower bound must be positive")
        if not low < high:
            raise ValueError("lower bound must be below upper bound")
        return v

    def lows(self) -> np.ndarray:
        return np.array([self.kp[0], self.ki[0], self.kd[0]])

    def highs(self) -> np.ndarray:
        return np.array([self.kp[1], self.ki[1], self.kd[1]])

    def to_dict(self) -> Dict[str, Any]:
        return {"kp": list(self.kp), "ki": list(self.ki), "kd": list(self.kd)}


class Candidate(BaseModel):
    """Parallel-form PID gains, the GA's decision vector."""

    model_config = ConfigDict(frozen=True)

    kp: float
    ki: float
    kd: float

    @field_validator("kp", "ki", "kd")
    def gain_positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError("candidate gains must be finite and positive")
        return v

    def as_array(self) -> np.ndarray:
        return np.array([self.kp, self.ki, self.kd])

    def to_controller(self) -> PidController:
        """Convert to series form: Ti = kp/ki, Td = kd/kp."""
        return PidController(kp=self.kp, ti=self.kp / self.ki, td=self.kd / self.kp)

    def to_dict(self) -> Dict[str, Any]:
        return {"kp": self.kp, "ki": self.ki, "kd": self.kd}


class GaConfig(BaseModel):
    """Real-coded GA settings."""

    model_config = ConfigDict(frozen=True)

    population: int = 50
    crossover_fraction: float = 0.9
    mutation_fraction: float = 0.3
    generations: int = 100
    seed: Optional[int] = None
    bounds: Optional[GainBounds] = None
    slope_error_cap: float = 0.20
    bound_spread: float = 0.4
    tournament_size: int = 2
    blend_alpha: float = 0.5
    mutation_scale: float = 0.1
    elite_count: int = 1
    max_resample: int = 10
    seeds: Tuple[Candidate, ...] = ()

    @field_validator("population")
    def population_at_least_two(cls, v: int) -> int:
        if v < 2:
            raise ValueError("population must be at least 2")
        return v

    @field_validator("crossover_fraction", "mutation_fraction")
    def fraction_in_unit_interval(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError("fractions must lie in [0, 1]")
        return v

    @field_validator("slope_error_cap", "mutation_scale")
    def strictly_positive(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError("must be positive")
        return v

    @field_validator("bound_spread")
    def spread_in_open_unit_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("bound_spread must lie in (0, 1)")
        return v

    @field_validator("generations", "max_resample")
    def non_negative_count(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("tournament_size")
    def tournament_at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("tournament_size must be at least 1")
        return v

    @model_validator(mode="after")
    def elites_fit_population(self) -> "GaConfig":
        if not 0 <= self.elite_count < self.population:
            raise ValueError("elite_count must be in [0, population)")
        if len(self.seeds) > self.population:
            raise ValueError("more seed candidates than population members")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = self.model_dump(exclude={"bounds", "seeds"})
        data["bounds"] = self.bounds.to_dict() if self.bounds is not None else None
        data["seeds"] = [seed.to_dict() for seed in self.seeds]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GaConfig":
        """Create a GA config; unknown keys are rejected."""
        payload = dict(data)
        if payload.get("bounds") is not None:
            payload["bounds"] = GainBounds(**{k: tuple(v) for k, v in payload["bounds"].items()})
        if "seeds" in payload:
            payload["seeds"] = tuple(Candidate(**seed) for seed in payload["seeds"])
        unknown = set(payload) - set(cls.model_fields)
        if unknown:
            raise ValueError(f"Unknown GA config keys: {', '.join(sorted(unknown))}")
        return cls(**payload)


class GaResult(BaseModel):
    """Outcome of one GA run."""

    model_config = ConfigDict(frozen=True)

    best: Candidate
    best_itae: float
    best_slope_error: float
    history: Tuple[float, ...]
    evaluations: int = 0
    reproducible: bool = True

    @field_validator("history")
    def history_non_increasing(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(later > earlier for earlier, later in zip(v, v[1:])):
            raise ValueError("best-fitness history must be non-increasing")
        return v

    @model_validator(mode="after")
    def best_ends_history(self) -> "GaResult":
        if self.history and self.history[-1] != self.best_itae:
            raise ValueError("best_itae must equal the last history entry")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best": self.best.to_dict(),
            "best_itae": _finite_or_none(self.best_itae),
            "best_slope_error": _finite_or_none(self.best_slope_error),
            "history": [_finite_or_none(h) for h in self.history],
            "evaluations": self.evaluations,
            "reproducible": self.reproducible,
        }


class TuneMethod(str, Enum):
    """Tuning pipelines."""

    BODE_DELAY = "bode-delay"
    PADE = "pade"
    GA = "ga"

    @classmethod
    def from_string(cls, value: str) -> "TuneMethod":
        """Convert a string to a tuning method.

        Accepts common aliases (e.g. "direct", "genetic").

        Raises:
            ValueError: If the string does not name a method
        """
        normalized = (value or "").strip().lower()

        for method in cls:
            if method.value == normalized:
                return method

        synonyms = {
            TuneMethod.BODE_DELAY: {"bode_delay", "bode", "direct", "delayed", "bode-delayed"},
            TuneMethod.PADE: {"padé", "pade-bode", "rational", "rationalized"},
            TuneMethod.GA: {"genetic", "itae", "genetic-algorithm"},
        }
        for method, names in synonyms.items():
            if normalized in names:
                return method

        valid = ", ".join(method.value for method in cls)
        raise ValueError(f"Invalid tuning method: '{value}'. Valid methods are: {valid}")


class TuneReport(BaseModel):
    """Everything one tuning run produced, serialised as a single JSON document."""

    model_config = ConfigDict(frozen=True)

    method: TuneMethod
    controller: PidController
    design: DesignReport
    metrics: Metrics
    plant: DeadTimePlant
    spec: DesignSpec
    sim: SimConfig
    pade_order: int
    ga_config: Optional[GaConfig] = None
    ga_result: Optional[GaResult] = None
    diverged: bool = False
    notes: List[str] = Field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Convert the report to its JSON document; every key is always present."""
        return {
            "method": self.method.value,
            "controller": self.controller.to_dict(include_parallel=True),
            "design": self.design.to_dict(),
            "metrics": self.metrics.to_dict(),
            "diverged": self.diverged,
            "inputs": {
                "plant": self.plant.to_dict(),
                "spec": self.spec.to_dict(),
                "sim": self.sim.to_dict(),
                "pade_order": self.pade_order,
                "ga": self.ga_config.to_dict() if self.ga_config is not None else None,
            },
            "ga": self.ga_result.to_dict() if self.ga_result is not None else None,
            "notes": list(self.notes),
        }
