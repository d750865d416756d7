"""Rational one-step time integrators applied mode-wise to the reduced systems.

Every scheme is characterised by its amplification function ``R(z)``, a
rational approximation of ``exp(z)``. On the reduced heat system a mode with
eigenvalue ``lam`` is multiplied by ``R(tau * lam)`` per step; on the reduced
wave system the same rational function is applied to the 2x2 block
``tau * [[0, 1], [lam, -psi]]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError

DEFAULT_EPSILON = 1e-6
DEFAULT_M0 = 100
DEFAULT_T_M = 1.0


@dataclass(frozen=True)
class SchemeSpec:
    """A theta-family scheme ``(1 + (1-a) z) / (1 - a z)`` or the two-pole Twizell scheme."""

    kind: str  # "theta" | "twizell"
    a: float
    r1: float = 0.0
    r2: float = 0.0
    name: str = ""

    @classmethod
    def theta(cls, a: float, name: str = "") -> "SchemeSpec":
        if not 0.0 <= a <= 1.0:
            raise InputError(f"theta parameter a={a} outside [0, 1]")
        return cls("theta", float(a), name=name or f"theta({a:g})")

    @classmethod
    def twizell(cls, epsilon: float = DEFAULT_EPSILON, a: float | None = None) -> "SchemeSpec":
        """Second-order scheme with poles ``r1, r2``; l0-stable for ``a = 2 - sqrt(2) - epsilon``."""
        if a is None:
            if not epsilon > 0:
                raise InputError(f"epsilon must be positive, got {epsilon}")
            a = 2.0 - math.sqrt(2.0) - epsilon
        disc = a * a - 4.0 * a + 2.0
        if disc < 0:
            raise InputError(f"Twizell parameter a={a} gives complex poles (a^2 - 4a + 2 = {disc:.3g})")
        root = math.sqrt(disc)
        return cls("twizell", float(a), 0.5 * (a - root), 0.5 * (a + root), "twizell")

    @property
    def is_l0_stable(self) -> bool:
        if self.kind == "theta":
            return self.a == 1.0
        return self.r1 > 0 and self.r2 > 0

    def amplification(self, z):
        if self.kind == "theta":
            return amp_theta(z, self.a)
        return amp_twizell(z, self)

    def step_operator(self, A: np.ndarray) -> np.ndarray:
        """Apply the scheme's rational function to a stack of 2x2 matrices ``A`` (already scaled by tau)."""
        eye = np.broadcast_to(np.eye(2), A.shape)
        num = eye + (1.0 - self.a) * A
        if self.kind == "theta":
            return _solve2(eye - self.a * A, num)
        return _solve2(eye - self.r1 * A, _solve2(eye - self.r2 * A, num))


EXPLICIT_EULER = SchemeSpec.theta(0.0, "explicit-euler")
CRANK_NICOLSON = SchemeSpec.theta(0.5, "crank-nicolson")
IMPLICIT_EULER = SchemeSpec.theta(1.0, "implicit-euler")
TWIZELL = SchemeSpec.twizell()

SCHEME_NAMES = ("implicit-euler", "crank-nicolson", "explicit-euler", "twizell")


def scheme_from_name(name: str, epsilon: float = DEFAULT_EPSILON) -> SchemeSpec:
    if name == "implicit-euler":
        return IMPLICIT_EULER
    if name == "crank-nicolson":
        return CRANK_NICOLSON
    if name == "explicit-euler":
        return EXPLICIT_EULER
    if name == "twizell":
        return SchemeSpec.twizell(epsilon)
    raise InputError(f"unknown scheme {name!r}; choose from {', '.join(SCHEME_NAMES)}")


@dataclass(frozen=True)
class ModelSpec:
    """``phi u'' + psi u' = L u`` in normalised form (phi in {0, 1})."""

    phi: float
    psi: float
    name: str = ""

    def __post_init__(self):
        if self.phi not in (0.0, 1.0):
            raise InputError(f"phi must be 0 or 1 (normalised form), got {self.phi}")
        if self.phi == 0.0 and self.psi == 0.0:
            raise InputError("phi and psi cannot both be zero")
        if self.psi < 0:
            raise InputError(f"psi must be non-negative, got {self.psi}")

    @property
    def second_order(self) -> bool:
        return self.phi == 1.0


HEAT = ModelSpec(0.0, 1.0, "heat")
WAVE = ModelSpec(1.0, 0.0, "wave")

MODEL_NAMES = ("heat", "wave", "dampedwave")


def damped_wave(psi: float) -> ModelSpec:
    if not psi > 0:
        raise InputError(f"damped wave needs psi > 0, got {psi}")
    return ModelSpec(1.0, float(psi), "dampedwave")


def model_from_name(name: str, psi: float | None = None) -> ModelSpec:
    if name == "heat":
        return HEAT
    if name == "wave":
        return WAVE
    if name == "dampedwave":
        if psi is None:
            raise InputError("dampedwave requires --psi")
        return damped_wave(psi)
    raise InputError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")


@dataclass(frozen=True)
class TimeGrid:
    t_star: float
    M: int
    tau: float
    c: float = 1.0
    t_M: float = DEFAULT_T_M

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.M + 1)


# ---------------------------------------------------------------------------
# amplification functions


def amp_theta(z, a: float):
    """``(1 + (1-a) z) / (1 - a z)``: explicit Euler (a=0), Crank-Nicolson (1/2), implicit Euler (1)."""
    z = np.asarray(z, dtype=np.float64)
    den = 1.0 - a * z
    if np.any(den == 0.0):
        raise NumericalError(f"theta scheme a={a} singular at z={z[den == 0.0].ravel()[0]}")
    out = (1.0 + (1.0 - a) * z) / den
    return out[()] if out.ndim == 0 else out


def amp_twizell(z, scheme: SchemeSpec):
    """``(1 + (1-a) z) / ((1 - r1 z)(1 - r2 z))``."""
    if scheme.kind != "twizell":
        raise InputError("amp_twizell needs a Twizell scheme")
    z = np.asarray(z, dtype=np.float64)
    # sequential division mirrors the two successive resolvent solves
    out = (1.0 + (1.0 - scheme.a) * z) / (1.0 - scheme.r2 * z) / (1.0 - scheme.r1 * z)
    return out[()] if out.ndim == 0 else out


def _solve2(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched ``A^-1 B`` for stacks of 2x2 matrices via the adjugate."""
    det = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    if np.any(det == 0.0) or not np.all(np.isfinite(det)):
        raise NumericalError("singular 2x2 resolvent in wave step")
    inv = np.empty_like(A)
    inv[..., 0, 0] = A[..., 1, 1]
    inv[..., 0, 1] = -A[..., 0, 1]
    inv[..., 1, 0] = -A[..., 1, 0]
    inv[..., 1, 1] = A[..., 0, 0]
    inv /= det[..., None, None]
    return inv @ B


# ---------------------------------------------------------------------------
# per-mode step operators


def heat_step_factors(eigenvalues: np.ndarray, grid: TimeGrid, scheme: SchemeSpec,
                      model: ModelSpec = HEAT) -> np.ndarray:
    """Per-mode amplification ``R(tau * lam / psi)`` for the first-order model."""
    if model.second_order:
        raise InputError(f"heat_step_factors needs a first-order model, got {model.name}")
    lam = np.asarray(eigenvalues, dtype=np.float64)
    _warn_explicit(scheme, grid.tau * np.max(np.abs(lam), initial=0.0) / model.psi)
    return np.asarray(scheme.amplification(grid.tau * lam / model.psi), dtype=np.float64)


def mode_blocks(eigenvalues: np.ndarray, psi: float) -> np.ndarray:
    """Per-mode generator blocks ``[[0, 1], [lam, -psi]]``, shape (r, 2, 2)."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    A = np.zeros((len(lam), 2, 2))
    A[:, 0, 1] = 1.0
    A[:, 1, 0] = lam
    A[:, 1, 1] = -psi
    return A


def wave_step_matrices(eigenvalues: np.ndarray, model: ModelSpec, grid: TimeGrid,
                       scheme: SchemeSpec) -> np.ndarray:
    """Per-mode 2x2 step matrices ``R(tau A_k)`` for the second-order model, shape (r, 2, 2)."""
    if not model.second_order:
        raise InputError(f"wave_step_matrices needs phi=1, got model {model.name}")
    if not grid.tau > 0:
        raise InputError(f"time step must be positive, got {grid.tau}")
    lam = np.asarray(eigenvalues, dtype=np.float64)
    _warn_explicit(scheme, grid.tau * np.max(np.abs(lam), initial=0.0))
    return scheme.step_operator(grid.tau * mode_blocks(lam, model.psi))


def _warn_explicit(scheme: SchemeSpec, stiffness: float) -> None:
    if scheme.kind == "theta" and scheme.a == 0.0 and stiffness > 2.0:
        warnings.warn(
            f"explicit Euler is unstable at this step size (tau*|lambda_r| = {stiffness:.3g} > 2)",
            RuntimeWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# time horizon


def time_horizon(model: ModelSpec, t_M: float, lambda_max_abs: float, lambda_r_abs: float) -> float:
    """Rescaled horizon: ``t_M (|lam_N|/|lam_r|)^(1/2)`` for heat, ``^(1/4)`` for wave models."""
    if not lambda_r_abs > 0:
        raise InputError("|lambda_r| must be positive; at least two modes are required")
    if not t_M > 0:
        raise InputError(f"t_M must be positive, got {t_M}")
    ratio = lambda_max_abs / lambda_r_abs
    return t_M * (ratio ** 0.25 if model.second_order else math.sqrt(ratio))


def iteration_count(m0: int, c: float) -> int:
    if not c > 0:
        raise InputError(f"time-step scaling factor c must be positive, got {c}")
    m = int(round(m0 / c))
    if m < 1:
        raise InputError(f"M0={m0} with c={c} leaves no time steps")
    return m


def make_grid(model: ModelSpec, lambda_max_abs: float, lambda_r_abs: float, *, t_M: float = DEFAULT_T_M,
              m0: int = DEFAULT_M0, c: float = 1.0) -> TimeGrid:
    t_star = time_horizon(model, t_M, lambda_max_abs, lambda_r_abs)
    M = iteration_count(m0, c)
    tau = t_star / M
    # store t* as tau*M so the pair is exactly consistent
    return TimeGrid(t_star=tau * M, M=M, tau=tau, c=float(c), t_M=float(t_M))
