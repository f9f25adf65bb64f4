"""Linear transfer-matrix beam optics for transport channels.

Transverse planes are treated as decoupled 2x2 maps over (x, x') and
(y, y'); magnets are hard-edge.  A quadrupole's geometric strength k is
signed: positive focuses in x and defocuses in y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .timeseries import TimeSeries

_TINY_STRENGTH = 1e-12


class ElementError(ValueError):
    """Invalid beamline element description."""


class NonUnimodularError(ValueError):
    """A transport matrix failed the det = 1 check."""


@dataclass(frozen=True)
class BeamlineElement:
    kind: str  # drift | quadrupole | sector_bend
    length: float  # m
    strength: float = 0.0  # quad k in 1/m^2, or bend angle in rad

    def __post_init__(self):
        if self.kind not in ("drift", "quadrupole", "sector_bend"):
            raise ElementError(f"unknown element kind {self.kind!r}")
        if self.length <= 0:
            raise ElementError("element length must be > 0")
        if self.kind == "drift" and self.strength != 0.0:
            raise ElementError("drift must have zero strength")


@dataclass(frozen=True)
class Beamline:
    elements: list[BeamlineElement]

    def __post_init__(self):
        if not self.elements:
            raise ElementError("beamline must be non-empty")


@dataclass(frozen=True)
class TransferMatrix:
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class TwissParams:
    alpha: float
    beta: float  # m
    emittance: float  # m*rad

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.emittance <= 0:
            raise ValueError("emittance must be > 0")

    @property
    def gamma(self) -> float:
        return (1.0 + self.alpha**2) / self.beta


def _drift(length: float) -> np.ndarray:
    return np.array([[1.0, length], [0.0, 1.0]])


def _quad(k: float, length: float) -> np.ndarray:
    """Thick-quadrupole map; k > 0 focusing, k < 0 defocusing, k ~ 0 drift."""
    if abs(k) < _TINY_STRENGTH:
        return _drift(length)
    root = math.sqrt(abs(k))
    phi = root * length
    if k > 0:
        return np.array([
            [math.cos(phi), math.sin(phi) / root],
            [-root * math.sin(phi), math.cos(phi)],
        ])
    return np.array([
        [math.cosh(phi), math.sinh(phi) / root],
        [root * math.sinh(phi), math.cosh(phi)],
    ])


def _bend(angle: float, length: float) -> np.ndarray:
    """Sector bend in the bend plane; rho = L / angle."""
    if abs(angle) < _TINY_STRENGTH:
        return _drift(length)
    rho = length / angle
    return np.array([
        [math.cos(angle), rho * math.sin(angle)],
        [-math.sin(angle) / rho, math.cos(angle)],
    ])


def element_matrix(element: BeamlineElement, plane: str) -> np.ndarray:
    """2x2 transport matrix of one element in plane 'x' or 'y'."""
    if plane not in ("x", "y"):
        raise ValueError("plane must be 'x' or 'y'")
    if element.kind == "drift":
        return _drift(element.length)
    if element.kind == "quadrupole":
        k = element.strength if plane == "x" else -element.strength
        return _quad(k, element.length)
    # sector bend: curvature acts in the bend (x) plane, y sees a drift
    if plane == "x":
        return _bend(element.strength, element.length)
    return _drift(element.length)


def compose(line: Beamline) -> TransferMatrix:
    """Whole-line transfer matrix: later elements multiply from the left."""
    mx = np.eye(2)
    my = np.eye(2)
    for element in line.elements:
        mx = element_matrix(element, "x") @ mx
        my = element_matrix(element, "y") @ my
    return TransferMatrix(x=mx, y=my)


def propagate_twiss(tw: TwissParams, m: np.ndarray, det_tol: float = 1e-10) -> TwissParams:
    """Transport Twiss parameters through a unimodular 2x2 map."""
    m = np.asarray(m, dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det - 1.0) > det_tol:
        raise NonUnimodularError(f"det = {det!r}, expected 1")
    a, b = tw.alpha, tw.beta
    g = tw.gamma
    m11, m12 = m[0, 0], m[0, 1]
    m21, m22 = m[1, 0], m[1, 1]
    beta = m11**2 * b - 2.0 * m11 * m12 * a + m12**2 * g
    alpha = -m11 * m21 * b + (m11 * m22 + m12 * m21) * a - m12 * m22 * g
    return TwissParams(alpha=alpha, beta=beta, emittance=tw.emittance)


def _partial(element: BeamlineElement, length: float) -> BeamlineElement:
    """Front slice of an element; bend angle scales with the slice."""
    if element.kind == "sector_bend":
        strength = element.strength * length / element.length
    else:
        strength = element.strength
    return replace(element, length=length, strength=strength)


def envelope(
    line: Beamline,
    tw0: TwissParams,
    step: float,
    tw0_y: TwissParams | None = None,
) -> TimeSeries:
    """Beta functions and beam envelopes sqrt(emittance*beta) along the line.

    Samples every <= ``step`` in path length, always landing on element
    boundaries; the abscissa is s in meters.  ``tw0`` seeds both planes
    unless a distinct ``tw0_y`` is given.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    twx, twy = tw0, tw0_y if tw0_y is not None else tw0

    positions = [0.0]
    beta = {"x": [twx.beta], "y": [twy.beta]}
    s0 = 0.0
    for element in line.elements:
        n_sub = max(1, math.ceil(element.length / step))
        for i in range(1, n_sub + 1):
            ds = element.length * i / n_sub
            part = _partial(element, ds)
            positions.append(s0 + ds)
            beta["x"].append(propagate_twiss(twx, element_matrix(part, "x")).beta)
            beta["y"].append(propagate_twiss(twy, element_matrix(part, "y")).beta)
        mx = element_matrix(element, "x")
        my = element_matrix(element, "y")
        twx = propagate_twiss(twx, mx)
        twy = propagate_twiss(twy, my)
        s0 += element.length

    beta_x = np.array(beta["x"])
    beta_y = np.array(beta["y"])
    channels = {
        "beta_x": beta_x,
        "beta_y": beta_y,
        "envelope_x": np.sqrt(twx.emittance * beta_x),
        "envelope_y": np.sqrt(twy.emittance * beta_y),
    }
    units = {lab: "m" for lab in channels}
    return TimeSeries(times=np.array(positions), channels=channels, units=units)


@dataclass(frozen=True)
class PlaneStability:
    stable: bool
    phase_advance: float | None  # rad, defined only when stable


@dataclass(frozen=True)
class CellStability:
    x: PlaneStability
    y: PlaneStability

    @property
    def stable(self) -> bool:
        return self.x.stable and self.y.stable


def cell_stability(cell: Beamline) -> CellStability:
    """Periodic-cell criterion: stable iff |trace| <= 2, mu = arccos(trace/2)."""
    m = compose(cell)
    planes = {}
    for plane, mat in (("x", m.x), ("y", m.y)):
        trace = float(mat[0, 0] + mat[1, 1])
        stable = abs(trace) <= 2.0
        mu = math.acos(min(1.0, max(-1.0, trace / 2.0))) if stable else None
        planes[plane] = PlaneStability(stable=stable, phase_advance=mu)
    return CellStability(x=planes["x"], y=planes["y"])


@dataclass(frozen=True)
class MatchResult:
    strengths: list[float]
    residual: float
    iterations: int


def _exit_twiss(line: Beamline, tw0: TwissParams) -> tuple[TwissParams, TwissParams]:
    m = compose(line)
    return propagate_twiss(tw0, m.x), propagate_twiss(tw0, m.y)


def _mismatch(line: Beamline, tw0: TwissParams,
              targets: tuple[TwissParams, TwissParams]) -> float:
    total = 0.0
    for tw, target in zip(_exit_twiss(line, tw0), targets):
        total += (tw.alpha - target.alpha) ** 2
        total += ((tw.beta - target.beta) / target.beta) ** 2
    return total


def match_quadrupoles(
    line: Beamline,
    tunable: list[int],
    tw0: TwissParams,
    target: TwissParams | tuple[TwissParams, TwissParams],
    max_iterations: int = 2000,
) -> MatchResult:
    """Tune quadrupole strengths so the exit Twiss approaches ``target``.

    ``target`` is either one TwissParams applied to both planes or an
    (x, y) pair; the objective sums each plane's alpha and relative-beta
    mismatch against its target.  A quadrupole focuses one plane while
    defocusing the other, so a shared target is usually a compromise;
    exact matches need the pair form.

    Derivative-free simplex search over the tunable strengths, seeded from
    the current values; stagnated searches restart from the best point with
    a fresh simplex until the iteration budget runs out.  Deterministic.
    """
    targets = target if isinstance(target, tuple) else (target, target)
    if not tunable:
        raise ValueError("tunable index list must not be empty")
    if len(tunable) > 6:
        raise ValueError("at most 6 tunable quadrupoles")
    for idx in tunable:
        if not 0 <= idx < len(line.elements):
            raise IndexError(f"tunable index {idx} out of range")
        if line.elements[idx].kind != "quadrupole":
            raise ValueError(f"element {idx} is not a quadrupole")

    elements = list(line.elements)

    def with_strengths(ks: np.ndarray) -> Beamline:
        trial = list(elements)
        for idx, k in zip(tunable, ks):
            trial[idx] = replace(trial[idx], strength=float(k))
        return Beamline(trial)

    def objective(ks: np.ndarray) -> float:
        return _mismatch(with_strengths(ks), tw0, targets)

    x0 = np.array([elements[idx].strength for idx in tunable])
    best_x, best_f = x0, objective(x0)
    used = 0
    scale = 0.1
    while used < max_iterations and best_f > 1e-18:
        steps = scale * np.maximum(np.abs(best_x), 0.5)
        simplex = np.vstack([best_x] + [best_x + steps * e for e in np.eye(len(x0))])
        res = minimize(
            objective,
            best_x,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "maxiter": max_iterations - used,
                "xatol": 1e-12,
                "fatol": 1e-16,
            },
        )
        used += max(int(res.nit), 1)
        if res.fun < best_f:
            best_x, best_f = np.asarray(res.x), float(res.fun)
        else:
            # stagnated: widen the restart simplex
            scale *= 2.0
            if scale > 10.0:
                break

    return MatchResult(
        strengths=[float(k) for k in best_x],
        residual=float(best_f),
        iterations=used,
    )
