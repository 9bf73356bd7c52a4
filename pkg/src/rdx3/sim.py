"""Method-of-lines finite-difference simulator on intervals and rectangles.

Cell-centered grid, second-order Laplacian with ghost cells for the
boundary family (homogeneous Neumann, homogeneous Dirichlet, Robin with
constant data, and mixtures across species), classical RK4 in time with an
adaptive step bounded by the diffusion CFL limit and a reaction-Jacobian
estimate.  Negative excursions are never clamped: small ones within
tolerance are tolerated, larger ones shrink the step, persistent ones
abort the run with a blow-up flag.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import nnls

from .checker import NonlinearityTriple
from .lyapunov import HpSpec

if TYPE_CHECKING:  # pragma: no cover
    from .models import ModelSpec

NEUMANN = "neumann"
DIRICHLET = "dirichlet"
ROBIN = "robin"

BLOWUP_FLAG = "BlowUpSuspected"

#: tolerated relative negative excursion of a valid state
POS_TOL = 1e-10

#: below this step size the run aborts rather than grinding on
DT_MIN = 1e-12

CSV_HEADER = "t,linf_u,linf_v,linf_w,lp_sum,mass,energy,dt,flags"


@dataclass(frozen=True)
class SpeciesBC:
    """Boundary condition for one species, same on every face.

    All three kinds share the ghost-cell closure of
    lam * (boundary value) + (1 - lam) * (outward normal derivative) = beta
    discretized to second order at the face: neumann is (lam, beta) = (0, 0),
    dirichlet is (1, 0), robin requires lam in (0, 1) and beta >= 0 constant.
    """

    kind: str
    lam: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind == NEUMANN:
            object.__setattr__(self, "lam", 0.0)
            object.__setattr__(self, "beta", 0.0)
        elif self.kind == DIRICHLET:
            object.__setattr__(self, "lam", 1.0)
            object.__setattr__(self, "beta", 0.0)
        elif self.kind == ROBIN:
            if not (0.0 < self.lam < 1.0):
                raise ValueError("robin mixing weight must lie in (0, 1)")
            if self.beta < 0:
                raise ValueError("robin boundary source must be nonnegative")
        else:
            raise ValueError(f"unknown boundary kind {self.kind!r}")

    def ghost_coeffs(self, h: float) -> tuple[float, float]:
        """(a, b) with ghost = a * first_interior + b."""
        denom = self.lam / 2.0 + (1.0 - self.lam) / h
        a = -(self.lam / 2.0 - (1.0 - self.lam) / h) / denom
        b = self.beta / denom
        return a, b

    def to_json(self) -> dict:
        obj = {"kind": self.kind}
        if self.kind == ROBIN:
            obj["lam"] = self.lam
            obj["beta"] = self.beta
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "SpeciesBC":
        kind = obj.get("kind", NEUMANN)
        return cls(kind=kind, lam=float(obj.get("lam", 0.0)), beta=float(obj.get("beta", 0.0)))


@dataclass(frozen=True)
class BoundarySpec:
    u: SpeciesBC
    v: SpeciesBC
    w: SpeciesBC

    @classmethod
    def all_neumann(cls) -> "BoundarySpec":
        return cls(SpeciesBC(NEUMANN), SpeciesBC(NEUMANN), SpeciesBC(NEUMANN))

    def as_tuple(self) -> tuple[SpeciesBC, SpeciesBC, SpeciesBC]:
        return (self.u, self.v, self.w)

    def homogeneous(self) -> bool:
        return all(bc.beta == 0.0 for bc in self.as_tuple())

    def all_kinds(self) -> tuple[str, str, str]:
        return tuple(bc.kind for bc in self.as_tuple())

    def to_json(self) -> dict:
        return {"u": self.u.to_json(), "v": self.v.to_json(), "w": self.w.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "BoundarySpec":
        return cls(
            u=SpeciesBC.from_json(obj.get("u", {})),
            v=SpeciesBC.from_json(obj.get("v", {})),
            w=SpeciesBC.from_json(obj.get("w", {})),
        )


@dataclass(frozen=True)
class DomainGrid:
    """Interval (dim 1) or rectangle (dim 2), cell-centered."""

    dim: int
    extents: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if len(self.extents) != self.dim or len(self.cells) != self.dim:
            raise ValueError("extents/cells length must match dim")
        if any(n < 8 for n in self.cells):
            raise ValueError("need at least 8 cells per axis")
        if any(ext <= 0 for ext in self.extents):
            raise ValueError("extents must be positive")

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(ext / n for ext, n in zip(self.extents, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    def centers(self, axis: int = 0) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def to_json(self) -> dict:
        return {"dim": self.dim, "extents": list(self.extents), "cells": list(self.cells)}

    @classmethod
    def from_json(cls, obj: dict) -> "DomainGrid":
        return cls(
            dim=int(obj["dim"]),
            extents=tuple(float(x) for x in obj["extents"]),
            cells=tuple(int(x) for x in obj["cells"]),
        )


@dataclass
class State:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: float = 0.0

    def fields(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.u, self.v, self.w)


def laplacian_apply(field: np.ndarray, grid: DomainGrid, bc: SpeciesBC) -> np.ndarray:
    """Second-order central-difference Laplacian with ghost-cell closure."""
    out = np.zeros_like(field)
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        a, b = bc.ghost_coeffs(h)
        f = np.moveaxis(field, axis, 0)
        part = np.empty_like(f)
        part[1:-1] = f[:-2] - 2.0 * f[1:-1] + f[2:]
        lo_ghost = a * f[0] + b
        hi_ghost = a * f[-1] + b
        part[0] = lo_ghost - 2.0 * f[0] + f[1]
        part[-1] = f[-2] - 2.0 * f[-1] + hi_ghost
        out += np.moveaxis(part, 0, axis) / (h * h)
    return out


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------


class _CompiledModel:
    """Float-side view of a model: diffusion constants, reaction evaluators,
    boundary closures, and the absolute-coefficient Jacobian bound."""

    def __init__(self, d: tuple[float, float, float], n: NonlinearityTriple, bc: BoundarySpec, grid: DomainGrid):
        self.d = d
        self.n = n
        self.bc = bc
        self.grid = grid
        self.jac_bound_polys = []
        for p in n.as_tuple():
            self.jac_bound_polys.append(
                [p.partial_derivative(axis).abs_coefficients() for axis in (1, 2, 3)]
            )

    def rhs(self, u, v, w):
        fu = self.n.f.eval_arrays(u, v, w)
        fv = self.n.g.eval_arrays(u, v, w)
        fw = self.n.h.eval_arrays(u, v, w)
        if self.d[0]:
            fu = fu + self.d[0] * laplacian_apply(u, self.grid, self.bc.u)
        if self.d[1]:
            fv = fv + self.d[1] * laplacian_apply(v, self.grid, self.bc.v)
        if self.d[2]:
            fw = fw + self.d[2] * laplacian_apply(w, self.grid, self.bc.w)
        return fu, fv, fw

    def reaction_radius(self, u, v, w) -> float:
        """Upper bound on the reaction Jacobian max row sum over the grid,
        evaluated at the componentwise sup (valid since the absolute-value
        polynomials are monotone on the nonnegative octant)."""
        um = max(float(np.max(u)), 0.0)
        vm = max(float(np.max(v)), 0.0)
        wm = max(float(np.max(w)), 0.0)
        rho = 0.0
        for row in self.jac_bound_polys:
            total = sum(float(p.eval_arrays(um, vm, wm)) for p in row)
            rho = max(rho, total)
        return rho


def choose_dt(state: State, compiled: _CompiledModel, grid: DomainGrid, safety: float) -> float:
    """safety * min(diffusion CFL bound, reaction bound 1/(1+rho))."""
    if not (0.0 < safety <= 1.0):
        raise ValueError("safety must lie in (0, 1]")
    max_d = max(compiled.d)
    if max_d > 0:
        hmin = min(grid.spacing)
        diff_bound = hmin * hmin / (2.0 * grid.dim * max_d)
    else:
        diff_bound = np.inf
    rho = compiled.reaction_radius(*state.fields())
    return safety * min(diff_bound, 1.0 / (1.0 + rho))


def rk4_step(state: State, compiled: _CompiledModel, dt: float):
    """One classical RK4 step of the semi-discrete system.

    Overflow is deliberate near blow-up: the trial is rejected upstream, so
    float warnings are silenced here rather than clamped away.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        u, v, w = state.fields()
        k1 = compiled.rhs(u, v, w)
        k2 = compiled.rhs(u + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1], w + 0.5 * dt * k1[2])
        k3 = compiled.rhs(u + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1], w + 0.5 * dt * k2[2])
        k4 = compiled.rhs(u + dt * k3[0], v + dt * k3[1], w + dt * k3[2])
        c = dt / 6.0
        return (
            u + c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            v + c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            w + c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        )


def step(state: State, compiled: _CompiledModel, dt: float) -> State:
    if dt <= 0:
        raise ValueError("dt must be positive")
    u, v, w = rk4_step(state, compiled, dt)
    return State(u=u, v=v, w=w, t=state.t + dt)


def _trial_acceptable(fields, pos_tol: float) -> bool:
    for f in fields:
        if not np.all(np.isfinite(f)):
            return False
    peak = max(float(np.max(f)) for f in fields)
    floor = -pos_tol * (1.0 + max(peak, 0.0))
    return all(float(np.min(f)) >= floor for f in fields)


# ---------------------------------------------------------------------------
# records and monitors
# ---------------------------------------------------------------------------


@dataclass
class TrajectoryRecord:
    t: float
    linf_u: float
    linf_v: float
    linf_w: float
    lp_sum: float
    mass: float
    energy: float
    dt_used: float
    flags: str = ""

    def csv_row(self) -> str:
        vals = [self.t, self.linf_u, self.linf_v, self.linf_w,
                self.lp_sum, self.mass, self.energy, self.dt_used]
        return ",".join(f"{v:.17g}" for v in vals) + f",{self.flags}"


def norms(state: State, p: int, grid: DomainGrid) -> tuple[tuple[float, float, float], float, float]:
    """(sup norms, p-norm of the component sum, total mass), midpoint rule."""
    if p < 1:
        raise ValueError("p must be at least 1")
    u, v, w = state.fields()
    linf = tuple(float(np.max(np.abs(f))) if f.size else 0.0 for f in (u, v, w))
    total = u + v + w
    vol = grid.cell_volume
    # tolerated negative excursions could push the p-th power sum below zero
    lp_sum = max(float(np.sum(total**p) * vol), 0.0) ** (1.0 / p)
    mass = float(np.sum(total) * vol)
    return linf, lp_sum, mass


@dataclass
class MonitorVerdict:
    k0_monotone: bool
    k0_tol: float
    gronwall_m1: float | None
    gronwall_m2: float | None
    gronwall_max_residual: float | None
    mass_budget_k1: float | None
    mass_budget_max_residual: float | None
    blowup: bool
    blowup_time: float | None
    blowup_reason: str | None

    def to_json(self) -> dict:
        return {
            "k0_monotone": self.k0_monotone,
            "k0_tol": self.k0_tol,
            "gronwall_fit": {
                "M1": self.gronwall_m1,
                "M2": self.gronwall_m2,
                "max_residual": self.gronwall_max_residual,
            },
            "mass_budget": None
            if self.mass_budget_k1 is None
            else {"K1": self.mass_budget_k1, "max_residual": self.mass_budget_max_residual},
            "blowup": {
                "suspected": self.blowup,
                "time": self.blowup_time,
                "reason": self.blowup_reason,
            },
        }


@dataclass
class SimConfig:
    grid: DomainGrid
    t_end: float
    record_dt: float
    energy: HpSpec
    init: dict
    seed: int = 0
    safety: float = 0.9
    blowup_threshold: float = 1e8
    k1: float | None = None
    k0_tol: float = 1e-8

    def __post_init__(self):
        if self.t_end <= 0 or self.record_dt <= 0:
            raise ValueError("t_end and record_dt must be positive")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")


@dataclass
class RunResult:
    records: list[TrajectoryRecord]
    monitor: MonitorVerdict
    blowup: bool
    last_time: float


def build_field(spec: dict, grid: DomainGrid, rng: np.random.Generator) -> np.ndarray:
    kind = spec.get("kind", "constant")
    shape = grid.cells
    if kind == "constant":
        arr = np.full(shape, float(spec.get("value", 0.0)))
    elif kind == "cosine":
        base = float(spec.get("base", 1.0))
        amp = float(spec.get("amplitude", 0.0))
        modes = spec.get("modes", [1] * grid.dim)
        if isinstance(modes, (int, float)):
            modes = [modes]
        if len(modes) != grid.dim:
            raise ValueError("cosine init needs one mode per axis")
        profile = np.ones(shape)
        for axis in range(grid.dim):
            x = grid.centers(axis)
            wave = np.cos(float(modes[axis]) * np.pi * x / grid.extents[axis])
            sl = [None] * grid.dim
            sl[axis] = slice(None)
            profile = profile * wave[tuple(sl)]
        arr = base + amp * profile
    elif kind == "random":
        low = float(spec.get("low", 0.0))
        high = float(spec.get("high", 1.0))
        arr = rng.uniform(low, high, size=shape)
    else:
        raise ValueError(f"unknown initial-condition kind {kind!r}")
    if float(np.min(arr)) < 0:
        raise ValueError("initial data must be nonnegative")
    return arr


def run(model: "ModelSpec", config: SimConfig) -> RunResult:
    """Integrate to t_end or blow-up, recording norms, mass and energy."""
    grid = config.grid
    rng = np.random.default_rng(config.seed)
    fields = []
    for name in ("u", "v", "w"):
        spec = config.init.get(name, {"kind": "constant", "value": 0.0})
        fields.append(build_field(spec, grid, rng))
    state = State(u=fields[0], v=fields[1], w=fields[2], t=0.0)

    compiled = _CompiledModel(
        d=tuple(float(x) for x in model.d.as_tuple()),
        n=model.n,
        bc=model.bc,
        grid=grid,
    )
    energy_poly = build_energy_cached(config.energy)
    p = config.energy.p
    vol = grid.cell_volume

    def snapshot(dt_used: float, flags: str = "") -> TrajectoryRecord:
        linf, lp_sum, mass = norms(state, p, grid)
        energy = float(np.sum(energy_poly.eval_arrays(*state.fields())) * vol)
        return TrajectoryRecord(
            t=state.t, linf_u=linf[0], linf_v=linf[1], linf_w=linf[2],
            lp_sum=lp_sum, mass=mass, energy=energy, dt_used=dt_used, flags=flags,
        )

    records = [snapshot(0.0)]
    blowup = False
    blowup_reason = None
    next_record = config.record_dt
    eps = 1e-12

    while state.t < config.t_end - eps:
        target = min(next_record, config.t_end)
        dt = choose_dt(state, compiled, grid, config.safety)
        dt = min(dt, target - state.t)
        accepted = None
        while True:
            trial = rk4_step(state, compiled, dt)
            if _trial_acceptable(trial, POS_TOL):
                accepted = trial
                break
            dt *= 0.5
            if dt < DT_MIN:
                break
        if accepted is None:
            blowup = True
            blowup_reason = "dt_underflow"
            records.append(snapshot(dt, BLOWUP_FLAG))
            break
        state = State(u=accepted[0], v=accepted[1], w=accepted[2], t=state.t + dt)
        sup = max(float(np.max(np.abs(f))) for f in state.fields())
        if sup > config.blowup_threshold:
            blowup = True
            blowup_reason = "threshold"
            records.append(snapshot(dt, BLOWUP_FLAG))
            break
        if state.t >= target - eps:
            records.append(snapshot(dt))
            if target >= config.t_end:
                break
            next_record = next_record + config.record_dt

    monitor = _build_monitor(records, config, grid, blowup, blowup_reason)
    return RunResult(records=records, monitor=monitor, blowup=blowup, last_time=state.t)


_ENERGY_CACHE: dict[HpSpec, object] = {}


def build_energy_cached(spec: HpSpec):
    from .lyapunov import build_energy

    if spec not in _ENERGY_CACHE:
        _ENERGY_CACHE[spec] = build_energy(spec)
    return _ENERGY_CACHE[spec]


def _build_monitor(records, config: SimConfig, grid: DomainGrid, blowup: bool, reason) -> MonitorVerdict:
    p = config.energy.p
    scale = float((config.energy.theta * config.energy.sigma) ** p)
    clean = [r for r in records if not r.flags and np.isfinite(r.energy)]
    lt = np.array([r.energy * scale for r in clean])
    ts = np.array([r.t for r in clean])
    k0 = True
    for k in range(len(lt) - 1):
        if lt[k + 1] > lt[k] * (1.0 + config.k0_tol):
            k0 = False
            break
    m1 = m2 = max_res = None
    if len(lt) >= 3:
        dts = np.diff(ts)
        keep = dts > 0
        rate = np.diff(lt)[keep] / dts[keep]
        base = np.maximum(lt[:-1][keep], 0.0)
        design = np.column_stack([base, base ** ((p - 1) / p)])
        coeff, _ = nnls(design, rate)
        m1, m2 = float(coeff[0]), float(coeff[1])
        residual = rate - design @ coeff
        max_res = float(np.max(residual, initial=0.0))
    mass_k1 = config.k1
    mass_res = None
    if mass_k1 is not None and len(clean) >= 2:
        masses = np.array([r.mass for r in clean])
        dts = np.diff(ts)
        keep = dts > 0
        rate = np.diff(masses)[keep] / dts[keep]
        budget = mass_k1 * (grid.volume + masses[:-1][keep])
        mass_res = float(np.max(rate - budget, initial=0.0))
    last_t = records[-1].t if records else None
    return MonitorVerdict(
        k0_monotone=k0,
        k0_tol=config.k0_tol,
        gronwall_m1=m1,
        gronwall_m2=m2,
        gronwall_max_residual=max_res,
        mass_budget_k1=mass_k1,
        mass_budget_max_residual=mass_res,
        blowup=blowup,
        blowup_time=last_t if blowup else None,
        blowup_reason=reason,
    )


# ---------------------------------------------------------------------------
# file output
# ---------------------------------------------------------------------------


def write_csv(records: list[TrajectoryRecord], path: str) -> None:
    """Atomic CSV write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    body = CSV_HEADER + "\n" + "\n".join(r.csv_row() for r in records) + "\n"
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
