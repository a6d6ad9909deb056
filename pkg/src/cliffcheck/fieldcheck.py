"""Physics-level residual checks on user-supplied fields.

Each check evaluates a family of identity residuals at a list of sample
points and returns a :class:`ResidualReport`.  Residuals under ``residuals``
gate the pass flag; quantities under ``info`` (sampled currents, quadratic
roots, solution-matching distances) are diagnostics that depend on the
supplied fields actually solving the coupled system, which hand-built
scenarios generally do not.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import Multivector, grade_project, wedge
from .diffops import FieldCalculus, MultivectorField, grad_scalar_product
from .errors import CliffcheckError, FieldError
from .geometry import GeometryData, MetricSpec, curvature

THREADS_ENV = "CLIFFCHECK_THREADS"


@dataclass(frozen=True)
class Constants:
    """Physical constants: charge, mass, and the potential-to-Killing factor."""

    e: float = 1.0
    m: float = 1.0
    coupling: float = 1.0


@dataclass(frozen=True)
class ScenarioFields:
    K: MultivectorField | None = None
    A: MultivectorField | None = None
    S: MultivectorField | None = None
    V: MultivectorField | None = None
    constants: Constants = Constants()

    def __post_init__(self):
        for name, grade in (("K", 1), ("A", 1), ("V", 1)):
            f = getattr(self, name)
            if f is not None and f.grades - {grade}:
                raise FieldError(f"field {name} must be a 1-form, has grades {sorted(f.grades)}")
        if self.S is not None and self.S.grades - {0}:
            raise FieldError(f"field S must be a 0-form, has grades {sorted(self.S.grades)}")

    def potential(self) -> MultivectorField | None:
        """The electromagnetic potential: A if given, else coupling * K."""
        if self.A is not None:
            return self.A
        if self.K is not None:
            return self.K.scaled(self.constants.coupling)
        return None


@dataclass
class PointRecord:
    point: tuple
    residuals: dict
    info: dict = field(default_factory=dict)
    error: str | None = None
    passed: bool = True


@dataclass
class ResidualReport:
    check: str
    tolerance: float
    records: list
    max_residual: float
    passed: bool
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "notes": list(self.notes),
            "points": [
                {
                    "point": list(r.point),
                    "residuals": {k: v for k, v in r.residuals.items()},
                    "info": r.info,
                    "error": r.error,
                    "passed": r.passed,
                }
                for r in self.records
            ],
        }


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_pointwise(
    check: str,
    spec: MetricSpec,
    points: Sequence,
    tol: float,
    fn: Callable[[GeometryData], tuple],
    notes: tuple = (),
) -> ResidualReport:
    """Evaluate ``fn`` at each point; gather records in point order."""

    def one(pt) -> PointRecord:
        try:
            gd = curvature(spec, pt)
            residuals, info = fn(gd)
        except CliffcheckError as err:
            return PointRecord(tuple(pt), {}, {}, str(err), False)
        passed = all(v <= tol for v in residuals.values())
        return PointRecord(tuple(pt), residuals, info, None, passed)

    workers = _thread_count()
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, points))
    else:
        records = [one(pt) for pt in points]
    max_res = 0.0
    for rec in records:
        for v in rec.residuals.values():
            max_res = max(max_res, v)
    passed = bool(records) and all(r.passed for r in records)
    return ResidualReport(check, tol, records, max_res, passed, notes)


# -- helpers ---------------------------------------------------------------------


def _lowered_basis(gd: GeometryData, beta: int) -> Multivector:
    c = np.zeros(16)
    for nu in range(4):
        c[1 << nu] = gd.g_lower[beta, nu]
    return Multivector(c)


def _oneform_components(x: Multivector) -> np.ndarray:
    return np.array([x.coeffs[1 << i] for i in range(4)])


def _killing_residual(fc: FieldCalculus) -> float:
    # max over (mu, nu) of D_mu K_nu + D_nu K_mu
    kd = np.array([[fc.cov1[mu][1 << nu] for nu in range(4)] for mu in range(4)])
    return float(np.max(np.abs(kd + kd.T)))


def _ricci_coupling(gd: GeometryData, a: Multivector) -> Multivector:
    """A_alpha R^alpha = A^beta R_beta: the curvature coupling 1-form."""
    comps = _oneform_components(a)
    coupled = (gd.g_upper @ comps) @ gd.ricci  # A^b R_{b nu}
    out = np.zeros(16)
    for nu in range(4):
        out[1 << nu] = coupled[nu]
    return Multivector(out)


def _oneform_list(x: Multivector) -> list:
    return [float(x.coeffs[1 << i]) for i in range(4)]


# -- killing / proposition 1 ---------------------------------------------------------


def check_killing(spec: MetricSpec, K: MultivectorField, points, tol) -> ResidualReport:
    def fn(gd):
        fc = FieldCalculus(K, gd)
        return {"killing_eq": _killing_residual(fc)}, {}

    return run_pointwise("killing", spec, points, tol, fn)


def lorenz_gauge_residual(spec: MetricSpec, L: MultivectorField, points, tol) -> ResidualReport:
    def fn(gd):
        fc = FieldCalculus(L, gd)
        return {"lorenz_gauge": abs(fc.codifferential().scalar_part)}, {}

    return run_pointwise("lorenz_gauge", spec, points, tol, fn)


def verify_killing_identities(spec: MetricSpec, K: MultivectorField, points, tol) -> ResidualReport:
    def fn(gd):
        fc = FieldCalculus(K, gd)
        rhs = _ricci_coupling(gd, fc.value())
        residuals = {
            "lorenz": abs(fc.codifferential().scalar_part),
            "ricci_identity": (fc.ricci_operator() - rhs).sup(),
            "wave_identity": (fc.covariant_dalembertian() - rhs).sup(),
        }
        return residuals, {"curvature_coupling": _oneform_list(rhs)}

    return run_pointwise("killing_identities", spec, points, tol, fn)


def current_from_potential(
    spec: MetricSpec,
    A: MultivectorField,
    points,
    tol,
    superconducting: bool = True,
) -> ResidualReport:
    """Maxwell extraction J = -delta dA, with the proportional-current check."""

    def fn(gd):
        fc = FieldCalculus(A, gd)
        current = fc.maxwell_current()
        residuals = {"closed_field": fc.exterior_d_squared().sup()}
        rhs = 2.0 * _ricci_coupling(gd, fc.value())
        if superconducting:
            residuals["superconducting"] = (current - rhs).sup()
        info = {
            "current": _oneform_list(current),
            "current_sup": current.sup(),
            "proportional_rhs": _oneform_list(rhs),
            "proportional_rhs_sup": rhs.sup(),
        }
        return residuals, info

    name = "superconducting_current" if superconducting else "maxwell_current"
    return run_pointwise(name, spec, points, tol, fn)


# -- charged fluid ------------------------------------------------------------------


def lorentz_force_residual(spec: MetricSpec, fields: ScenarioFields, points, tol) -> ResidualReport:
    V, A = fields.V, fields.potential()
    if V is None or A is None:
        raise FieldError("lorentz_force requires fields V and A (or K with coupling)")
    e, m = fields.constants.e, fields.constants.m

    def fn(gd):
        pm = gd.metric
        fv = FieldCalculus(V, gd)
        fa = FieldCalculus(A, gd)
        vval = fv.value()
        force_form = m * fv.exterior_d() - e * fa.exterior_d()  # d(mV - eA)
        residuals = {
            "lorentz_force": pm.left_contract(vval, force_form).sup(),
            "unit_velocity": abs(pm.scalar_product(vval, vval) - 1.0),
        }
        # transport identity: (V . dirac)V = V _| dV + 1/2 dirac(V.V)
        v_up = gd.g_upper @ _oneform_components(vval)
        directional = Multivector.zero()
        for mu in range(4):
            directional = directional + v_up[mu] * Multivector(fv.cov1[mu])
        correction = 0.5 * grad_scalar_product(V, V, gd)
        transport = directional - pm.left_contract(vval, fv.exterior_d()) - correction
        residuals["transport_identity"] = transport.sup()
        return residuals, {}

    return run_pointwise("lorentz_force", spec, points, tol, fn)


def hamilton_jacobi_residual(spec: MetricSpec, fields: ScenarioFields, points, tol) -> ResidualReport:
    S, V, A = fields.S, fields.V, fields.potential()
    if S is None or V is None or A is None:
        raise FieldError("hamilton_jacobi requires fields S, V and A (or K with coupling)")
    e, m = fields.constants.e, fields.constants.m

    def fn(gd):
        pm = gd.metric
        fs = FieldCalculus(S, gd)
        fv = FieldCalculus(V, gd)
        fa = FieldCalculus(A, gd)
        momentum = fs.exterior_d() + e * fa.value()  # dS + eA
        mass_shell = pm.scalar_product(momentum, momentum) - m * m
        wave = fs.hodge_dalembertian().value
        delta_a = fa.codifferential().scalar_part
        residuals = {
            "momentum_match": (momentum - m * fv.value()).sup(),
            "mass_shell": abs(mass_shell),
            "action_wave": abs(wave.scalar_part - e * delta_a),
            "incompressible": abs(fv.codifferential().scalar_part),
        }
        return residuals, {"delta_potential": delta_a}

    return run_pointwise("hamilton_jacobi", spec, points, tol, fn)


# -- energy momentum ------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyMomentum:
    oneform: Multivector  # T_beta (or fluid t_alpha)
    threeform: Multivector  # its Hodge dual
    closure_residual: float  # grade-3 mass of the sandwich (must vanish)
    form_mismatch: float = 0.0  # fluid only: the two printed expressions compared


def energy_momentum_em(gd: GeometryData, F: Multivector, beta: int) -> EnergyMomentum:
    """Electromagnetic stress 1-form T_beta = -1/2 <F gamma_beta F>_1 and its dual."""
    if F.grades(tol=0.0) - {2}:
        raise FieldError("energy_momentum_em expects a 2-form field strength")
    pm = gd.metric
    sandwich = pm.clifford(F, pm.clifford(_lowered_basis(gd, beta), F))
    closure = grade_project(sandwich, 3).sup()
    t_form = -0.5 * grade_project(sandwich, 1)
    return EnergyMomentum(t_form, pm.hodge(t_form, gd.tau), closure)


def energy_momentum_fluid(gd: GeometryData, J: Multivector, alpha: int) -> EnergyMomentum:
    """Fluid stress 1-form t_alpha = 1/2 <J gamma_alpha J>_1, both printed forms."""
    if J.grades(tol=0.0) - {1}:
        raise FieldError("energy_momentum_fluid expects a 1-form current")
    pm = gd.metric
    basis = _lowered_basis(gd, alpha)
    sandwich = pm.clifford(J, pm.clifford(basis, J))
    closure = grade_project(sandwich, 3).sup()
    t_form = 0.5 * grade_project(sandwich, 1)
    star_t = pm.hodge(t_form, gd.tau)
    star_j = pm.hodge(J, gd.tau)
    alt = 0.5 * (
        pm.scalar_product(basis, J) * star_j + wedge(J, pm.left_contract(basis, star_j))
    )
    return EnergyMomentum(t_form, star_t, closure, (star_t - alt).sup())


def einstein_residual(spec: MetricSpec, fields: ScenarioFields, points, tol) -> ResidualReport:
    """Residuals of the gravitational structure equations; a solution detector.

    Hand-built field configurations generally fail this check unless they
    actually solve the coupled system (flat/empty and vacuum cases do).
    """
    A = fields.potential()
    if A is None:
        raise FieldError("einstein requires field A (or K with coupling)")

    def fn(gd):
        pm = gd.metric
        fa = FieldCalculus(A, gd)
        F = fa.exterior_d()
        J = fa.maxwell_current()
        einstein_lower = gd.ricci - 0.5 * gd.scalar * gd.g_lower
        worst = 0.0
        for alpha in range(4):
            coeffs = np.zeros(16)
            for nu in range(4):
                coeffs[1 << nu] = einstein_lower[alpha, nu]
            g_form = Multivector(coeffs)
            em = energy_momentum_em(gd, F, alpha)
            fluid = energy_momentum_fluid(gd, J, alpha)
            worst = max(worst, (g_form + em.oneform + fluid.oneform).sup())
        j_sq = pm.scalar_product(J, J)
        residuals = {
            "einstein_eq": worst,
            "trace_equation": abs(gd.scalar - j_sq),
        }
        return residuals, {"current": _oneform_list(J), "scalar_curvature": gd.scalar}

    return run_pointwise("einstein", spec, points, tol, fn)


# -- structure current, quadratic ------------------------------------------------------


@dataclass(frozen=True)
class StructureRoots:
    outcome: str  # "linear" | "two-roots" | "double-root" | "no-real-f"
    roots: tuple
    discriminant: float


def solve_structure_quadratic(c: float) -> StructureRoots:
    """Real solutions of 2 c f^2 + f + 1 = 0; degenerates to f = -1 at c = 0."""
    if c == 0.0:
        return StructureRoots("linear", (-1.0,), 1.0)
    disc = 1.0 - 8.0 * c
    if disc < 0.0:
        return StructureRoots("no-real-f", (), disc)
    if disc == 0.0:
        return StructureRoots("double-root", (-1.0 / (4.0 * c),), disc)
    sq = math.sqrt(disc)
    q = -0.5 * (1.0 + sq)
    roots = [q / (2.0 * c), 1.0 / q]
    polished = []
    for f in roots:
        if not math.isfinite(f):
            continue  # root magnitude beyond float range (|c| subnormal)
        for _ in range(2):  # Newton polish; derivative nonzero off the double root
            deriv = 4.0 * c * f + 1.0
            if deriv != 0.0:
                f = f - (2.0 * c * f * f + f + 1.0) / deriv
        polished.append(f)
    return StructureRoots("two-roots", tuple(sorted(polished)), disc)


def structure_current(spec: MetricSpec, A: MultivectorField, points, tol) -> ResidualReport:
    """Sandwich current B = F A rev(F), the root(s) f, and current matching.

    Gating residuals are the algebraic identities (grade closure of B and the
    quadratic equation satisfied by each root); the distances between the
    Maxwell current and -f B are informational, as is the printed form of the
    consistency equation, since both hold only on exact solutions.
    """

    def fn(gd):
        pm = gd.metric
        fa = FieldCalculus(A, gd)
        aval = fa.value()
        F = fa.exterior_d()
        J = fa.maxwell_current()
        B = pm.clifford(F, pm.clifford(aval, F.reverse()))
        closure = (B - grade_project(B, 1)).sup()
        B1 = grade_project(B, 1)
        c = pm.scalar_product(aval, B1)
        sol = solve_structure_quadratic(c)
        residuals = {"sandwich_grade": closure}
        info = {
            "c": c,
            "discriminant": sol.discriminant,
            "outcome": sol.outcome,
            "roots": list(sol.roots),
            "current": _oneform_list(J),
            "B": _oneform_list(B1),
            "self_consistency_residual": (J + B1 - 2.0 * pm.scalar_product(aval, J) * J).sup(),
        }
        for k, f in enumerate(sol.roots):
            residuals[f"quadratic_root_{k}"] = abs(2.0 * c * f * f + f + 1.0)
            info[f"current_match_minus_fB_{k}"] = (J - (-f) * B1).sup()
            info[f"current_match_plus_fB_{k}"] = (J - f * B1).sup()
        return residuals, info

    notes = (
        "root condition implemented as discriminant 1 - 8(A.B) >= 0; the stated "
        "(A.B)^2 <= 1/8 is not the algebraic condition and is recorded here only",
        "current-matching distances are informational: they vanish only on exact "
        "solutions of the coupled system",
    )
    return run_pointwise("structure_current", spec, points, tol, fn, notes)


def sandwich_link_identities(gd: GeometryData, a: Multivector, f2: Multivector, j: Multivector) -> dict:
    """The four algebraic links used by the structure-equation rewrite."""
    pm = gd.metric
    a_up = gd.g_upper @ _oneform_components(a)

    def contracted_sandwich(x: Multivector) -> Multivector:
        out = Multivector.zero()
        for beta in range(4):
            out = out + a_up[beta] * pm.clifford(x, pm.clifford(_lowered_basis(gd, beta), x))
        return out

    faf = pm.clifford(f2, pm.clifford(a, f2))
    jaj = pm.clifford(j, pm.clifford(a, j))
    j_sq = pm.scalar_product(j, j)
    expansion = jaj - 2.0 * pm.scalar_product(a, j) * j + j_sq * a

    ricci_sum = Multivector.zero()
    einstein_sum = Multivector.zero()
    einstein_lower = gd.ricci - 0.5 * gd.scalar * gd.g_lower
    for beta in range(4):
        coeffs = np.zeros(16)
        gcoeffs = np.zeros(16)
        for nu in range(4):
            coeffs[1 << nu] = gd.ricci[beta, nu]
            gcoeffs[1 << nu] = einstein_lower[beta, nu]
        ricci_sum = ricci_sum + a_up[beta] * Multivector(coeffs)
        einstein_sum = einstein_sum + a_up[beta] * Multivector(gcoeffs)
    trace_link = 2.0 * einstein_sum - (2.0 * ricci_sum - gd.scalar * a)

    return {
        "em_sandwich_linearity": (contracted_sandwich(f2) - faf).sup(),
        "fluid_sandwich_linearity": (contracted_sandwich(j) - jaj).sup(),
        "sandwich_expansion": expansion.sup(),
        "einstein_trace_link": trace_link.sup(),
    }


def sandwich_identities(
    spec: MetricSpec,
    fields: ScenarioFields,
    points,
    tol,
    seed: int = 0,
) -> ResidualReport:
    """Point-level algebra suite; uses supplied fields when present, else random."""
    A = fields.potential()
    rng = np.random.default_rng(seed)
    # keyed by point so the draw is stable under threaded evaluation order
    draws = {
        tuple(float(v) for v in pt): rng.uniform(-1.0, 1.0, size=(3, 16)) for pt in points
    }

    def fn(gd):
        if A is not None:
            fa = FieldCalculus(A, gd)
            a = fa.value()
            f2 = fa.exterior_d()
            j = fa.maxwell_current()
        else:
            raw = draws[tuple(float(v) for v in gd.point)]
            a = grade_project(Multivector(raw[0]), 1)
            f2 = grade_project(Multivector(raw[1]), 2)
            j = grade_project(Multivector(raw[2]), 1)
        return sandwich_link_identities(gd, a, f2, j), {}

    return run_pointwise("sandwich_identities", spec, points, tol, fn)
