"""Differential operators on multivector fields.

Fields are 16 closed-form component expressions in the chart coordinates.
Every operator is evaluated pointwise from exact jets: first covariant
derivatives for the first-order operators, analytic second covariant
derivatives (never differences of operator outputs) for the second-order
ones.  The composed operators d(delta F) and delta(d F) are obtained by
carrying exact first-order jets of delta F and d F, which the second-order
field jets and the metric jets provide in closed form.

Index conventions:  ``cov1[a]`` are the blade components of D_a F,
``cov2[a, b]`` those of D_a D_b F, and the covariant correction enters
through ``Gop[a] = sum Gamma^r_{a i} INDEX_SUB[i, r]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from . import blades
from . import expr as ex
from .algebra import Multivector, grade_project
from .errors import FieldError
from .geometry import GeometryData

_ZERO = ex.ZERO


@dataclass(frozen=True)
class MultivectorField:
    """Multivector-valued field: one expression per blade, plus declared grades."""

    comps: tuple  # 16 Expr, indexed by blade mask
    grades: frozenset

    def __post_init__(self):
        if len(self.comps) != 16:
            raise FieldError("a multivector field needs 16 blade components")
        for mask in range(16):
            if int(blades.GRADE[mask]) not in self.grades and not ex.is_zero(self.comps[mask]):
                raise FieldError(
                    f"component {blades.blade_name(mask)} is outside the declared grades "
                    f"{sorted(self.grades)}"
                )

    @classmethod
    def from_components(cls, components: Mapping, coords=None, grades=None) -> "MultivectorField":
        """Build from a mapping of blade keys to expression sources.

        Keys are either integer masks, ``"1"`` for the scalar part, or
        coordinate names joined by ``^`` (e.g. ``"t^r"``); out-of-order names
        pick up the permutation sign.
        """
        comps = [_ZERO] * 16
        for key, value in components.items():
            sign = 1
            if isinstance(key, (int, np.integer)):
                mask = int(key)
                if not 0 <= mask < 16:
                    raise FieldError(f"blade mask {mask} out of range")
            else:
                mask, sign = _parse_blade_key(str(key), coords)
            e = value if not isinstance(value, str) else ex.parse(value)
            if isinstance(e, (int, float)):
                e = ex.const(e)
            if sign < 0:
                e = ex.Neg(e)
            if not ex.is_zero(comps[mask]):
                raise FieldError(f"duplicate component for blade {blades.blade_name(mask)}")
            comps[mask] = e
        inferred = frozenset(
            int(blades.GRADE[m]) for m in range(16) if not ex.is_zero(comps[m])
        )
        return cls(tuple(comps), frozenset(grades) if grades is not None else inferred)

    @classmethod
    def zero(cls) -> "MultivectorField":
        return cls((_ZERO,) * 16, frozenset())

    @classmethod
    def basis_covector(cls, i: int) -> "MultivectorField":
        comps = [_ZERO] * 16
        comps[1 << i] = ex.ONE
        return cls(tuple(comps), frozenset((1,)))

    def scaled(self, factor: float) -> "MultivectorField":
        if factor == 1.0:
            return self
        comps = tuple(
            e if ex.is_zero(e) else ex.Mul(ex.const(factor), e) for e in self.comps
        )
        return MultivectorField(comps, self.grades)

    def free_names(self) -> frozenset:
        out = frozenset()
        for e in self.comps:
            out |= ex.free_names(e)
        return out


def _parse_blade_key(key: str, coords) -> tuple:
    key = key.strip()
    if key == "1":
        return 0, 1
    if coords is None:
        raise FieldError(f"blade key '{key}' needs coordinate names")
    idxs = []
    for part in key.split("^"):
        part = part.strip()
        if part not in coords:
            raise FieldError(f"blade key '{key}' uses unknown coordinate '{part}'")
        idxs.append(coords.index(part))
    if len(set(idxs)) != len(idxs):
        raise FieldError(f"blade key '{key}' repeats a coordinate")
    mask = blades.mask_of(idxs)
    return mask, blades.sort_parity(idxs)


@dataclass
class FieldJets:
    """Component values and first/second partials of a field at one point."""

    vals: np.ndarray  # (16,)
    grads: np.ndarray  # (16, 4)
    hess: np.ndarray  # (16, 4, 4)


def field_jets(field: MultivectorField, gd: GeometryData) -> FieldJets:
    spec = gd.spec
    vals = np.zeros(16)
    grads = np.zeros((16, 4))
    hess = np.zeros((16, 4, 4))
    for mask in range(16):
        e = field.comps[mask]
        if ex.is_zero(e):
            continue
        jet = ex.evaluate_jet2(e, spec.coords, gd.point, spec.params)
        vals[mask] = jet.val
        grads[mask] = jet.grad
        hess[mask] = jet.hess
    return FieldJets(vals, grads, hess)


class FieldCalculus:
    """All operator evaluations for one field at one geometry point."""

    def __init__(self, field: MultivectorField, gd: GeometryData):
        self.field = field
        self.gd = gd

    @cached_property
    def jets(self) -> FieldJets:
        return field_jets(self.field, self.gd)

    @cached_property
    def _gop(self) -> np.ndarray:
        # Gop[a][m, n]: covariant correction sum Gamma^r_{a i} * INDEX_SUB[i, r]
        return np.einsum("rai,irmn->amn", self.gd.gamma, blades.INDEX_SUB)

    @cached_property
    def _dgop(self) -> np.ndarray:
        return np.einsum("srai,irmn->samn", self.gd.dgamma, blades.INDEX_SUB)

    @cached_property
    def cov1(self) -> np.ndarray:
        """cov1[a] = components of D_a F."""
        return self.jets.grads.T - np.einsum("amn,n->am", self._gop, self.jets.vals)

    @cached_property
    def _pd_cov1(self) -> np.ndarray:
        """pd[s, a] = plain partial d_s of (D_a F) components."""
        return (
            np.einsum("mas->sam", self.jets.hess)
            - np.einsum("samn,n->sam", self._dgop, self.jets.vals)
            - np.einsum("amn,ns->sam", self._gop, self.jets.grads)
        )

    @cached_property
    def cov2(self) -> np.ndarray:
        """cov2[a, b] = components of D_a D_b F."""
        return self._pd_cov1 - np.einsum("amn,bn->abm", self._gop, self.cov1)

    # -- metric jets shared by the composed first-order operators ---------------

    @cached_property
    def _dg_upper(self) -> np.ndarray:
        return -np.einsum("ma,sab,bn->smn", self.gd.g_upper, self.gd.dg, self.gd.g_upper)

    @cached_property
    def _contract_val(self) -> np.ndarray:
        return self.gd.metric.contraction_ops()

    @cached_property
    def _contract_grad(self) -> np.ndarray:
        return np.einsum("sij,jkl->sikl", self._dg_upper, blades.CONTRACT_STRUCT)

    # -- first-order operators ---------------------------------------------------

    def value(self) -> Multivector:
        return Multivector(self.jets.vals)

    def covariant_derivative(self, alpha: int) -> Multivector:
        return Multivector(self.cov1[alpha])

    def dirac(self) -> Multivector:
        L = self.gd.metric.covector_left_ops()
        return Multivector(np.einsum("amn,an->m", L, self.cov1))

    def exterior_d(self) -> Multivector:
        return Multivector(np.einsum("amn,an->m", blades.WEDGE_OP, self.cov1))

    def codifferential(self) -> Multivector:
        return Multivector(-np.einsum("amn,an->m", self._contract_val, self.cov1))

    def codifferential_hodge_route(self) -> Multivector:
        """delta via (-1)^p star^{-1} d star, using D_a(star F) = star(D_a F)."""
        pm = self.gd.metric
        out = Multivector.zero()
        for p in sorted(self.field.grades):
            dstar = np.zeros(16)
            for a in range(4):
                part = grade_project(Multivector(self.cov1[a]), p)
                dstar += blades.WEDGE_OP[a] @ pm.hodge(part).coeffs
            out = out + (-1.0) ** p * pm.hodge_inv(Multivector(dstar))
        return out

    # -- jets of dF and deltaF (exact, from second field jets) --------------------

    @cached_property
    def _d_jet(self) -> tuple:
        val = np.einsum("amn,na->m", blades.WEDGE_OP, self.jets.grads)
        grad = np.einsum("amn,nas->ms", blades.WEDGE_OP, self.jets.hess)
        return val, grad

    @cached_property
    def _delta_jet(self) -> tuple:
        val = -np.einsum("amn,an->m", self._contract_val, self.cov1)
        grad = -(
            np.einsum("samn,an->ms", self._contract_grad, self.cov1)
            + np.einsum("amn,san->ms", self._contract_val, self._pd_cov1)
        )
        return val, grad

    def exterior_d_squared(self) -> Multivector:
        _, grad = self._d_jet
        return Multivector(np.einsum("amn,na->m", blades.WEDGE_OP, grad))

    def maxwell_current(self) -> Multivector:
        """J = -delta(dF): the source current when this field is a potential."""
        dval, dgrad = self._d_jet
        cov_d = dgrad.T - np.einsum("amn,n->am", self._gop, dval)
        return Multivector(np.einsum("amn,an->m", self._contract_val, cov_d))

    def codifferential_squared(self) -> Multivector:
        val, grad = self._delta_jet
        cov_delta = grad.T - np.einsum("amn,n->am", self._gop, val)
        return Multivector(-np.einsum("amn,an->m", self._contract_val, cov_delta))

    # -- second-order operators -----------------------------------------------------

    def covariant_dalembertian(self) -> Multivector:
        gu = self.gd.g_upper
        trace = np.einsum("ab,abm->m", gu, self.cov2)
        corr = np.einsum("ab,rab,rm->m", gu, self.gd.gamma, self.cov1)
        return Multivector(trace - corr)

    def ricci_operator(self) -> Multivector:
        # 1/2 (gamma^a ^ gamma^b) [D_a, D_b] F, the bivector acting by the
        # Clifford product (its grade-raising part dies by the first Bianchi
        # identity; the grade-preserving part is the curvature action)
        comm = self.cov2 - np.einsum("abm->bam", self.cov2)
        biv = self.gd.metric.bivector_left_ops()
        return Multivector(0.5 * np.einsum("abmn,abn->m", biv, comm))

    def hodge_dalembertian(self) -> "HodgeSquare":
        # route (i): -(d delta + delta d) F from the exact operator jets
        dval, dgrad = self._d_jet
        delta_val, delta_grad = self._delta_jet
        d_delta = np.einsum("amn,na->m", blades.WEDGE_OP, delta_grad)
        cov_d = dgrad.T - np.einsum("amn,n->am", self._gop, dval)
        delta_d = -np.einsum("amn,an->m", self._contract_val, cov_d)
        first_order = Multivector(-(d_delta + delta_d))
        second_order = self.covariant_dalembertian() + self.ricci_operator()
        return HodgeSquare(first_order, second_order)


@dataclass(frozen=True)
class HodgeSquare:
    """Both evaluations of the squared Dirac operator, with their disagreement."""

    first_order_route: Multivector  # -(d delta + delta d) F
    second_order_route: Multivector  # covariant D'Alembertian + Ricci operator

    @property
    def disagreement(self) -> float:
        return (self.first_order_route - self.second_order_route).sup()

    @property
    def value(self) -> Multivector:
        return self.second_order_route


# -- convenience wrappers ------------------------------------------------------------


def covariant_derivative(field: MultivectorField, alpha: int, gd: GeometryData) -> Multivector:
    return FieldCalculus(field, gd).covariant_derivative(alpha)


def dirac(field: MultivectorField, gd: GeometryData) -> Multivector:
    return FieldCalculus(field, gd).dirac()


def exterior_d(field: MultivectorField, gd: GeometryData) -> Multivector:
    return FieldCalculus(field, gd).exterior_d()


def codifferential(field: MultivectorField, gd: GeometryData) -> Multivector:
    return FieldCalculus(field, gd).codifferential()


def covariant_dalembertian(field: MultivectorField, gd: GeometryData) -> Multivector:
    return FieldCalculus(field, gd).covariant_dalembertian()


def ricci_operator(field: MultivectorField, gd: GeometryData) -> Multivector:
    return FieldCalculus(field, gd).ricci_operator()


def hodge_dalembertian(field: MultivectorField, gd: GeometryData) -> HodgeSquare:
    return FieldCalculus(field, gd).hodge_dalembertian()


def grad_scalar_product(a: MultivectorField, b: MultivectorField, gd: GeometryData) -> Multivector:
    """Gradient 1-form of the scalar field a . b, for grade-1 fields."""
    if a.grades - {1} or b.grades - {1}:
        raise FieldError("grad_scalar_product expects grade-1 fields")
    ja, jb = field_jets(a, gd), field_jets(b, gd)
    va = np.array([ja.vals[1 << i] for i in range(4)])
    vb = np.array([jb.vals[1 << i] for i in range(4)])
    da = np.array([[ja.grads[1 << i, s] for s in range(4)] for i in range(4)])
    db = np.array([[jb.grads[1 << i, s] for s in range(4)] for i in range(4)])
    gu = gd.g_upper
    dgu = -np.einsum("ma,sab,bn->smn", gu, gd.dg, gu)
    grad = (
        np.einsum("is,ij,j->s", da, gu, vb)
        + np.einsum("i,sij,j->s", va, dgu, vb)
        + np.einsum("i,ij,js->s", va, gu, db)
    )
    coeffs = np.zeros(16)
    for s in range(4):
        coeffs[1 << s] = grad[s]
    return Multivector(coeffs)
