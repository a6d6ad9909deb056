"""Pointwise Clifford algebra of the cotangent space.

The coefficient layout follows :mod:`cliffcheck.blades`: 16 reals indexed by
blade mask.  All metric-dependent products are driven by per-metric tables
built once per :class:`PointMetric`:

* left multiplication by a single covector is the operator
  ``L[i] = C[i] + W[i]`` (interior + exterior part),
* left multiplication by a blade is obtained by peeling its lowest covector
  through ``gamma^M X = gamma^i (gamma^rest X) - (gamma^i _| gamma^rest) X``,
* left contraction by a blade composes single-covector interior products.

The metric handed to :class:`PointMetric` is the *cotangent* scalar product
(the matrix of products of the coordinate covectors); its inverse is the
tangent metric whose determinant fixes signature and volume normalization.
"""

from __future__ import annotations

import numpy as np

from . import blades
from .errors import DegenerateMetricError, SignatureError

_EYE16 = np.eye(blades.N_BLADES)


class Multivector:
    """Immutable element of the 16-dimensional algebra at a point."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.array(coeffs, dtype=float)
        if arr.shape != (blades.N_BLADES,):
            raise ValueError(f"expected 16 blade coefficients, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "Multivector":
        return cls(np.zeros(blades.N_BLADES))

    @classmethod
    def scalar(cls, value: float) -> "Multivector":
        c = np.zeros(blades.N_BLADES)
        c[0] = value
        return cls(c)

    @classmethod
    def covector(cls, i: int, coeff: float = 1.0) -> "Multivector":
        c = np.zeros(blades.N_BLADES)
        c[1 << i] = coeff
        return cls(c)

    @classmethod
    def blade(cls, idxs, coeff: float = 1.0) -> "Multivector":
        """Wedge of the listed covectors, e.g. ``blade((0, 1))`` = g0^g1."""
        idxs = tuple(idxs)
        if len(set(idxs)) != len(idxs):
            return cls.zero()
        c = np.zeros(blades.N_BLADES)
        c[blades.mask_of(idxs)] = coeff * blades.sort_parity(idxs)
        return cls(c)

    @classmethod
    def from_mask(cls, mask: int, coeff: float = 1.0) -> "Multivector":
        c = np.zeros(blades.N_BLADES)
        c[mask] = coeff
        return cls(c)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Multivector") -> "Multivector":
        return Multivector(self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return Multivector(self.coeffs - other.coeffs)

    def __neg__(self) -> "Multivector":
        return Multivector(-self.coeffs)

    def __mul__(self, scale) -> "Multivector":
        return Multivector(self.coeffs * float(scale))

    __rmul__ = __mul__

    def __truediv__(self, scale) -> "Multivector":
        return Multivector(self.coeffs / float(scale))

    def __eq__(self, other) -> bool:
        return isinstance(other, Multivector) and bool(np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    # -- structure ---------------------------------------------------------

    def grade(self, k: int) -> "Multivector":
        return grade_project(self, k)

    def grades(self, tol: float = 0.0) -> frozenset:
        return frozenset(int(blades.GRADE[m]) for m in range(blades.N_BLADES)
                         if abs(self.coeffs[m]) > tol)

    def reverse(self) -> "Multivector":
        return Multivector(self.coeffs * blades.REVERSE_SIGN)

    def involute(self) -> "Multivector":
        return Multivector(self.coeffs * blades.INVOLUTE_SIGN)

    @property
    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def sup(self) -> float:
        """Sup norm over blade coefficients."""
        return float(np.max(np.abs(self.coeffs)))

    def __repr__(self):
        terms = [
            f"{self.coeffs[m]:+.6g}*{blades.blade_name(m)}"
            for m in range(blades.N_BLADES)
            if self.coeffs[m] != 0.0
        ]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"


def wedge(a: Multivector, b: Multivector) -> Multivector:
    """Exterior product; metric independent."""
    return Multivector(np.einsum("i,j,ijk->k", a.coeffs, b.coeffs, blades.WEDGE_TENSOR))


def reverse(a: Multivector) -> Multivector:
    return a.reverse()


def grade_involution(a: Multivector) -> Multivector:
    return a.involute()


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= blades.DIM:
        raise ValueError(f"grade {k} out of range 0..4")
    out = np.where(blades.GRADE == k, a.coeffs, 0.0)
    return Multivector(out)


class PointMetric:
    """Nondegenerate symmetric cotangent metric at one point, with product tables.

    Parameters
    ----------
    g:
        4x4 symmetric matrix of covector scalar products (the inverse of the
        tangent metric).
    require_lorentzian:
        When true (the default), reject metrics whose tangent determinant is
        not negative; property tests may relax this for random signatures.
    """

    __slots__ = ("g", "ginv", "sqrt_abs_det", "sign_det", "lorentzian", "_tables")

    def __init__(self, g, require_lorentzian: bool = True, _ginv=None):
        g = np.array(g, dtype=float)
        if g.shape != (4, 4):
            raise ValueError("metric must be 4x4")
        if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(g)))):
            raise ValueError("metric must be symmetric")
        g = 0.5 * (g + g.T)
        det_cot = np.linalg.det(g)
        if abs(det_cot) < 1e-14:
            raise DegenerateMetricError(f"cotangent metric is singular (det={det_cot:.3e})")
        ginv = np.linalg.inv(g) if _ginv is None else np.array(_ginv, dtype=float)
        if np.max(np.abs(g @ ginv - np.eye(4))) > 1e-10:
            raise DegenerateMetricError("metric inverse failed the identity check")
        det_tan = np.linalg.det(ginv)
        lorentzian = det_tan < 0.0
        if require_lorentzian and not lorentzian:
            raise SignatureError(f"tangent metric determinant {det_tan:.3e} is not negative")
        object.__setattr__(self, "g", _readonly(g))
        object.__setattr__(self, "ginv", _readonly(ginv))
        object.__setattr__(self, "sqrt_abs_det", float(np.sqrt(abs(det_tan))))
        object.__setattr__(self, "sign_det", -1.0 if det_tan < 0 else 1.0)
        object.__setattr__(self, "lorentzian", lorentzian)
        object.__setattr__(self, "_tables", None)

    def __setattr__(self, name, value):
        raise AttributeError("PointMetric is immutable")

    @classmethod
    def from_tangent_metric(cls, g_lower, require_lorentzian: bool = True) -> "PointMetric":
        g_lower = np.array(g_lower, dtype=float)
        det = np.linalg.det(g_lower)
        if abs(det) < 1e-14:
            raise DegenerateMetricError(f"tangent metric is singular (det={det:.3e})")
        return cls(np.linalg.inv(g_lower), require_lorentzian=require_lorentzian, _ginv=g_lower)

    # -- tables ------------------------------------------------------------

    def _build_tables(self) -> dict:
        g = self.g
        n = blades.N_BLADES
        # single-covector interior products and left multiplications
        C = np.einsum("ij,jkl->ikl", g, blades.CONTRACT_STRUCT)
        L = C + blades.WEDGE_OP

        # blade left-multiplication operators by peeling the lowest covector
        M = np.zeros((n, n, n))
        M[0] = _EYE16
        for i in range(4):
            M[1 << i] = L[i]
        for k in range(2, 5):
            for mask in blades.MASKS_BY_GRADE[k]:
                i = (mask & -mask).bit_length() - 1
                rest = mask ^ (1 << i)
                corr = C[i, :, rest]  # coefficients of gamma^i _| gamma^rest
                M[mask] = L[i] @ M[rest] - np.tensordot(corr, M, axes=(0, 0))

        # blade left-contraction operators: compose interior products
        K = np.zeros((n, n, n))
        K[0] = _EYE16
        for i in range(4):
            K[1 << i] = C[i]
        for k in range(2, 5):
            for mask in blades.MASKS_BY_GRADE[k]:
                i = (mask & -mask).bit_length() - 1
                K[mask] = C[i] @ K[mask ^ (1 << i)]

        # Gram-determinant scalar products between equal-grade blades,
        # batched per grade for speed
        SP = np.zeros((n, n))
        SP[0, 0] = 1.0
        for k in range(1, 5):
            amasks, bmasks, rows, cols = blades.GRAM_PAIRS[k]
            SP[amasks, bmasks] = np.linalg.det(g[rows, cols])

        # right contraction: X |_ Y = (-1)^{r(s-r)} Y_r _| X_s per homogeneous
        # pair; fold the grade sign into the contraction tensor once
        KR = K * blades.LEFT_RIGHT_SIGN[:, np.newaxis, :]

        # left multiplication by the coordinate bivectors gamma^a ^ gamma^b
        B2 = M[blades.BIVECTOR_MASK] * blades.BIVECTOR_SIGN[:, :, np.newaxis, np.newaxis]

        tau = self.volume_form().coeffs
        # Hodge matrix: star(A) = H @ A with H[:, m] = rev_sign(m) * (gamma^m _| tau)
        H = np.einsum("ikj,j->ki", K, tau) * blades.REVERSE_SIGN[np.newaxis, :]
        inv_scale = self.sign_det * (-1.0) ** (blades.GRADE * (4 - blades.GRADE))
        return {"C": C, "L": L, "M": M, "K": K, "KR": KR, "B2": B2, "SP": SP, "H": H,
                "Hinv_scale": inv_scale}

    @property
    def tables(self) -> dict:
        if self._tables is None:
            object.__setattr__(self, "_tables", self._build_tables())
        return self._tables

    def contraction_ops(self) -> np.ndarray:
        """Stack of the four single-covector interior-product operators."""
        return self.tables["C"]

    def covector_left_ops(self) -> np.ndarray:
        """Stack of the four 'left multiply by gamma^i' operators."""
        return self.tables["L"]

    def bivector_left_ops(self) -> np.ndarray:
        """(4,4,16,16) stack: left Clifford multiplication by gamma^a ^ gamma^b."""
        return self.tables["B2"]

    # -- products ----------------------------------------------------------

    def clifford(self, a: Multivector, b: Multivector) -> Multivector:
        left = np.tensordot(a.coeffs, self.tables["M"], axes=(0, 0))
        return Multivector(left @ b.coeffs)

    def left_contract(self, a: Multivector, b: Multivector) -> Multivector:
        op = np.tensordot(a.coeffs, self.tables["K"], axes=(0, 0))
        return Multivector(op @ b.coeffs)

    def right_contract(self, a: Multivector, b: Multivector) -> Multivector:
        op = np.tensordot(b.coeffs, self.tables["KR"], axes=(0, 0))
        return Multivector(op @ a.coeffs)

    def scalar_product(self, a: Multivector, b: Multivector) -> float:
        return float(a.coeffs @ self.tables["SP"] @ b.coeffs)

    def hodge(self, a: Multivector, tau: Multivector | None = None) -> Multivector:
        if tau is None:
            return Multivector(self.tables["H"] @ a.coeffs)
        K = self.tables["K"]
        H = np.einsum("ikj,j->ki", K, tau.coeffs) * blades.REVERSE_SIGN[np.newaxis, :]
        return Multivector(H @ a.coeffs)

    def hodge_inv(self, a: Multivector, tau: Multivector | None = None) -> Multivector:
        scaled = Multivector(a.coeffs * self.tables["Hinv_scale"])
        return self.hodge(scaled, tau)

    def volume_form(self) -> Multivector:
        """Unit volume 4-form in coordinate-ascending orientation."""
        return Multivector.from_mask(blades.FULL_MASK, self.sqrt_abs_det)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr
