"""Randomized property suites over the algebra and the differential operators.

The algebra suite draws a fresh Lorentzian point metric and fresh random
multivectors every trial and evaluates the full list of product, contraction
and duality laws, tracking the worst relative residual per law.  The operator
suite exercises the differential-operator consistency statements on random
polynomial fields over the builtin metric catalog.  Both back the
``algebra-selftest`` CLI command and the acceptance suite.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import blades
from . import expr as ex
from .algebra import Multivector, PointMetric, grade_involution, grade_project, wedge
from .diffops import FieldCalculus, MultivectorField
from .geometry import CATALOG, build_metric, curvature

ETA = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass
class LawStat:
    name: str
    trials: int
    max_residual: float
    passed: bool


@dataclass
class SuiteResult:
    name: str
    threshold: float
    laws: list
    elapsed_s: float

    @property
    def passed(self) -> bool:
        return all(law.passed for law in self.laws)

    @property
    def max_residual(self) -> float:
        return max((law.max_residual for law in self.laws), default=0.0)

    def lines(self) -> list:
        out = []
        for law in self.laws:
            status = "PASS" if law.passed else "FAIL"
            out.append(
                f"[{status}] {law.name:<34} max_residual={law.max_residual:.3e} "
                f"(threshold {self.threshold:.0e}, {law.trials} trials)"
            )
        return out


def random_lorentzian_metric(rng: np.random.Generator, spread: float = 0.4) -> PointMetric:
    """Congruent image of the flat metric; always signature (1,3)."""
    while True:
        L = np.eye(4) + spread * rng.standard_normal((4, 4))
        if abs(np.linalg.det(L)) > 0.2:
            return PointMetric(L @ ETA @ L.T)


def _rel(diff: float, *scales: float) -> float:
    return diff / max(1.0, *scales)


def _mv(rng) -> Multivector:
    return Multivector(rng.uniform(-1.0, 1.0, size=16))


def run_algebra_suite(iterations: int = 10_000, seed: int = 20240811,
                      threshold: float = 1e-10) -> SuiteResult:
    rng = np.random.default_rng(seed)
    names = [
        "associativity",
        "anticommutator",
        "product_split",
        "contraction_half_commutator",
        "left_right_contraction",
        "wedge_half_commutator",
        "product_grade_spectrum",
        "scalar_product_reversal_routes",
        "contraction_antiderivation",
        "contraction_composition",
        "hodge_defining_pairing",
        "star_wedge_symmetry",
        "star_pairing_symmetry",
        "star_wedge_to_contraction",
        "star_contraction_to_wedge",
        "star_of_volume_and_unit",
        "hodge_inverse",
        "sandwich_trivector_closure",
    ]
    worst = dict.fromkeys(names, 0.0)
    start = time.perf_counter()

    for _ in range(iterations):
        m = random_lorentzian_metric(rng)
        a, b, c = _mv(rng), _mv(rng), _mv(rng)
        one_form = grade_project(a, 1)
        r = int(rng.integers(0, 5))
        s = int(rng.integers(0, 5))
        ar = grade_project(a, r)
        bs = grade_project(b, s)

        # associativity of the geometric product
        lhs = m.clifford(m.clifford(a, b), c)
        rhs = m.clifford(a, m.clifford(b, c))
        worst["associativity"] = max(
            worst["associativity"], _rel((lhs - rhs).sup(), lhs.sup(), rhs.sup())
        )

        # anticommutator of covectors reproduces the metric
        i, j = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        gi, gj = Multivector.covector(i), Multivector.covector(j)
        anti = m.clifford(gi, gj) + m.clifford(gj, gi)
        target = Multivector.scalar(2.0 * m.g[i, j])
        worst["anticommutator"] = max(
            worst["anticommutator"], _rel((anti - target).sup(), target.sup())
        )

        # a B = a _| B + a ^ B and B a = B |_ a + B ^ a
        split = (
            m.clifford(one_form, b) - m.left_contract(one_form, b) - wedge(one_form, b)
        ).sup()
        split2 = (
            m.clifford(b, one_form) - m.right_contract(b, one_form) - wedge(b, one_form)
        ).sup()
        worst["product_split"] = max(
            worst["product_split"], _rel(max(split, split2), b.sup())
        )

        # a _| B_s = (a B_s - (-1)^s B_s a)/2
        ab, ba = m.clifford(one_form, bs), m.clifford(bs, one_form)
        half_contract = 0.5 * (ab - (-1.0) ** s * ba)
        worst["contraction_half_commutator"] = max(
            worst["contraction_half_commutator"],
            _rel((m.left_contract(one_form, bs) - half_contract).sup(), bs.sup()),
        )

        # A_r _| B_s = (-1)^{r(s-r)} B_s |_ A_r
        lr = m.left_contract(ar, bs) - (-1.0) ** (r * (s - r)) * m.right_contract(bs, ar)
        worst["left_right_contraction"] = max(
            worst["left_right_contraction"], _rel(lr.sup(), ar.sup(), bs.sup())
        )

        # a ^ B_s = (a B_s + (-1)^s B_s a)/2
        half_wedge = 0.5 * (ab + (-1.0) ** s * ba)
        worst["wedge_half_commutator"] = max(
            worst["wedge_half_commutator"], _rel((wedge(one_form, bs) - half_wedge).sup(), bs.sup())
        )

        # grade spectrum of A_r B_s
        prod = m.clifford(ar, bs)
        allowed = set(range(abs(r - s), min(r + s, 8 - r - s) + 1, 2))
        off = sum(
            grade_project(prod, k).sup() for k in range(5) if k not in allowed
        )
        worst["product_grade_spectrum"] = max(
            worst["product_grade_spectrum"], _rel(off, prod.sup())
        )

        # A_r . B_r = <rev(A) B>_0 = <A rev(B)>_0 = rev(A) _| B
        br = grade_project(b, r)
        sp = m.scalar_product(ar, br)
        rev_routes = max(
            abs(sp - m.clifford(ar.reverse(), br).scalar_part),
            abs(sp - m.clifford(ar, br.reverse()).scalar_part),
            abs(sp - m.left_contract(ar.reverse(), br).scalar_part),
        )
        worst["scalar_product_reversal_routes"] = max(
            worst["scalar_product_reversal_routes"], _rel(rev_routes, abs(sp), ar.sup(), br.sup())
        )

        # a _| (X ^ Y) = (a _| X) ^ Y + hat(X) ^ (a _| Y)
        t54 = (
            m.left_contract(one_form, wedge(b, c))
            - wedge(m.left_contract(one_form, b), c)
            - wedge(grade_involution(b), m.left_contract(one_form, c))
        )
        worst["contraction_antiderivation"] = max(
            worst["contraction_antiderivation"], _rel(t54.sup(), b.sup(), c.sup())
        )

        # A _| (B _| C) = (A ^ B) _| C
        t55 = m.left_contract(a, m.left_contract(b, c)) - m.left_contract(wedge(a, b), c)
        worst["contraction_composition"] = max(
            worst["contraction_composition"], _rel(t55.sup(), a.sup(), b.sup(), c.sup())
        )

        # [B_k . A_k] tau = B_k ^ star(A_k) against the contraction route
        tau = m.volume_form()
        k = int(rng.integers(0, 5))
        ak, bk = grade_project(a, k), grade_project(b, k)
        pairing = (m.scalar_product(bk, ak) * tau - wedge(bk, m.hodge(ak))).sup()
        worst["hodge_defining_pairing"] = max(
            worst["hodge_defining_pairing"], _rel(pairing, ak.sup(), bk.sup())
        )

        # star conversion identities
        if r == s:
            sym = (wedge(ar, m.hodge(bs)) - wedge(bs, m.hodge(ar))).sup()
            worst["star_wedge_symmetry"] = max(
                worst["star_wedge_symmetry"], _rel(sym, ar.sup(), bs.sup())
            )
        if r + s == 4:
            pair = abs(
                m.left_contract(ar, m.hodge(bs)).scalar_part
                - m.left_contract(bs, m.hodge(ar)).scalar_part
            )
            worst["star_pairing_symmetry"] = max(
                worst["star_pairing_symmetry"], _rel(pair, ar.sup(), bs.sup())
            )
        if r <= s:
            conv = (
                wedge(ar, m.hodge(bs))
                - (-1.0) ** (r * (s - 1)) * m.hodge(m.left_contract(ar.reverse(), bs))
            ).sup()
            worst["star_wedge_to_contraction"] = max(
                worst["star_wedge_to_contraction"], _rel(conv, ar.sup(), bs.sup())
            )
        if r + s <= 4:
            conv = (
                m.left_contract(ar, m.hodge(bs))
                - (-1.0) ** (r * s) * m.hodge(wedge(ar.reverse(), bs))
            ).sup()
            worst["star_contraction_to_wedge"] = max(
                worst["star_contraction_to_wedge"], _rel(conv, ar.sup(), bs.sup())
            )

        vol = (m.hodge(tau) - Multivector.scalar(m.sign_det)).sup()
        unit = (m.hodge(Multivector.scalar(1.0)) - tau).sup()
        worst["star_of_volume_and_unit"] = max(
            worst["star_of_volume_and_unit"], _rel(max(vol, unit), tau.sup())
        )

        inv = (m.hodge_inv(m.hodge(a)) - a).sup()
        worst["hodge_inverse"] = max(worst["hodge_inverse"], _rel(inv, a.sup()))

        f2 = grade_project(b, 2)
        sandwich = m.clifford(f2, m.clifford(one_form, f2))
        worst["sandwich_trivector_closure"] = max(
            worst["sandwich_trivector_closure"],
            _rel(grade_project(sandwich, 3).sup(), sandwich.sup()),
        )

    elapsed = time.perf_counter() - start
    laws = [LawStat(n, iterations, worst[n], worst[n] < threshold) for n in names]
    return SuiteResult("algebra", threshold, laws, elapsed)


# -- random expression-defined fields ------------------------------------------------


def random_field(rng: np.random.Generator, coords, masks) -> MultivectorField:
    """Random low-degree polynomial/trigonometric field, smooth everywhere."""
    comps = {}
    for mask in masks:
        terms = []
        for _ in range(int(rng.integers(1, 3))):
            factor = ex.const(round(float(rng.uniform(-1.5, 1.5)), 6))
            for name in rng.choice(coords, size=int(rng.integers(0, 3)), replace=True):
                if rng.random() < 0.25:
                    factor = ex.Mul(factor, ex.Call("sin", (ex.Var(str(name)),)))
                else:
                    factor = ex.Mul(factor, ex.Var(str(name)))
            terms.append(factor)
        e = terms[0]
        for t in terms[1:]:
            e = ex.Add(e, t)
        comps[int(mask)] = e
    return MultivectorField.from_components(comps, tuple(coords))


def random_mixed_masks(rng: np.random.Generator) -> list:
    count = int(rng.integers(2, 5))
    return sorted(int(v) for v in rng.choice(16, size=count, replace=False))


def catalog_sample_point(rng: np.random.Generator, spec) -> np.ndarray:
    box = spec.domain_box()
    return np.array([rng.uniform(lo, hi) for lo, hi in (box[c] for c in spec.coords)])


def run_diffops_suite(fields_per_metric: int = 25, seed: int = 20240812,
                      threshold: float = 1e-8) -> SuiteResult:
    rng = np.random.default_rng(seed)
    names = [
        "dirac_grade_split",
        "exterior_d_squared",
        "codifferential_squared",
        "codifferential_hodge_route",
        "operator_square_routes",
        "ricci_extensoriality",
        "lorenz_trace_identity",
    ]
    worst = dict.fromkeys(names, 0.0)
    start = time.perf_counter()
    params = {"minkowski": None, "schwarzschild": {"M": 1.0}, "flrw": {"a": "t"}}

    for key in sorted(CATALOG):
        spec = build_metric(key, params[key])
        for _ in range(fields_per_metric):
            gd = curvature(spec, catalog_sample_point(rng, spec))
            F = random_field(rng, spec.coords, random_mixed_masks(rng))
            fc = FieldCalculus(F, gd)
            scale = max(1.0, fc.value().sup())

            # mixed grades: dirac F = dF - delta F
            res = (fc.dirac() - fc.exterior_d() + fc.codifferential()).sup()
            # homogeneous piece: the split is exactly the grade shift by +-1
            p = int(rng.integers(0, 5))
            hom = random_field(rng, spec.coords, list(blades.MASKS_BY_GRADE[p]))
            fh = FieldCalculus(hom, gd)
            full = fh.dirac()
            if p < 4:
                res = max(res, (grade_project(full, p + 1) - fh.exterior_d()).sup())
            if p > 0:
                res = max(res, (grade_project(full, p - 1) + fh.codifferential()).sup())
            worst["dirac_grade_split"] = max(worst["dirac_grade_split"], _rel(res, scale))

            worst["exterior_d_squared"] = max(
                worst["exterior_d_squared"], _rel(fc.exterior_d_squared().sup(), scale)
            )
            worst["codifferential_squared"] = max(
                worst["codifferential_squared"], _rel(fc.codifferential_squared().sup(), scale)
            )
            worst["codifferential_hodge_route"] = max(
                worst["codifferential_hodge_route"],
                _rel((fc.codifferential() - fc.codifferential_hodge_route()).sup(), scale),
            )
            hs = fc.hodge_dalembertian()
            worst["operator_square_routes"] = max(
                worst["operator_square_routes"], _rel(hs.disagreement, hs.value.sup(), scale)
            )

            A = random_field(rng, spec.coords, [1, 2, 4, 8])
            fa = FieldCalculus(A, gd)
            rhs = Multivector.zero()
            for mu in range(4):
                rhs = rhs + fa.jets.vals[1 << mu] * gd.ricci_oneforms[mu]
            worst["ricci_extensoriality"] = max(
                worst["ricci_extensoriality"],
                _rel((fa.ricci_operator() - rhs).sup(), rhs.sup(), fa.value().sup()),
            )
            delta = fa.codifferential().scalar_part
            trace = -sum(
                gd.g_upper[k, mcomp] * fa.cov1[k][1 << mcomp]
                for k in range(4)
                for mcomp in range(4)
            )
            worst["lorenz_trace_identity"] = max(
                worst["lorenz_trace_identity"], _rel(abs(delta - trace), abs(trace))
            )

    elapsed = time.perf_counter() - start
    trials = fields_per_metric * len(CATALOG)
    laws = [LawStat(n, trials, worst[n], worst[n] < threshold) for n in names]
    return SuiteResult("diffops", threshold, laws, elapsed)
