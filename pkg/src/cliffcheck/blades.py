"""Blade-level combinatorics of the 16-dimensional exterior algebra over R^4.

A blade is encoded as a 4-bit mask: bit ``i`` set means the coordinate
covector number ``i`` participates, with factors always kept in ascending
index order.  Everything in this module is metric-free integer structure,
computed once at import time; the metric-dependent tables live in
:mod:`cliffcheck.algebra`.
"""

from __future__ import annotations

import numpy as np

DIM = 4
N_BLADES = 1 << DIM
FULL_MASK = N_BLADES - 1

GRADE = np.array([bin(m).count("1") for m in range(N_BLADES)], dtype=np.int64)
MASKS_BY_GRADE = tuple(
    tuple(m for m in range(N_BLADES) if GRADE[m] == k) for k in range(DIM + 1)
)

# reversion (-1)^{k(k-1)/2} and grade involution (-1)^k, per blade
REVERSE_SIGN = np.array([(-1.0) ** (GRADE[m] * (GRADE[m] - 1) // 2) for m in range(N_BLADES)])
INVOLUTE_SIGN = np.array([(-1.0) ** GRADE[m] for m in range(N_BLADES)])


def indices(mask: int) -> tuple[int, ...]:
    """Ascending covector indices present in ``mask``."""
    return tuple(i for i in range(DIM) if mask >> i & 1)


def mask_of(idxs) -> int:
    mask = 0
    for i in idxs:
        mask |= 1 << i
    return mask


def _merge_sign(a: int, b: int) -> int:
    # parity of sorting concat(indices(a), indices(b)); masks assumed disjoint
    swaps = 0
    for j in indices(b):
        swaps += bin(a >> (j + 1)).count("1")
    return -1 if swaps & 1 else 1


def sort_parity(seq) -> int:
    seq = list(seq)
    swaps = 0
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                swaps += 1
    return -1 if swaps & 1 else 1


WEDGE_SIGN = np.zeros((N_BLADES, N_BLADES), dtype=np.int64)
for _a in range(N_BLADES):
    for _b in range(N_BLADES):
        if not _a & _b:
            WEDGE_SIGN[_a, _b] = _merge_sign(_a, _b)

# full exterior-product tensor: (A ^ B)_k = sum_{a,b} A_a B_b WEDGE_TENSOR[a,b,k]
WEDGE_TENSOR = np.zeros((N_BLADES, N_BLADES, N_BLADES))
for _a in range(N_BLADES):
    for _b in range(N_BLADES):
        if not _a & _b:
            WEDGE_TENSOR[_a, _b, _a | _b] = WEDGE_SIGN[_a, _b]

# wedge-by-single-covector operators: WEDGE_OP[i] @ x  ==  gamma^i ^ x
WEDGE_OP = np.zeros((DIM, N_BLADES, N_BLADES))
for _i in range(DIM):
    for _m in range(N_BLADES):
        if not _m >> _i & 1:
            WEDGE_OP[_i, _m | 1 << _i, _m] = WEDGE_SIGN[1 << _i, _m]

# WEDGE2_OP[a,b] @ x  ==  gamma^a ^ gamma^b ^ x  (used by the curvature operator)
WEDGE2_OP = np.einsum("akl,blm->abkm", WEDGE_OP, WEDGE_OP)

# Interior product by gamma^i is the antiderivation
#   gamma^i _| (a_1^...^a_p) = sum_m (-1)^(m-1) g(gamma^i, a_m) a_1^..â_m..^a_p,
# linear in the metric row g[i,:]:  C[i] = sum_j g[i,j] * CONTRACT_STRUCT[j].
CONTRACT_STRUCT = np.zeros((DIM, N_BLADES, N_BLADES))
for _j in range(DIM):
    for _m in range(N_BLADES):
        if _m >> _j & 1:
            _pos = bin(_m & ((1 << _j) - 1)).count("1")
            CONTRACT_STRUCT[_j, _m ^ 1 << _j, _m] = (-1.0) ** _pos

# INDEX_SUB[i, r][m, m'] is the signed coefficient of component m' in the
# antisymmetrized component "m with covector i replaced by r"; zero when the
# replacement repeats an index.  Used by covariant derivatives of p-forms.
INDEX_SUB = np.zeros((DIM, DIM, N_BLADES, N_BLADES))
for _i in range(DIM):
    for _r in range(DIM):
        for _m in range(N_BLADES):
            if not _m >> _i & 1:
                continue
            if _r == _i:
                INDEX_SUB[_i, _r, _m, _m] = 1.0
                continue
            if _m >> _r & 1:
                continue  # repeated index: antisymmetric component vanishes
            _src = (_m ^ (1 << _i)) | (1 << _r)
            _tup = [_r if q == _i else q for q in indices(_m)]
            INDEX_SUB[_i, _r, _m, _src] = sort_parity(_tup)

# sign (-1)^{r(s-r)} relating left and right contraction of an r-blade into an
# s-blade, laid out per (blade of the contractor, blade of the contractee)
LEFT_RIGHT_SIGN = np.zeros((N_BLADES, N_BLADES))
for _a in range(N_BLADES):
    for _b in range(N_BLADES):
        _r, _s = GRADE[_a], GRADE[_b]
        LEFT_RIGHT_SIGN[_a, _b] = (-1.0) ** (_r * (_s - _r))


# static index scaffolding for batched Gram determinants: per grade k, the
# row/column coordinate arrays of every equal-grade blade pair
GRAM_PAIRS = {}
for _k in range(1, 5):
    _masks = MASKS_BY_GRADE[_k]
    _pairs = [(a, b) for a in _masks for b in _masks]
    _rows = np.array([[[i] * _k for i in indices(a)] for a, _ in _pairs])
    _cols = np.array([[list(indices(b))] * _k for _, b in _pairs])
    GRAM_PAIRS[_k] = (
        np.array([a for a, _ in _pairs]),
        np.array([b for _, b in _pairs]),
        _rows,
        _cols,
    )

# blade masks of the coordinate bivectors, with wedge orientation signs
BIVECTOR_MASK = np.zeros((DIM, DIM), dtype=np.int64)
BIVECTOR_SIGN = np.zeros((DIM, DIM))
for _a in range(DIM):
    for _b in range(DIM):
        if _a != _b:
            BIVECTOR_MASK[_a, _b] = (1 << _a) | (1 << _b)
            BIVECTOR_SIGN[_a, _b] = 1.0 if _a < _b else -1.0


def blade_name(mask: int, names=("g0", "g1", "g2", "g3")) -> str:
    if mask == 0:
        return "1"
    return "^".join(names[i] for i in indices(mask))
