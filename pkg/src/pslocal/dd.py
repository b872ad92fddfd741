"""Double description method over exact integer arithmetic.

Computes the extreme rays of a pointed polyhedral cone given by homogeneous
inequalities ``h . z >= 0``.  Facet enumeration of a full-dimensional
polytope conv(V) reduces to this: homogenize each vertex v into the row
(1, v); the extreme rays (r0, r) of the dual-side cone are exactly the
facets ``(-r) . x <= r0``.

Implementation notes:
* all ray vectors are kept as coprime integer tuples;
* active-constraint sets are bitmasks over the already-inserted rows, so
  the combinatorial adjacency test is a couple of machine-word operations
  after a popcount prefilter;
* constraints are inserted in lexicographic order of their normalized rows,
  which makes the output independent of the input ordering.
"""

from __future__ import annotations

import time
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from .errors import BudgetExceeded

ZERO = Fraction(0)


def _normalize_int_vector(vec: Sequence) -> Tuple[int, ...]:
    """Scale a rational vector by a positive factor to coprime integers."""
    fracs = [Fraction(v) for v in vec]
    denom = 1
    for v in fracs:
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = [int(v * denom) for v in fracs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def _independent_subset(rows: List[Tuple[int, ...]], dim: int) -> List[int]:
    """Indices of a maximal linearly independent subset, greedy in order."""
    chosen: List[int] = []
    reduced: List[List[Fraction]] = []
    pivots: List[int] = []
    for idx, row in enumerate(rows):
        vec = [Fraction(v) for v in row]
        for prow, pcol in zip(reduced, pivots):
            factor = vec[pcol]
            if factor:
                vec = [a - factor * b for a, b in zip(vec, prow)]
        pivot = next((j for j, v in enumerate(vec) if v), -1)
        if pivot < 0:
            continue
        inv = Fraction(1) / vec[pivot]
        vec = [v * inv for v in vec]
        reduced.append(vec)
        pivots.append(pivot)
        chosen.append(idx)
        if len(chosen) == dim:
            break
    return chosen


def _invert(matrix: List[Tuple[int, ...]]) -> List[List[Fraction]]:
    """Exact inverse of a square integer matrix via Gauss-Jordan."""
    d = len(matrix)
    aug = [
        [Fraction(v) for v in row] + [Fraction(1 if i == j else 0) for j in range(d)]
        for i, row in enumerate(matrix)
    ]
    for col in range(d):
        pivot_row = next(i for i in range(col, d) if aug[i][col])
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for i in range(d):
            if i != col and aug[i][col]:
                factor = aug[i][col]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[col])]
    return [[aug[i][d + j] for j in range(d)] for i in range(d)]


def extreme_rays(
    rows: Sequence[Sequence],
    deadline: Optional[float] = None,
) -> List[Tuple[int, ...]]:
    """Extreme rays of the pointed cone {z : row . z >= 0 for all rows}.

    The rows must positively span (i.e. the cone must be pointed) and
    contain ``dim`` linearly independent members.  Returns coprime integer
    ray vectors in sorted order.  ``deadline`` is an absolute time.time()
    cap; exceeding it raises BudgetExceeded.
    """
    norm_rows = sorted(set(_normalize_int_vector(r) for r in rows))
    dim = len(norm_rows[0])
    base_idx = _independent_subset(norm_rows, dim)
    if len(base_idx) < dim:
        raise ValueError("constraint rows do not have full rank")

    # Initial simplicial cone from the base rows: ray i is column i of the
    # inverse of the base matrix, so base_j . ray_i = delta_ij >= 0.
    base = [norm_rows[i] for i in base_idx]
    inv = _invert(base)
    order = base_idx + [i for i in range(len(norm_rows)) if i not in set(base_idx)]

    rays: List[Tuple[int, ...]] = []
    masks: List[int] = []
    full_base_mask = (1 << dim) - 1
    for i in range(dim):
        vec = _normalize_int_vector([inv[r][i] for r in range(dim)])
        rays.append(vec)
        masks.append(full_base_mask ^ (1 << i))

    n_processed = dim
    for step in range(dim, len(order)):
        if deadline is not None and time.time() > deadline:
            raise BudgetExceeded("double description ran over its time budget")
        h = norm_rows[order[step]]
        values = [sum(hi * ri for hi, ri in zip(h, ray)) for ray in rays]
        pos = [i for i, v in enumerate(values) if v > 0]
        neg = [i for i, v in enumerate(values) if v < 0]
        zero = [i for i, v in enumerate(values) if v == 0]
        bit = 1 << n_processed
        if not neg:
            for i in zero:
                masks[i] |= bit
            n_processed += 1
            continue

        new_rays: List[Tuple[int, ...]] = []
        new_masks: List[int] = []
        min_common = dim - 2
        n_rays = len(rays)
        for ip in pos:
            mp = masks[ip]
            vp = values[ip]
            rp = rays[ip]
            for ineg in neg:
                common = mp & masks[ineg]
                if common.bit_count() < min_common:
                    continue
                # Combinatorial adjacency: no third ray's active set
                # contains the common active set.
                adjacent = True
                for k in range(n_rays):
                    if k != ip and k != ineg and masks[k] & common == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vn = values[ineg]
                rn = rays[ineg]
                vec = _normalize_int_vector(
                    [vp * b - vn * a for a, b in zip(rp, rn)]
                )
                new_rays.append(vec)
                new_masks.append((common | bit))

        keep_rays = [rays[i] for i in pos]
        keep_masks = [masks[i] for i in pos]
        for i in zero:
            keep_rays.append(rays[i])
            keep_masks.append(masks[i] | bit)
        rays = keep_rays + new_rays
        masks = keep_masks + new_masks
        n_processed += 1

    return sorted(rays)


def facets_of_polytope(
    vertices: Sequence[Sequence],
    deadline: Optional[float] = None,
) -> List[Tuple[Tuple[int, ...], int]]:
    """Facets (coeffs, rhs) with coeffs.x <= rhs of a full-dimensional
    polytope given by its vertices (exact rational coordinates)."""
    rows = [(1,) + tuple(v) for v in vertices]
    rays = extreme_rays(rows, deadline=deadline)
    facets = []
    for ray in rays:
        rhs, coeffs = ray[0], ray[1:]
        facets.append((tuple(-c for c in coeffs), rhs))
    return sorted(facets)
