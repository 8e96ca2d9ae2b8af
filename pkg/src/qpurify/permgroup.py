"""Register permutations, the groups the gadgets average over, and the
hardware cost bookkeeping.

A permutation sigma on M registers is stored in image form, 1-based: the
register at position k is sent to position sigma(k).  Its matrix acts on
basis strings as  P |i_1 ... i_M> = |j_1 ... j_M>  with  j_{sigma(k)} = i_k,
register 1 being the leftmost (most significant) factor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .densmat import dense_cap, DENSE_CAP_ENV

SYMMETRIC = "SYMMETRIC"
CYCLIC = "CYCLIC"
PARALLEL_SWAP = "PARALLEL_SWAP"
DERANGEMENT_PAIR = "DERANGEMENT_PAIR"
GROUP_LABELS = (SYMMETRIC, CYCLIC, PARALLEL_SWAP, DERANGEMENT_PAIR)

GADGET_COSTED = ("SGG", "RSG_single", "RSG_M_outputs", "ESD", "CGG", "GSG")


@dataclass(frozen=True)
class Permutation:
    """1-based image form: position k maps to image[k-1]."""

    image: tuple

    def __post_init__(self):
        img = tuple(int(v) for v in self.image)
        object.__setattr__(self, "image", img)
        if sorted(img) != list(range(1, len(img) + 1)):
            raise ValueError(f"not a permutation of 1..{len(img)}: {img}")

    @property
    def size(self) -> int:
        return len(self.image)

    def __call__(self, k: int) -> int:
        return self.image[k - 1]


def identity_perm(m: int) -> Permutation:
    return Permutation(tuple(range(1, m + 1)))


def compose(a: Permutation, b: Permutation) -> Permutation:
    """a after b: (a . b)(k) = a(b(k)).  Matches matrix order
    permutation_matrix(a) @ permutation_matrix(b)."""
    if a.size != b.size:
        raise ValueError("size mismatch")
    return Permutation(tuple(a(b(k)) for k in range(1, a.size + 1)))


def inverse(p: Permutation) -> Permutation:
    img = [0] * p.size
    for k in range(1, p.size + 1):
        img[p(k) - 1] = k
    return Permutation(tuple(img))


@dataclass(frozen=True)
class PermutationGroup:
    """A finite set of register permutations used as an averaging set.

    For SYMMETRIC, CYCLIC and PARALLEL_SWAP this is a genuine subgroup of
    S_M.  DERANGEMENT_PAIR is the two-element set {identity, full cyclic
    shift}; for M > 2 it is not closed under composition and its element
    average is not idempotent, which the gadget layer handles by always
    conjugating with the average rather than assuming projector algebra.
    """

    label: str
    copies: int
    elements: tuple

    @property
    def size(self) -> int:
        return len(self.elements)


def cyclic_shift(m: int, i: int) -> Permutation:
    """Position k goes to k + i, wrapping mod m."""
    return Permutation(tuple((k - 1 + i) % m + 1 for k in range(1, m + 1)))


def parallel_swap_mask(m: int, mask: int) -> Permutation:
    """Register at 0-based position j goes to position j XOR mask."""
    return Permutation(tuple((j ^ mask) + 1 for j in range(m)))


def parallel_swap_layer(m: int, k: int) -> Permutation:
    """The k-th generating layer (k = 1..log2 M): every register is swapped
    with its partner differing in bit k-1 of the position index."""
    return parallel_swap_mask(m, 1 << (k - 1))


def build_group(label: str, m: int) -> PermutationGroup:
    """Construct the averaging set for `label` on m registers.

    SYMMETRIC: all m! permutations.
    CYCLIC: the m shifts k -> k + i mod m.
    PARALLEL_SWAP: the group generated by the pairwise-swap layers; for
        m = 2**n this equals the XOR-mask group {j -> j ^ t : 0 <= t < m},
        and m must be a power of two.
    DERANGEMENT_PAIR: {identity, shift-by-one}; see PermutationGroup notes.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if label == SYMMETRIC:
        elems = tuple(Permutation(p) for p in itertools.permutations(range(1, m + 1)))
    elif label == CYCLIC:
        elems = tuple(cyclic_shift(m, i) for i in range(m))
    elif label == PARALLEL_SWAP:
        if m & (m - 1):
            raise ValueError(f"PARALLEL_SWAP needs a power-of-two register count, got {m}")
        elems = tuple(parallel_swap_mask(m, t) for t in range(m))
    elif label == DERANGEMENT_PAIR:
        if m < 2:
            raise ValueError(f"DERANGEMENT_PAIR needs m >= 2, got {m}")
        elems = (identity_perm(m), cyclic_shift(m, 1))
    else:
        raise ValueError(f"unknown group label {label!r}")
    return PermutationGroup(label=label, copies=m, elements=elems)


def index_map(perm: Permutation, d: int) -> np.ndarray:
    """Source-index array of the permutation matrix on (C^d)^(x)M.

    Returns src with (P A)[r, :] = A[src[r], :]; row r of P has its single 1
    in column src[r].  Digit k of src[r] (1-based, most significant first)
    equals digit perm(k) of r.
    """
    m = perm.size
    dim = d**m
    idx = np.arange(dim)
    # digits[k] holds the (k+1)-th most significant base-d digit of each index
    digits = np.empty((m, dim), dtype=np.int64)
    rem = idx
    for k in range(m - 1, -1, -1):
        digits[k] = rem % d
        rem = rem // d
    src = np.zeros(dim, dtype=np.int64)
    for k in range(m):
        src = src * d + digits[perm(k + 1) - 1]
    return src


def permutation_matrix(perm: Permutation, d: int) -> np.ndarray:
    """Dense matrix of `perm` on (C^d)^(x)M, register 1 leftmost."""
    dim = d**perm.size
    cap = dense_cap()
    if dim > cap:
        raise ValueError(
            f"dense dimension {d}**{perm.size} = {dim} exceeds cap {cap}"
            f" (raise {DENSE_CAP_ENV} to override)"
        )
    src = index_map(perm, d)
    mat = np.zeros((dim, dim))
    mat[np.arange(dim), src] = 1.0
    return mat


@lru_cache(maxsize=32)
def _cached_average(label: str, m: int, d: int) -> np.ndarray:
    group = build_group(label, m)
    dim = d**m
    rows = np.arange(dim)
    avg = np.zeros((dim, dim))
    for g in group.elements:
        avg[rows, index_map(g, d)] += 1.0
    avg /= group.size
    avg.setflags(write=False)
    return avg


def group_projector(group: PermutationGroup, d: int) -> np.ndarray:
    """Average of the element matrices, (1/|G|) sum_g P_g.

    For a genuine group this is the orthogonal projector onto the invariant
    subspace (idempotent, Hermitian).  For DERANGEMENT_PAIR it is merely the
    Hermitian average.
    """
    dim = d**group.copies
    cap = dense_cap()
    if dim > cap:
        raise ValueError(
            f"dense dimension {d}**{group.copies} = {dim} exceeds cap {cap}"
            f" (raise {DENSE_CAP_ENV} to override)"
        )
    return _cached_average(group.label, group.copies, d)


def orbit_basis(group: PermutationGroup, d: int) -> np.ndarray:
    """Orthonormal basis B of the group-invariant subspace, as columns.

    Each basis vector is the normalised indicator of one orbit of index
    strings under the group action, so B @ B.T equals group_projector
    exactly.  Only meaningful for genuine groups (not DERANGEMENT_PAIR).
    """
    if group.label == DERANGEMENT_PAIR and group.copies > 2:
        raise ValueError("orbit basis requires a closed group")
    dim = d**group.copies
    maps = [index_map(g, d) for g in group.elements]
    seen = np.zeros(dim, dtype=bool)
    cols = []
    for r in range(dim):
        if seen[r]:
            continue
        orbit = np.unique([mp[r] for mp in maps])
        seen[orbit] = True
        vec = np.zeros(dim)
        vec[orbit] = 1.0 / math.sqrt(len(orbit))
        cols.append(vec)
    return np.stack(cols, axis=1)


def ceil_log2(n: int) -> int:
    """ceil(log2 n) for positive integers, exact (no float intermediates)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class CostReport:
    """Hardware bookkeeping for one gadget instance.

    cswap_count is controlled-SWAP applications between data registers;
    extra_gate_count is the superposition-preparation work reported as a
    separate term (only SGG has one that scales, quadratic in its ancilla
    count), so the two contributions are never conflated.
    """

    gadget: str
    copies: int
    ancilla_qubits: int
    cswap_count: int
    output_count: int
    group_label: str
    extra_gate_count: int = 0


def cost_model(gadget: str, m: int) -> CostReport:
    """Ancilla / cSWAP / output counts for one purification gadget on m copies.

    Conventions: ancilla counts are qubits; a gadget indexing over a set of
    size s needs ceil(log2 s) of them.  RSG rows count the whole binary
    cascade.  GSG and both RSG variants require m to be a power of two.
    """
    if gadget not in GADGET_COSTED:
        raise ValueError(f"unknown gadget {gadget!r}; expected one of {GADGET_COSTED}")
    if m < 2:
        raise ValueError(f"cost model needs m >= 2, got {m}")
    pow2 = m & (m - 1) == 0
    if gadget in ("GSG", "RSG_single", "RSG_M_outputs") and not pow2:
        raise ValueError(f"{gadget} needs a power-of-two copy count, got {m}")

    if gadget == "SGG":
        anc = ceil_log2(math.factorial(m))
        return CostReport(gadget, m, anc, (m - 1) * anc, m, "S_M", extra_gate_count=anc * anc)
    if gadget == "CGG":
        anc = ceil_log2(m)
        return CostReport(gadget, m, anc, (m - 1) * anc, m, "C_M")
    if gadget == "GSG":
        n = ceil_log2(m)
        return CostReport(gadget, m, n, (m // 2) * n, m, "(Z/2Z)^n")
    if gadget == "ESD":
        return CostReport(gadget, m, 1, m - 1, m, "{I,D_M}")
    if gadget == "RSG_single":
        return CostReport(gadget, m, m - 1, m - 1, 2, "-")
    # RSG_M_outputs: every cascade level runs m/2 pairwise tests in parallel
    n = ceil_log2(m)
    return CostReport(gadget, m, m // 2, (m // 2) * n, m, "-")
