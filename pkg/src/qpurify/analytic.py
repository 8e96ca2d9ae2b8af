"""Closed-form purification rates and fidelity expansions.

Everything here is exact arithmetic on small objects: totient-weighted
matrix polynomials for the cyclic gadget, two-eigenvalue bookkeeping for
depolarised inputs, the d -> infinity limits, the optimal copy number, and
the combinatorial expansions of Tr[rho0 rho^m] for general stochastic noise.
No M-register tensor space is ever touched; the dense simulations in
`gadgets` exist precisely so these formulas have an independent oracle.

SGG has no closed depolarised rate here: averaging over all of S_M mixes
eigenvalue sectors in a way none of the shipped closed forms cover, so
depolarised_ptilde rejects it and SGG is checked against formulas only
through its M=2 coincidence with the other gadgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .densmat import DensityMatrix, check_hermitian, state_metrics, trace_moment
from .gadgets import GadgetOutcome

INFINITE = float("inf")

PARTITION = "PARTITION"
PURE_SIGMA = "PURE_SIGMA"
COMMUTING = "COMMUTING"
DENSE = "DENSE"
TRACE_MODES = (PARTITION, PURE_SIGMA, COMMUTING, DENSE)


def euler_totient(m: int) -> int:
    if m < 1:
        raise ValueError(f"totient needs m >= 1, got {m}")
    return sum(1 for k in range(1, m + 1) if math.gcd(k, m) == 1)


def _divisors(m: int) -> list:
    return [k for k in range(1, m + 1) if m % k == 0]


def cgg_weights(m: int) -> dict:
    """Divisor -> totient weight map of the cyclic-average closed form.

    The weights sum to m (Gauss's divisor-sum identity), which is what makes
    the closed form trace-consistent.
    """
    return {k: euler_totient(k) for k in _divisors(m)}


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    return all(m % k for k in range(2, int(math.isqrt(m)) + 1))


@dataclass(frozen=True)
class DepolarisedSpec:
    """Depolarised input rho = (1-p) rho0 + p I/d.

    d is an integer >= 2 or INFINITE; the spectrum is (beta, gamma x (d-1))
    with beta = 1 - (1 - 1/d) p and gamma = p/d, so 0 <= gamma < beta <= 1
    throughout the valid range.
    """

    p: float
    d: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"p must lie in [0, 1), got {self.p}")
        if self.d != INFINITE and (self.d < 2 or int(self.d) != self.d):
            raise ValueError(f"d must be an integer >= 2 or INFINITE, got {self.d}")

    @property
    def infinite(self) -> bool:
        return self.d == INFINITE

    @property
    def beta(self) -> float:
        if self.infinite:
            return 1.0 - self.p
        return 1.0 - (1.0 - 1.0 / self.d) * self.p

    @property
    def gamma(self) -> float:
        return 0.0 if self.infinite else self.p / self.d


def depolarised_moment(spec: DepolarisedSpec, m: int) -> float:
    """Tr[rho**m] of a depolarised state: beta**m + (d-1) gamma**m.

    The m=1 case is exactly 1 for every d including the infinite limit,
    where the (d-1) gamma term survives as p.
    """
    if m == 1:
        return 1.0
    if spec.infinite:
        return spec.beta**m
    return spec.beta**m + (spec.d - 1) * spec.gamma**m


def closed_form_outcome(kind: str, rho: DensityMatrix, m: int) -> GadgetOutcome:
    """Matrix-polynomial closed form of the CGG / GSG / ESD output.

    Evaluated with d x d matrix powers only; agrees with the dense gadget
    wherever the latter fits under the cap.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    mat = rho.matrix
    if kind == "CGG":
        num = np.zeros_like(mat)
        accept = 0.0
        power = np.eye(rho.dim, dtype=complex)
        moments = {}
        for k in range(1, m + 1):
            power = power @ mat
            moments[k] = float(np.trace(power).real)
            if m % k == 0:
                weight = euler_totient(k) * moments[k] ** (m // k - 1)
                num = num + weight * power
                accept += weight * moments[k]
        num /= m
        accept /= m
    elif kind == "GSG":
        if m & (m - 1):
            raise ValueError(f"GSG needs a power-of-two copy count, got {m}")
        t2 = trace_moment(rho, 2)
        num = mat / m + ((m - 1) / m) * t2 ** (m // 2 - 1) * (mat @ mat)
        accept = 1.0 / m + ((m - 1) / m) * t2 ** (m // 2)
    elif kind == "ESD":
        power = np.linalg.matrix_power(mat, m)
        num = 0.5 * (mat + power)
        accept = 0.5 * (1.0 + float(np.trace(power).real))
    else:
        raise ValueError(f"no closed form for kind {kind!r}")
    return GadgetOutcome(purified=DensityMatrix(num / accept), accept_prob=accept)


def _cgg_rate(spec: DepolarisedSpec, m: int) -> tuple:
    # p_tilde = p * sum_k phi(k) T_k^(M/k - 1) gamma^(k-1) / sum_k phi(k) T_k^(M/k)
    # with gamma^0 := 1 at k = 1 (covers the infinite limit, gamma = 0).
    num = 0.0
    den = 0.0
    for k, phi in cgg_weights(m).items():
        tk = depolarised_moment(spec, k)
        gk = 1.0 if k == 1 else spec.gamma ** (k - 1)
        num += phi * tk ** (m // k - 1) * gk
        den += phi * tk ** (m // k)
    return spec.p * num / den, den / m


def depolarised_ptilde(kind: str, spec: DepolarisedSpec, m: int) -> dict:
    """Output depolarising rate and acceptance of a gadget on i.i.d.
    depolarised inputs, in closed form.

    Supported kinds: CGG (any m), SWAP (m=2 alias of CGG), GSG (m = 2**n),
    ESD (any m), RSG (m = 2**n, the iterated pairwise map with the full
    cascade acceptance).  At INFINITE d the CGG and GSG rates coincide at
    p / (1 + (m-1)(1-p)**m).
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if kind == "SWAP":
        if m != 2:
            raise ValueError(f"SWAP is a two-copy gadget, got m={m}")
        kind = "CGG"
    if kind == "CGG":
        ptilde, accept = _cgg_rate(spec, m)
        return {"ptilde": ptilde, "accept_prob": accept}
    if kind == "GSG":
        if m & (m - 1):
            raise ValueError(f"GSG needs a power-of-two copy count, got {m}")
        t2 = depolarised_moment(spec, 2)
        half = t2 ** (m // 2 - 1) if m > 1 else 1.0
        den = 1.0 + (m - 1) * half * t2
        ptilde = spec.p * (1.0 + (m - 1) * half * spec.gamma) / den
        return {"ptilde": ptilde, "accept_prob": den / m}
    if kind == "ESD":
        tm = depolarised_moment(spec, m)
        gk = 1.0 if m == 1 else spec.gamma ** (m - 1)
        return {"ptilde": spec.p * (1.0 + gk) / (1.0 + tm), "accept_prob": 0.5 * (1.0 + tm)}
    if kind == "RSG":
        if m & (m - 1):
            raise ValueError(f"RSG needs a power-of-two copy count, got {m}")
        res = rsg_iterate(spec, m.bit_length() - 1)
        return {"ptilde": res["ptilde_sequence"][-1], "accept_prob": res["accept_prob"]}
    raise ValueError(f"no closed depolarised form for kind {kind!r}")


def rsg_iterate(spec: DepolarisedSpec, depth: int) -> dict:
    """Iterate the pairwise swap-test rate map `depth` times.

    Returns the rate sequence (length depth+1, starting at p), the cascade
    bound sequence p / (2**n (1-2p) + 2p) (meaningful for p < 1/2), and the
    acceptance of the whole binary tree: level l runs 2**(depth-l) pairwise
    tests, each accepting with (1 + Tr[rho_l**2]) / 2.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    rates = [spec.p]
    accept = 1.0
    current = spec
    for level in range(1, depth + 1):
        step = _cgg_rate(current, 2)
        accept *= step[1] ** (2 ** (depth - level))
        current = DepolarisedSpec(step[0], spec.d)
        rates.append(step[0])
    bounds = [spec.p / (2**n * (1.0 - 2.0 * spec.p) + 2.0 * spec.p) for n in range(depth + 1)]
    return {"ptilde_sequence": rates, "bound_sequence": bounds, "accept_prob": accept}


def ptilde_limit(p: float, m: float) -> float:
    """d -> infinity rate p / (1 + (m-1)(1-p)**m); valid for real m >= 1."""
    return p / (1.0 + (m - 1.0) * (1.0 - p) ** m)


def accept_limit(p: float, m: float) -> float:
    """d -> infinity acceptance (1 + (m-1)(1-p)**m) / m."""
    return (1.0 + (m - 1.0) * (1.0 - p) ** m) / m


def _ptilde_limit_slope(p: float, m: float) -> float:
    # d p_tilde / dM at d = infinity; vanishes exactly at M* = 1 - 1/ln(1-p).
    log1p = math.log1p(-p)
    den = 1.0 + (m - 1.0) * (1.0 - p) ** m
    return -p * (1.0 - p) ** m * (1.0 + (m - 1.0) * log1p) / den**2


@dataclass(frozen=True)
class OptimalPoint:
    p: float
    M_star: float
    ptilde_star: float
    ratio_lower: float
    ratio_upper: float


def optimal_point(p: float) -> OptimalPoint:
    """Rate-optimal real copy number at d = infinity.

    M* = 1 - 1/ln(1-p) and p~* = e ln(1-p) / (e ln(1-p) + p - 1) * p, with
    the sandwich e/(M*+e-1) < p~*/p < e**2/(M*+e**2-1).  Stationarity is
    certified numerically: the rate's M-derivative must change sign from
    negative to positive across M*.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    log1p = math.log1p(-p)
    m_star = 1.0 - 1.0 / log1p
    ptilde_star = math.e * log1p / (math.e * log1p + p - 1.0) * p
    h = 1e-6 * m_star
    if not (_ptilde_limit_slope(p, m_star - h) < 0.0 < _ptilde_limit_slope(p, m_star + h)):
        raise RuntimeError(f"stationarity certificate failed at p={p}, M*={m_star}")
    return OptimalPoint(
        p=p,
        M_star=m_star,
        ptilde_star=ptilde_star,
        ratio_lower=math.e / (m_star + math.e - 1.0),
        ratio_upper=math.e**2 / (m_star + math.e**2 - 1.0),
    )


def sampling_costs(p: float) -> dict:
    """Expected copies per purified output at the optimal point.

    The cyclic gadget consumes M* copies per attempt and accepts with
    probability A(M*), giving M*/A(M*); the swap-cascade bound is
    2p / (p~* (1-2p)**2).  Leading Laurent terms are e/p and 2/(e p).
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"the cascade bound needs p in (0, 1/2), got {p}")
    opt = optimal_point(p)
    cgg = opt.M_star / accept_limit(p, opt.M_star)
    rsg = 2.0 * p / (opt.ptilde_star * (1.0 - 2.0 * p) ** 2)
    return {"cgg_expected_copies": cgg, "rsg_expected_copies_bound": rsg}


@dataclass(frozen=True)
class FirstOrderPrediction:
    """First-order output metrics under per-copy stochastic perturbations.

    For valid perturbations Tr[rho0 sigma_bar] <= 0, so every prediction
    sits at or below 1; the baselines are the same quantities without the
    gadget's 1/M suppression.
    """

    fidelity_pred: float
    purity_pred: float
    sigma_bar: np.ndarray
    fidelity_baseline: float
    purity_baseline: float


def first_order_predictions(rho0: DensityMatrix, sigmas: list, m: int) -> FirstOrderPrediction:
    """Predicted fidelity 1 + (1/M) Tr[rho0 sigma_bar] and purity
    1 + (2/M) Tr[rho0 sigma_bar] after one group gadget, plus the unpurified
    baselines (the M=1 values)."""
    if len(sigmas) != m:
        raise ValueError(f"expected {m} perturbations, got {len(sigmas)}")
    mats = []
    for i, sig in enumerate(sigmas):
        arr = np.asarray(sig, dtype=complex)
        check_hermitian(arr)
        if abs(np.trace(arr)) > 1e-12:
            raise ValueError(f"perturbation {i} is not trace-free")
        mats.append(arr)
    sigma_bar = sum(mats) / m
    overlap = float(np.trace(rho0.matrix @ sigma_bar).real)
    return FirstOrderPrediction(
        fidelity_pred=1.0 + overlap / m,
        purity_pred=1.0 + 2.0 * overlap / m,
        sigma_bar=sigma_bar,
        fidelity_baseline=1.0 + overlap,
        purity_baseline=1.0 + 2.0 * overlap,
    )


@lru_cache(maxsize=64)
def _partitions(i: int) -> tuple:
    """All partitions of i as multiplicity tuples ((part, count), ...)."""
    out = []

    def rec(remaining, largest, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for part in range(min(remaining, largest), 0, -1):
            for count in range(remaining // part, 0, -1):
                rec(remaining - part * count, part - 1, acc + [(part, count)])

    rec(i, i, [])
    return tuple(out)


def _check_pure(rho0: DensityMatrix, name: str = "rho0"):
    if abs(trace_moment(rho0, 2) - 1.0) > 1e-10:
        raise ValueError(f"{name} must be pure (purity within 1e-10 of 1)")


def trace_rho0_rhom(mode: str, rho0: DensityMatrix, sigma: DensityMatrix, p: float, m: int) -> float:
    """Tr[rho0 ((1-p) rho0 + p sigma)**m] by one of four routes.

    DENSE multiplies matrices.  PARTITION expands the operator word sum:
    each word contributes prod_k F_k^{j_k} over its maximal sigma-run
    lengths (F_k = Tr[rho0 sigma**k]), counted by exact integer
    combinatorics: C(m-i+1, l) placements of l runs into the gaps between
    the m-i copies of rho0 times the multinomial l!/prod j_k!.  PURE_SIGMA
    collapses that to F_1 powers (sigma**2 = sigma), with run-composition
    count C(i-1, l-1).  COMMUTING reduces to the scalar (1 - p(1-F_1))**m.
    """
    if mode not in TRACE_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {TRACE_MODES}")
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if rho0.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho0.dim} vs {sigma.dim}")
    _check_pure(rho0)

    if mode == DENSE:
        mixed = (1.0 - p) * rho0.matrix + p * sigma.matrix
        return float(np.trace(rho0.matrix @ np.linalg.matrix_power(mixed, m)).real)

    if mode == COMMUTING:
        comm = rho0.matrix @ sigma.matrix - sigma.matrix @ rho0.matrix
        dev = float(np.max(np.abs(comm)))
        if dev > 1e-10:
            raise ValueError(f"rho0 and sigma do not commute: max deviation {dev:.3e}")
        f1 = float(np.trace(rho0.matrix @ sigma.matrix).real)
        return (1.0 - p * (1.0 - f1)) ** m

    if mode == PURE_SIGMA:
        if abs(trace_moment(sigma, 2) - 1.0) > 1e-10:
            raise ValueError("PURE_SIGMA needs a pure sigma")
        f1 = float(np.trace(rho0.matrix @ sigma.matrix).real)
        total = (1.0 - p) ** m
        for i in range(1, m + 1):
            runs = sum(
                math.comb(i - 1, l - 1) * math.comb(m - i + 1, l) * f1**l
                for l in range(1, min(i, m - i + 1) + 1)
            )
            total += (1.0 - p) ** (m - i) * p**i * runs
        return total

    # PARTITION: F_k up to k = m, then the exact word count.
    fks = {}
    power = sigma.matrix
    for k in range(1, m + 1):
        fks[k] = float(np.trace(rho0.matrix @ power).real)
        power = power @ sigma.matrix
    total = (1.0 - p) ** m
    for i in range(1, m + 1):
        coeff = 0.0
        for mult in _partitions(i):
            l = sum(c for _, c in mult)
            if l > m - i + 1:
                continue
            count = math.comb(m - i + 1, l) * math.factorial(l)
            weight = 1.0
            for part, c in mult:
                count //= math.factorial(c)
                weight *= fks[part] ** c
            coeff += count * weight
        total += (1.0 - p) ** (m - i) * p**i * coeff
    return total


def fidelity_general(rho0: DensityMatrix, sigma: DensityMatrix, p: float, m: int) -> float:
    """Exact output fidelity of the prime-copy cyclic gadget on
    (1-p) rho0 + p sigma inputs:
    (Tr[rho0 rho] + (m-1) Tr[rho0 rho**m]) / (1 + (m-1) Tr[rho**m]).

    The sigma = rho0 degeneracy (overlap 1) short-circuits to exactly 1.
    """
    if not is_prime(m):
        raise ValueError(f"the prime-copy closed form needs a prime m, got {m}")
    if rho0.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho0.dim} vs {sigma.dim}")
    _check_pure(rho0)
    if abs(float(np.trace(rho0.matrix @ sigma.matrix).real) - 1.0) <= 1e-12:
        return 1.0
    mixed = DensityMatrix((1.0 - p) * rho0.matrix + p * sigma.matrix)
    power = np.linalg.matrix_power(mixed.matrix, m)
    num = state_metrics(mixed, rho0)["fidelity"] + (m - 1) * float(
        np.trace(rho0.matrix @ power).real
    )
    return num / (1.0 + (m - 1) * float(np.trace(power).real))


def extract_ptilde(rho: DensityMatrix, rho0: DensityMatrix) -> float:
    """Read the depolarising rate off a (claimed) depolarised state:
    p = (1 - Tr[rho0 rho]) d / (d-1).

    Refuses states whose spectrum is not of the two-eigenvalue form
    (one leading value plus a (d-1)-fold degenerate floor, within 1e-8),
    since the extraction is meaningless elsewhere.
    """
    d = rho.dim
    if d < 2 or rho0.dim != d:
        raise ValueError("need matching dimensions with d >= 2")
    eigs = np.sort(np.linalg.eigvalsh(rho.matrix))
    spread = float(eigs[-2] - eigs[0]) if d > 2 else 0.0
    if spread > 1e-8:
        raise ValueError(f"not a depolarised-form state: floor spread {spread:.3e}")
    fid = state_metrics(rho, rho0)["fidelity"]
    return (1.0 - fid) * d / (d - 1.0)
