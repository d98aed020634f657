"""Exact small-n simulation of the constructive formation protocol.

Given an ensemble {p_i, psi_i} realizing rho, the protocol keeps only the
strongly typical sequences of ensemble members, prepares each typical
product state by entanglement dilution (Schmidt-spectrum truncation against
a singlet budget), and mixes the diluted states.  At desk scale everything
is computed exactly, so the fidelity chain

    F(rho^(x)n, rho_T) >= sqrt(1 - eps1)
    F(rho_T, rho'_T)  >= (1 - eps2)^k = 1 - eps3
    D(rho^(x)n, rho'_T) <= 2 sqrt(1 - sqrt(1 - eps1)) + 2 sqrt(eps3)

is verifiable number by number rather than asymptotically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import fidelity_matrices
from .qcore import (
    Ensemble,
    PureState,
    QuantumState,
    StateValidationError,
    ensemble_average,
    pure_entanglement,
    pure_power,
    tensor_power,
    tensor_pure,
)

DIMENSION_CAP = 4096
ENUMERATION_CAP = 10_000_000
SPECTRUM_CAP = 1 << 22

WINDOW_KINDS = ("paper", "plain")


# ---------------------------------------------------------------------------
# Typical set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypicalSet:
    """Strongly typical index sequences with their product weights."""

    n: int
    delta1: float
    k: int
    window: str
    sequences: tuple               # ((s_0, ..., s_{n-1}), p_s)
    total_weight: float            # p_T
    entropy: float                 # H(p) in bits
    weight_bounds: tuple           # guaranteed (min, max) admitted weight
    count_windows: tuple           # integer (lo_i, hi_i) per ensemble index

    def to_json_obj(self):
        return {
            "n": self.n,
            "delta1": self.delta1,
            "k": self.k,
            "window": self.window,
            "num_sequences": len(self.sequences),
            "total_weight": self.total_weight,
            "entropy": self.entropy,
            "weight_bounds": list(self.weight_bounds),
            "count_windows": [list(w) for w in self.count_windows],
        }


def typical_count_windows(p, n, delta1, window="paper"):
    """Integer per-index count windows, rounded outward and clipped to [0, n].

    The default half-width is delta1 * n / (k |log2 p_i|), whose per-index
    contributions to log2 p_s sum to at most delta1 * n, so every admitted
    sequence weight obeys the two-sided 2^{-n(H +/- delta1)} bounds.  The
    plain window uses half-width delta1 * n instead.
    """
    p = np.asarray(p, dtype=float)
    k = p.size
    if window not in WINDOW_KINDS:
        raise ValueError(f"window must be one of {WINDOW_KINDS}, got {window!r}")
    windows = []
    for pi in p:
        if not 0.0 < pi < 1.0:
            raise StateValidationError(
                f"typicality needs every p_i in (0, 1); got {pi!r} "
                "(a unit weight means the state is pure: use the pure-state path)")
        if window == "paper":
            half = delta1 * n / (k * abs(np.log2(pi)))
        else:
            half = delta1 * n
        lo = max(0, math.floor(pi * n - half))
        hi = min(n, math.ceil(pi * n + half))
        windows.append((lo, hi))
    return tuple(windows)


def typical_set(p, n, delta1, window="paper") -> TypicalSet:
    """Enumerate every length-n index sequence whose type fits the window."""
    p = np.asarray(p, dtype=float)
    if abs(p.sum() - 1.0) > 1e-9:
        raise StateValidationError("probabilities must sum to 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta1 <= 0:
        raise ValueError("delta1 must be positive")
    k = p.size
    if k ** n > ENUMERATION_CAP:
        raise ValueError(f"{k}^{n} sequences exceed the enumeration cap")
    windows = typical_count_windows(p, n, delta1, window)
    entropy = float(-(p * np.log2(p)).sum())

    sequences = []
    total = 0.0
    for seq in itertools.product(range(k), repeat=n):
        counts = [0] * k
        for idx in seq:
            counts[idx] += 1
        if all(lo <= c <= hi for c, (lo, hi) in zip(counts, windows)):
            ps = float(np.prod(p[list(seq)]))
            sequences.append((seq, ps))
            total += ps
    # two-sided weight bounds implied by the integer windows themselves; with
    # exact (unrounded) windows these equal 2^{-n(H +/- delta1)}, and the
    # outward rounding can only widen them
    logs = np.abs(np.log2(p))
    bounds = (2.0 ** (-float(sum(hi * g for (_, hi), g in zip(windows, logs)))),
              min(1.0, 2.0 ** (-float(sum(lo * g for (lo, _), g
                                          in zip(windows, logs))))))
    return TypicalSet(n, float(delta1), k, window, tuple(sequences),
                      float(total), entropy, bounds, windows)


def truncated_state(ensemble: Ensemble, tset: TypicalSet, normalize=False):
    """rho_T = sum_{s in T} p_s |psi_s><psi_s| as a raw matrix.

    Subnormalized with trace p_T by default; unit trace when `normalize`.
    """
    if tset.k != len(ensemble):
        raise StateValidationError("typical set was not generated from this ensemble")
    d = ensemble.states[0].dim ** tset.n
    if d > DIMENSION_CAP:
        raise ValueError(f"total dimension {d} exceeds the cap {DIMENSION_CAP}")
    acc = np.zeros((d, d), dtype=complex)
    for seq, ps in tset.sequences:
        vec = _sequence_vector(ensemble, seq)
        acc += ps * np.outer(vec, vec.conj())
    if normalize:
        acc = acc / np.trace(acc).real
    return acc


def _sequence_vector(ensemble, seq):
    out = ensemble.states[seq[0]]
    for idx in seq[1:]:
        out = tensor_pure(out, ensemble.states[idx])
    return out.vector


# ---------------------------------------------------------------------------
# Entanglement dilution by Schmidt truncation
# ---------------------------------------------------------------------------

def _power_spectrum(mu, count):
    """Sorted (desc) Schmidt weights of psi^(x)count from per-copy weights."""
    acc = np.array([1.0])
    for _ in range(count):
        acc = np.outer(acc, mu).ravel()
        if acc.size > SPECTRUM_CAP:
            raise ValueError("Schmidt spectrum too large to enumerate")
    return np.sort(acc)[::-1]


def _schmidt_weights(psi: PureState):
    sv = np.linalg.svd(psi.vector.reshape(psi.dims), compute_uv=False)
    return sv * sv


def dilution_fidelity(psi: PureState, count: int, singlet_budget: int) -> float:
    """Square-root fidelity of diluting psi^(x)count from `singlet_budget` singlets.

    The dilution keeps the 2^budget largest Schmidt weights of the tensor
    power, so the achieved fidelity is the square root of the retained weight.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if singlet_budget < 0:
        raise ValueError("singlet budget must be >= 0")
    mu = _power_spectrum(_schmidt_weights(psi), count)
    keep = min(int(min(2.0 ** singlet_budget, mu.size)), mu.size)
    return float(np.sqrt(min(1.0, mu[:keep].sum())))


def dilute_pure_state(psi: PureState, count: int, singlet_budget: int):
    """Schmidt-truncated approximation of psi^(x)count, with its fidelity.

    Returns (approximation, fidelity) where the approximation lives on
    (dA^count, dB^count) and the fidelity equals the square root of the
    retained Schmidt weight; it is 1 whenever 2^budget covers the rank.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if singlet_budget < 0:
        raise ValueError("singlet budget must be >= 0")
    if psi.dim ** count > DIMENSION_CAP:
        raise ValueError("total dimension exceeds the cap")
    phi = pure_power(psi, count)
    dA = psi.dims[0] ** count
    dB = psi.dims[1] ** count
    u, s, vh = np.linalg.svd(phi.vector.reshape(dA, dB))
    keep = min(int(min(2.0 ** singlet_budget, s.size)), s.size)
    retained = float((s[:keep] ** 2).sum())
    trunc = (u[:, :keep] * s[:keep]) @ vh[:keep]
    vec = trunc.reshape(dA * dB) / np.sqrt(retained)
    return PureState((dA, dB), vec), float(np.sqrt(min(1.0, retained)))


# ---------------------------------------------------------------------------
# Dilution plan and full protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanEntry:
    index: int
    count: int              # worst-case typical multiplicity
    entanglement: float     # per-copy E(psi_i) in ebits
    delta2: float
    singlets: int           # ceil(count * (E + delta2)); 0 for unentangled states


@dataclass(frozen=True)
class DilutionPlan:
    entries: tuple
    total_singlets: int
    delta1: float
    delta2: float

    def to_json_obj(self):
        return {
            "entries": [{"index": e.index, "count": e.count,
                         "entanglement": e.entanglement,
                         "delta2": e.delta2, "singlets": e.singlets}
                        for e in self.entries],
            "total_singlets": self.total_singlets,
            "delta1": self.delta1,
            "delta2": self.delta2,
        }


def dilution_plan(ensemble: Ensemble, tset: TypicalSet, delta2: float) -> DilutionPlan:
    """Singlet budget per ensemble member, charged at the worst typical count."""
    entries = []
    for i, psi in enumerate(ensemble.states):
        count = tset.count_windows[i][1]
        ent = pure_entanglement(psi)
        if ent < 1e-12:
            singlets = 0    # unentangled members cost nothing to prepare
        else:
            singlets = math.ceil(count * (ent + delta2))
        entries.append(PlanEntry(i, count, ent, float(delta2), singlets))
    total = sum(e.singlets for e in entries)
    return DilutionPlan(tuple(entries), total, tset.delta1, float(delta2))


@dataclass(frozen=True)
class FormationArtifacts:
    """Exact-mode matrices kept for bound verification (not serialized)."""

    rho_n: np.ndarray
    rho_t_sub: np.ndarray
    rho_t_unit: np.ndarray
    rho_approx_unit: np.ndarray
    overlaps: tuple      # |<psi_s|psi'_s>| per typical sequence


@dataclass(frozen=True)
class FormationResult:
    n: int
    m: int
    rate: float
    mean_entanglement: float    # sum_i p_i E_i of the input ensemble
    slack: float                # rate - mean_entanglement (the delta1/delta2 cost)
    eps1: float                 # 1 - p_T
    eps2: float                 # worst per-block dilution infidelity
    eps3: float                 # 1 - (1 - eps2)^k
    bures_bound: float          # 2 sqrt(1 - sqrt(1 - eps1)) + 2 sqrt(eps3)
    exact_mode: bool
    exact_bures: float | None
    fid1_fidelity: float | None          # F(rho^(x)n, rho_T), selected variant
    fid1_fidelity_sub: float | None      # same against the subnormalized rho_T
    fid1_holds: bool | None
    fid2_fidelity: float | None          # F(rho_T, rho'_T), unit-trace variants
    fid2_holds: bool | None
    normalization: str
    plan: DilutionPlan
    typical: TypicalSet
    artifacts: FormationArtifacts | None = field(repr=False, default=None)

    def to_json_obj(self):
        return {
            "n": self.n,
            "m": self.m,
            "rate": self.rate,
            "mean_entanglement": self.mean_entanglement,
            "slack": self.slack,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "eps3": self.eps3,
            "bures_bound": self.bures_bound,
            "exact_mode": self.exact_mode,
            "exact_bures": self.exact_bures,
            "fid1_fidelity": self.fid1_fidelity,
            "fid1_fidelity_sub": self.fid1_fidelity_sub,
            "fid1_holds": self.fid1_holds,
            "fid2_fidelity": self.fid2_fidelity,
            "fid2_holds": self.fid2_holds,
            "normalization": self.normalization,
            "plan": self.plan.to_json_obj(),
            "typical_set": self.typical.to_json_obj(),
        }


def _permute_slots(vec, single_dims, order):
    """Reorder the per-copy slots of a vector on (dA^n, dB^n).

    Slot j of the input corresponds to sequence position order[j]; the output
    has slots in sequence order, A axes first then B axes.
    """
    dA, dB = single_dims
    n = len(order)
    t = vec.reshape((dA,) * n + (dB,) * n)
    inv = np.argsort(np.asarray(order))
    axes = list(inv) + [n + int(i) for i in inv]
    return t.transpose(axes).reshape(-1)


def formation_protocol(rho: QuantumState, ensemble: Ensemble, n: int,
                       delta1: float, delta2: float, *, window="paper",
                       normalization="unit") -> FormationResult:
    """Run the typical-set formation protocol for rho^(x)n and account its cost.

    Exact matrices (and therefore the exact Bures distance and the fidelity
    bounds fid1/fid2) are produced whenever (dA dB)^n <= 4096; above the cap
    only the analytic bounds from p_T and the dilution fidelities are emitted.
    """
    if normalization not in ("unit", "sub"):
        raise ValueError("normalization must be 'unit' or 'sub'")
    avg = ensemble_average(ensemble)
    if avg.dims != rho.dims or np.abs(avg.matrix - rho.matrix).max() > 1e-7:
        raise StateValidationError("ensemble does not realize the given state")

    if len(ensemble) == 1:
        # pure state: no typical-set truncation, the protocol is pure dilution
        tset = TypicalSet(n, float(delta1), 1, window,
                          (((0,) * n, 1.0),), 1.0, 0.0, (1.0, 1.0), ((n, n),))
    else:
        tset = typical_set(ensemble.weights, n, delta1, window)
    plan = dilution_plan(ensemble, tset, delta2)
    k = len(ensemble)
    eps1 = max(0.0, 1.0 - tset.total_weight)

    # per-block dilution fidelities, shared across sequences of the same type
    fid_cache = {}

    def block_fidelity(i, count):
        key = (i, count)
        if key not in fid_cache:
            fid_cache[key] = dilution_fidelity(
                ensemble.states[i], count, plan.entries[i].singlets)
        return fid_cache[key]

    eps2 = 0.0
    overlaps = []
    for seq, _ in tset.sequences:
        counts = [0] * k
        for idx in seq:
            counts[idx] += 1
        o = 1.0
        for i, c in enumerate(counts):
            if c == 0:
                continue
            f = block_fidelity(i, c)
            eps2 = max(eps2, 1.0 - f)
            o *= f
        overlaps.append(o)
    eps3 = 1.0 - (1.0 - eps2) ** k
    bound = 2.0 * np.sqrt(max(0.0, 1.0 - np.sqrt(max(0.0, 1.0 - eps1)))) \
        + 2.0 * np.sqrt(eps3)

    m = plan.total_singlets
    rate = m / n
    mean_ent = float(np.dot(ensemble.weights,
                            [e.entanglement for e in plan.entries]))
    slack = rate - mean_ent

    exact = rho.dim ** n <= DIMENSION_CAP
    artifacts = None
    exact_bures = fid1 = fid1_sub = fid2 = None
    fid1_holds = fid2_holds = None
    if exact:
        rho_n = tensor_power(rho, n).matrix
        rho_t_sub = truncated_state(ensemble, tset, normalize=False)
        p_t = np.trace(rho_t_sub).real
        rho_t_unit = rho_t_sub / p_t

        dil_cache = {}

        def diluted_block(i, count):
            key = (i, count)
            if key not in dil_cache:
                dil_cache[key] = dilute_pure_state(
                    ensemble.states[i], count, plan.entries[i].singlets)[0]
            return dil_cache[key]

        d = rho.dim ** n
        acc = np.zeros((d, d), dtype=complex)
        for seq, ps in tset.sequences:
            positions = {}
            for pos, idx in enumerate(seq):
                positions.setdefault(idx, []).append(pos)
            block_vec = None
            order = []
            for i in sorted(positions):
                order.extend(positions[i])
                blk = diluted_block(i, len(positions[i]))
                block_vec = blk if block_vec is None else tensor_pure(block_vec, blk)
            vec = _permute_slots(block_vec.vector, rho.dims, order)
            acc += ps * np.outer(vec, vec.conj())
        rho_approx_unit = acc / np.trace(acc).real

        fid1 = fidelity_matrices(rho_n, rho_t_unit)
        fid1_sub = fidelity_matrices(rho_n, rho_t_sub)
        fid2 = fidelity_matrices(rho_t_unit, rho_approx_unit)
        exact_bures = 2.0 * np.sqrt(max(0.0, 1.0 - fidelity_matrices(
            rho_n, rho_approx_unit)))
        selected = fid1 if normalization == "unit" else fid1_sub
        fid1_holds = bool(selected >= np.sqrt(1.0 - eps1) - 1e-9)
        fid2_holds = bool(fid2 >= (1.0 - eps3) - 1e-9)
        artifacts = FormationArtifacts(rho_n, rho_t_sub, rho_t_unit,
                                       rho_approx_unit, tuple(overlaps))

    return FormationResult(
        n=n, m=m, rate=float(rate), mean_entanglement=mean_ent,
        slack=float(slack), eps1=float(eps1), eps2=float(eps2),
        eps3=float(eps3), bures_bound=float(bound), exact_mode=bool(exact),
        exact_bures=None if exact_bures is None else float(exact_bures),
        fid1_fidelity=None if fid1 is None else float(
            fid1 if normalization == "unit" else fid1_sub),
        fid1_fidelity_sub=None if fid1_sub is None else float(fid1_sub),
        fid1_holds=fid1_holds, fid2_fidelity=None if fid2 is None else float(fid2),
        fid2_holds=fid2_holds, normalization=normalization,
        plan=plan, typical=tset, artifacts=artifacts)


def verify_fid_bounds(result: FormationResult) -> dict:
    """Re-check the fidelity chain on the exact-mode artifacts.

    Asserts F(rho^(x)n, rho_T) >= sqrt(1 - eps1), the aggregate per-sequence
    overlap against 1 - eps3, and the Bures triangle inequality through rho_T.
    """
    art = result.artifacts
    if art is None:
        raise ValueError("exact-mode artifacts are required")
    p_t = 1.0 - result.eps1
    fid1 = fidelity_matrices(art.rho_n, art.rho_t_unit)
    fid1_ok = fid1 >= np.sqrt(max(0.0, 1.0 - result.eps1)) - 1e-9

    weights = np.array([ps for _, ps in result.typical.sequences])
    aggregate = float(np.dot(weights / p_t, art.overlaps))
    fid2_ok = aggregate >= (1.0 - result.eps3) - 1e-9

    d_left = 2.0 * np.sqrt(max(0.0, 1.0 - fidelity_matrices(
        art.rho_n, art.rho_approx_unit)))
    d_a = 2.0 * np.sqrt(max(0.0, 1.0 - fid1))
    d_b = 2.0 * np.sqrt(max(0.0, 1.0 - fidelity_matrices(
        art.rho_t_unit, art.rho_approx_unit)))
    triangle_ok = d_left <= d_a + d_b + 1e-8

    return {
        "fid1_fidelity": float(fid1),
        "fid1_holds": bool(fid1_ok),
        "overlap_aggregate": aggregate,
        "fid2_holds": bool(fid2_ok),
        "bures_left": float(d_left),
        "bures_via_truncation": float(d_a + d_b),
        "triangle_holds": bool(triangle_ok),
        "all_hold": bool(fid1_ok and fid2_ok and triangle_ok),
    }
