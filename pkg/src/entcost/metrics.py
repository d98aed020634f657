"""Distance and fidelity functions on density matrices.

Conventions: F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the
square-root (Uhlmann) fidelity, the Bures distance is D = 2 sqrt(1 - F) and
the trace distance is d = Tr|rho - sigma| / 2.  With those normalizations
the two metrics are sandwiched as 1 - F <= d <= sqrt(1 - F^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .qcore import DimensionError, QuantumState, tensor_matrix

CHAIN_TOL = 1e-9


def _matrices(rho, sigma):
    a = rho.matrix if isinstance(rho, QuantumState) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, QuantumState) else np.asarray(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if isinstance(rho, QuantumState) and isinstance(sigma, QuantumState):
        if rho.dims != sigma.dims:
            raise DimensionError(f"dims mismatch: {rho.dims} vs {sigma.dims}")
    return a, b


def sqrtm_psd(matrix) -> np.ndarray:
    """Hermitian square root with eigenvalues clipped at zero."""
    evals, evecs = np.linalg.eigh(matrix)
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T


def fidelity_matrices(a, b) -> float:
    """Uhlmann fidelity of two PSD matrices (unit trace not required).

    Computed as the trace norm of B^dag A for factorizations a = A A^dag,
    b = B B^dag, whose singular values are the square roots of the eigenvalues
    of sqrt(a) b sqrt(a).  Unlike the direct eigendecomposition of that
    product, this never takes square roots of eigenvalue-level noise, so
    rank-deficient inputs come out accurate to machine precision.
    """
    ea, va = np.linalg.eigh(a)
    eb, vb = np.linalg.eigh(b)
    fa = va * np.sqrt(np.clip(ea, 0.0, None))
    fb = vb * np.sqrt(np.clip(eb, 0.0, None))
    return float(np.linalg.svd(fb.conj().T @ fa, compute_uv=False).sum())


def uhlmann_fidelity(rho, sigma) -> float:
    """F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho)), clamped to [0, 1]."""
    a, b = _matrices(rho, sigma)
    f = fidelity_matrices(a, b)
    if f > 1.0 + 1e-7:
        warnings.warn(f"fidelity {f!r} exceeds 1 beyond numerical noise",
                      stacklevel=2)
    return float(min(max(f, 0.0), 1.0))


def bures_distance(rho, sigma) -> float:
    """D(rho, sigma) = 2 sqrt(1 - F(rho, sigma))."""
    return 2.0 * np.sqrt(max(0.0, 1.0 - uhlmann_fidelity(rho, sigma)))


def trace_distance(rho, sigma) -> float:
    """d(rho, sigma) = Tr|rho - sigma| / 2."""
    a, b = _matrices(rho, sigma)
    evals = np.linalg.eigvalsh(a - b)
    return float(np.abs(evals).sum() / 2.0)


@dataclass(frozen=True)
class DistanceReport:
    """Fidelity plus both distances, with the metric-equivalence chain."""

    fidelity: float
    bures: float
    trace: float
    chain_lower: float   # 1 - F
    chain_upper: float   # sqrt(1 - F^2)
    chain_holds: bool

    def to_json_obj(self):
        return {
            "fidelity": self.fidelity,
            "bures": self.bures,
            "trace": self.trace,
            "chain_lower": self.chain_lower,
            "chain_upper": self.chain_upper,
            "chain_holds": self.chain_holds,
        }


def metric_relation_check(rho, sigma) -> DistanceReport:
    """Check 1 - F <= d <= sqrt(1 - F^2) alongside all three quantities."""
    f = uhlmann_fidelity(rho, sigma)
    d = trace_distance(rho, sigma)
    lower = 1.0 - f
    upper = float(np.sqrt(max(0.0, 1.0 - f * f)))
    holds = (lower - CHAIN_TOL) <= d <= (upper + CHAIN_TOL)
    return DistanceReport(
        fidelity=f,
        bures=2.0 * np.sqrt(max(0.0, 1.0 - f)),
        trace=d,
        chain_lower=lower,
        chain_upper=upper,
        chain_holds=bool(holds),
    )


def tensor_power_divergence(rho, sigma, k_max, *, dim_cap=4096, cross_check_tol=1e-8):
    """Per-copy fidelity raised to tensor powers: (k, F^k, 2 sqrt(1 - F^k)).

    Fidelity is multiplicative under tensor products, so F_k = F(rho, sigma)^k;
    the Bures distance 2 sqrt(1 - F_k) tends to 2 whenever F < 1.  For powers
    whose total dimension stays within `dim_cap`, F_k is cross-checked against
    the directly computed tensor-power fidelity.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    a, b = _matrices(rho, sigma)
    if isinstance(rho, QuantumState):
        dims = rho.dims
    else:
        raise TypeError("tensor_power_divergence requires QuantumState inputs")
    f1 = uhlmann_fidelity(rho, sigma)
    entries = []
    pa, pdims_a = a, dims
    pb, pdims_b = b, dims
    for k in range(1, k_max + 1):
        fk = f1 ** k
        dk = 2.0 * np.sqrt(max(0.0, 1.0 - fk))
        direct = None
        if k == 1:
            direct = f1
        elif pa is not None and (dims[0] * dims[1]) ** k <= dim_cap:
            pa, pdims_a = tensor_matrix(pa, pdims_a, a, dims)
            pb, pdims_b = tensor_matrix(pb, pdims_b, b, dims)
            direct = fidelity_matrices(pa, pb)
            if abs(direct - fk) > cross_check_tol:
                raise RuntimeError(
                    f"tensor-power fidelity at k={k} disagrees with F^k: "
                    f"{direct!r} vs {fk!r}")
        else:
            pa = None   # beyond the cap: analytic sequence only
        entries.append({"k": k, "fidelity": fk, "bures": dk,
                        "direct_fidelity": direct})
    return entries
