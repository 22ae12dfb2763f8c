"""Truncated Fock-space oracle for Gaussian relative entropies.

Two-mode states with CM ``[[a I, c Z], [c Z, b I]]`` are built exactly as a
two-mode squeezer ``exp(r (a^dag b^dag - a b))`` acting on a product of
thermal states. The squeezer conserves ``n1 - n2``, so the state is block
diagonal in that difference; each block is a one-dimensional chain whose
propagator is obtained with ``scipy.linalg.expm`` in a working space larger
than the requested cutoff, then cropped.

Memory: a two-mode matrix at cutoff ``D`` has ``D^2`` rows but only about
``2 D^3 / 3`` stored entries (sparse), so cutoff 60 is cheap. Dense
eigendecomposition is done per block.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.csgraph import connected_components

from .bounds import psi_bound
from .errors import DomainError, OracleConsistencyError, PhysicalityError, SupportError
from .simulation import two_mode_cm
from .symplectic import VACUUM_VARIANCE, phys_tol

log = logging.getLogger(__name__)

SELF_CHECK_TOL = 1e-6
HERMITIAN_TOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10
SUPPORT_FLOOR = 1e-13
# bits that rho2's numerically null directions may contribute before the result is untrusted
SUPPORT_BUDGET_BITS = 1e-7
ORACLE_AGREEMENT = 1e-4
ADAPTIVE_TOL = 1e-5
MAX_CUTOFF = 60
DEFAULT_CUTOFFS = (15, 25, 35)
# per-mode mean photon number above which convergence is expected to be slow
SLOW_PHOTONS = 5.0

_MIN_MARGIN = 40
_MAX_MARGIN = 400


@dataclass(frozen=True)
class FockDensityMatrix:
    """Truncated density matrix; ``matrix`` is a sparse real symmetric array.

    Rows are indexed by ``n`` (one mode) or ``n1 * cutoff + n2`` (two modes).
    The matrix is not renormalized: ``trace = 1 - truncation_deficit``.
    """

    matrix: sp.csr_array = field(repr=False)
    cutoff: int
    modes: int
    truncation_deficit: float
    cm: np.ndarray = field(default=None, repr=False)
    cm_residual: float = None

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.cutoff**self.modes,) * 2:
            raise DomainError(f"matrix shape {m.shape} does not match cutoff {self.cutoff} and {self.modes} mode(s)")
        asym = abs(m - m.T).max() if m.nnz else 0.0
        if asym > HERMITIAN_TOL:
            raise OracleConsistencyError(f"density matrix is not Hermitian (max asymmetry {asym:.3e})")

    @property
    def dim(self):
        return self.cutoff**self.modes

    @property
    def trace(self):
        return float(self.matrix.diagonal().sum())

    def toarray(self):
        return self.matrix.toarray()


def _thermal_populations(nbar, n):
    n = np.asarray(n)
    if nbar <= 0:
        return (n == 0).astype(float)
    # n̄^n / (n̄+1)^(n+1) in log space to survive large n
    return np.exp(n * math.log(nbar / (nbar + 1)) - math.log(nbar + 1))


def thermal_fock(nbar, cutoff):
    if nbar < 0:
        raise DomainError(f"nbar must be >= 0, got {nbar}")
    if cutoff < 2:
        raise DomainError(f"cutoff must be >= 2, got {cutoff}")
    p = _thermal_populations(nbar, np.arange(cutoff))
    deficit = 0.0 if nbar == 0 else (nbar / (nbar + 1)) ** cutoff
    return FockDensityMatrix(sp.diags_array(p, format="csr"), cutoff, 1, deficit)


def _symplectic_params(a, b, c):
    """Squeezing ``r`` and thermal eigenvalues ``(nu1, nu2)`` of the standard-form CM."""
    root = math.sqrt((a + b) ** 2 - 4 * c * c)
    nu1 = (root + (a - b)) / 2
    nu2 = (root - (a - b)) / 2
    r = 0.5 * math.atanh(2 * c / (a + b))
    return r, nu1, nu2


def _working_margin(r, nbars, cutoff):
    """Extra chain length so truncating the squeezer and the thermal inputs is negligible.

    Capped at ``4 * cutoff``: beyond that the error is dominated by the crop
    at ``cutoff`` itself.
    """
    rates = [math.tanh(abs(r))] + [n / (n + 1) for n in nbars if n > 0]
    rate = max(rates)
    if rate <= 0:
        return _MIN_MARGIN
    need = math.log(1e-17) / math.log(rate)
    cap = min(max(4 * cutoff, _MIN_MARGIN), _MAX_MARGIN)
    return int(min(max(need, _MIN_MARGIN), cap))


def _tms_blocks(r, nbar1, nbar2, cutoff):
    """Blocks ``d -> (n1, n2, rho_d)`` of the cropped state, for ``|d| < cutoff``."""
    margin = _working_margin(r, (nbar1, nbar2), cutoff)
    size = cutoff + margin
    blocks = {}
    for d in range(-(cutoff - 1), cutoff):
        length = size - abs(d)
        k = np.arange(length)
        n1 = k + max(d, 0)
        n2 = k + max(-d, 0)
        # a^dag b^dag maps chain site k to k + 1 with amplitude sqrt((n1+1)(n2+1))
        hop = np.sqrt((n1[:-1] + 1.0) * (n2[:-1] + 1.0))
        gen = np.diag(hop, -1) - np.diag(hop, 1)
        keep = cutoff - abs(d)
        prop = expm(r * gen)[:keep, :]
        weights = _thermal_populations(nbar1, n1) * _thermal_populations(nbar2, n2)
        rho = (prop * weights) @ prop.T
        blocks[d] = (n1[:keep], n2[:keep], 0.5 * (rho + rho.T))
    return blocks


def _assemble(blocks, cutoff):
    rows, cols, vals = [], [], []
    for n1, n2, rho in blocks.values():
        idx = n1 * cutoff + n2
        rows.append(np.repeat(idx, idx.size))
        cols.append(np.tile(idx, idx.size))
        vals.append(rho.ravel())
    dim = cutoff * cutoff
    coo = sp.coo_array((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    return coo.tocsr()


def _ladder(cutoff):
    return sp.diags_array(np.sqrt(np.arange(1, cutoff, dtype=float)), offsets=1, format="csr")


def _expect(rho, op):
    return complex((rho.multiply(op.T)).sum())


def fock_covariance(fdm):
    """Quadrature CM of a two-mode truncated state (renormalized to unit trace).

    Built from normally ordered moments ``<a_j^dag a_k>`` and ``<a_j a_k>``,
    which are exact in the truncated space.
    """
    if fdm.modes != 2:
        raise DomainError("fock_covariance needs a two-mode state")
    rho = fdm.matrix / fdm.trace
    lad = _ladder(fdm.cutoff)
    eye = sp.eye_array(fdm.cutoff, format="csr")
    ops = [sp.kron(lad, eye, format="csr"), sp.kron(eye, lad, format="csr")]
    mean = np.array([_expect(rho, op) for op in ops])
    normal = np.empty((2, 2), dtype=complex)
    anomalous = np.empty((2, 2), dtype=complex)
    for j in range(2):
        for k in range(2):
            normal[j, k] = _expect(rho, ops[j].T @ ops[k]) - np.conj(mean[j]) * mean[k]
            anomalous[j, k] = _expect(rho, ops[j] @ ops[k]) - mean[j] * mean[k]
    cm = np.empty((4, 4))
    for j in range(2):
        for k in range(2):
            re_m, im_m = anomalous[j, k].real, anomalous[j, k].imag
            re_n, im_n = normal[j, k].real, normal[j, k].imag
            delta = VACUUM_VARIANCE if j == k else 0.0
            cm[2 * j, 2 * k] = re_m + re_n + delta
            cm[2 * j + 1, 2 * k + 1] = -re_m + re_n + delta
            cm[2 * j, 2 * k + 1] = im_m + im_n
            cm[2 * k + 1, 2 * j] = im_m + im_n
    return cm


def symmetric_gaussian_to_fock(a, b, c, cutoff, check=True):
    """Fock representation of the zero-mean state with CM ``[[a I, c Z], [c Z, b I]]``.

    The CM recomputed from the truncated matrix is compared with the input;
    ``check=True`` raises :class:`OracleConsistencyError` if they differ by
    more than ``SELF_CHECK_TOL`` (raise the cutoff). With ``check=False`` the
    residual is only recorded in ``cm_residual``.
    """
    if cutoff < 2:
        raise DomainError(f"cutoff must be >= 2, got {cutoff}")
    target = two_mode_cm(a, b, c)
    r, nu1, nu2 = _symplectic_params(a, b, c)
    if min(nu1, nu2) < VACUUM_VARIANCE - phys_tol(target):
        raise PhysicalityError(f"CM with a={a}, b={b}, c={c} is unphysical (symplectic eigenvalue {min(nu1, nu2)})")
    nbar1 = max(nu1 - VACUUM_VARIANCE, 0.0)
    nbar2 = max(nu2 - VACUUM_VARIANCE, 0.0)
    blocks = _tms_blocks(r, nbar1, nbar2, cutoff)
    matrix = _assemble(blocks, cutoff)
    trace = float(matrix.diagonal().sum())
    fdm = FockDensityMatrix(matrix, cutoff, 2, max(1.0 - trace, 0.0))
    cm = fock_covariance(fdm)
    residual = float(np.max(np.abs(cm - target)))
    if check and residual > SELF_CHECK_TOL:
        raise OracleConsistencyError(
            f"Fock state at cutoff {cutoff} reproduces its CM only to {residual:.3e} (> {SELF_CHECK_TOL:g}); increase the cutoff"
        )
    return FockDensityMatrix(matrix, cutoff, 2, fdm.truncation_deficit, cm=cm, cm_residual=residual)


@dataclass(frozen=True)
class OracleResult:
    bits: float
    deficit1: float
    deficit2: float
    clamped_eigs: int
    n_blocks: int

    def __float__(self):
        return self.bits


def _entropy_part(w):
    w = w[w > 0]
    return float(np.sum(w * np.log2(w)))


def oracle_relative_entropy(rho1, rho2):
    """``Tr[rho1 log2 rho1] - Tr[rho1 log2 rho2]`` by eigendecomposition.

    Both matrices are split into the connected components of their joint
    sparsity pattern and each block is diagonalized separately, which is exact
    for block-diagonal inputs. Eigenvalues in ``[-1e-10, 0)`` are clamped to
    zero (count reported).

    Eigenvalues of ``rho2`` at or below ``SUPPORT_FLOOR`` are not resolved by
    the eigensolver (1x1 blocks excepted, where the entry is the eigenvalue); they are evaluated at the floor, which underestimates
    their contribution. If that contribution exceeds ``SUPPORT_BUDGET_BITS``
    the result cannot be trusted and :class:`SupportError` is raised.
    """
    if rho1.matrix.shape != rho2.matrix.shape:
        raise DomainError(f"dimension mismatch: {rho1.matrix.shape} vs {rho2.matrix.shape}")
    m1, m2 = rho1.matrix, rho2.matrix
    pattern = (abs(m1) + abs(m2)).tocsr()
    n_blocks, labels = connected_components(pattern, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(n_blocks + 1))
    clamped = 0
    total = 0.0
    unresolved = 0.0
    for k in range(n_blocks):
        idx = order[bounds[k] : bounds[k + 1]]
        b1 = m1[idx][:, idx].toarray()
        b2 = m2[idx][:, idx].toarray()
        w1 = np.linalg.eigvalsh(b1)
        w2, v2 = np.linalg.eigh(b2)
        for w in (w1, w2):
            bad = w < -NEGATIVE_EIG_TOL
            if np.any(bad):
                raise OracleConsistencyError(f"density matrix has eigenvalue {w[bad].min():.3e} < -{NEGATIVE_EIG_TOL:g}")
            clamped += int(np.sum(w < 0))
        w1 = np.clip(w1, 0.0, None)
        total += _entropy_part(w1)
        weight = np.einsum("ij,jk,ki->i", v2.T, b1, v2)
        # a 1x1 block is its own eigenvalue, exact down to underflow
        floor = SUPPORT_FLOOR if len(idx) > 1 else np.finfo(float).tiny
        logs = np.log2(np.maximum(w2, floor))
        null = w2 <= floor
        unresolved -= float(np.sum(np.clip(weight[null], 0.0, None) * logs[null]))
        total -= float(np.sum(weight * logs))
    if unresolved > SUPPORT_BUDGET_BITS:
        raise SupportError(
            f"rho2 is numerically rank-deficient on the support of rho1: {unresolved:.3e} bits come from "
            f"eigenvalues <= {SUPPORT_FLOOR:g}; increase the cutoff"
        )
    if clamped:
        log.debug("clamped %d slightly negative eigenvalues", clamped)
    return OracleResult(total, rho1.truncation_deficit, rho2.truncation_deficit, clamped, n_blocks)


def resource_pair_fock(channel, cutoff, check=True):
    """Fock matrices of the resource state and its separable candidate."""
    bound = psi_bound(channel)
    res = bound.resource
    c_sep = float(bound.separable_cm[0, 2])
    rho1 = symmetric_gaussian_to_fock(res.a, res.b, res.c, cutoff, check=check)
    rho2 = symmetric_gaussian_to_fock(res.a, res.b, c_sep, cutoff, check=check)
    return res, bound.separable_cm, rho1, rho2


@dataclass(frozen=True)
class ScanRow:
    cutoff: int
    oracle_bits: float
    delta_vs_formula_bits: float
    truncation_deficit: float
    cm_residual: float
    self_check_ok: bool
    error: str = None


@dataclass
class ScanResult:
    channel: str
    formula_bits: float
    rows: list
    mean_photons: float
    warnings: list

    @property
    def final_delta(self):
        return self.rows[-1].delta_vs_formula_bits if self.rows else math.nan

    @property
    def converged(self):
        last = self.rows[-1] if self.rows else None
        return bool(last and last.self_check_ok and last.delta_vs_formula_bits <= ORACLE_AGREEMENT)

    def to_dict(self):
        return {
            "channel": self.channel,
            "formula_bits": self.formula_bits,
            "mean_photons": self.mean_photons,
            "converged": self.converged,
            "final_delta_bits": self.final_delta,
            "rows": [row.__dict__ for row in self.rows],
            "warnings": list(self.warnings),
        }


def convergence_scan(channel, cutoffs=DEFAULT_CUTOFFS):
    """Oracle value of ``S(resource || candidate)`` against the Gaussian formula, per cutoff.

    A cutoff whose Fock states fail the CM self-check or the support test is
    still listed; its ``self_check_ok`` is False or ``error`` is set.
    """
    bound = psi_bound(channel)
    res = bound.resource
    formula = bound.psi
    c_sep = float(bound.separable_cm[0, 2])
    photons = max(res.a, res.b) - VACUUM_VARIANCE
    rows = []
    for cutoff in cutoffs:
        rho1 = symmetric_gaussian_to_fock(res.a, res.b, res.c, cutoff, check=False)
        rho2 = symmetric_gaussian_to_fock(res.a, res.b, c_sep, cutoff, check=False)
        residual = max(rho1.cm_residual, rho2.cm_residual)
        deficit = max(rho1.truncation_deficit, rho2.truncation_deficit)
        try:
            value = oracle_relative_entropy(rho1, rho2).bits
            error = None
        except (SupportError, OracleConsistencyError) as exc:
            value, error = math.nan, str(exc)
        rows.append(
            ScanRow(cutoff, value, abs(value - formula), deficit, residual, residual <= SELF_CHECK_TOL, error)
        )
    warnings = []
    if photons > SLOW_PHOTONS:
        warnings.append(
            f"slow convergence expected: mean photon number {photons:.4g} per mode in the resource state"
        )
    last = rows[-1] if rows else None
    if last is not None and not (last.self_check_ok and last.delta_vs_formula_bits <= ORACLE_AGREEMENT):
        warnings.append(
            f"not converged at cutoff {last.cutoff}: |delta| = {last.delta_vs_formula_bits:.3e} bits, "
            f"CM residual {last.cm_residual:.3e}"
        )
    return ScanResult(channel.spec(), formula, rows, photons, warnings)


@dataclass(frozen=True)
class AdaptiveOracle:
    bits: float
    cutoff: int
    history: tuple
    converged: bool
    cm_residual: float = None


def adaptive_oracle(rho_factory, start=15, max_cutoff=MAX_CUTOFF, tol=ADAPTIVE_TOL):
    """Double the cutoff until successive oracle values differ by < ``tol``.

    ``rho_factory(cutoff)`` returns the pair ``(rho1, rho2)``. Stops at
    ``max_cutoff`` (inclusive). ``converged`` also requires the final states
    to pass the CM self-check when they carry a residual.
    """
    history = []
    cutoff = start
    prev = None
    while True:
        rho1, rho2 = rho_factory(cutoff)
        value = oracle_relative_entropy(rho1, rho2).bits
        residuals = [x.cm_residual for x in (rho1, rho2) if x.cm_residual is not None]
        residual = max(residuals) if residuals else None
        history.append((cutoff, value))
        settled = prev is not None and abs(value - prev) < tol
        if settled or cutoff >= max_cutoff:
            ok = settled and (residual is None or residual <= SELF_CHECK_TOL)
            return AdaptiveOracle(value, cutoff, tuple(history), ok, residual)
        prev = value
        cutoff = min(2 * cutoff, max_cutoff)


def adaptive_channel_oracle(channel, start=15, max_cutoff=MAX_CUTOFF, tol=ADAPTIVE_TOL):
    """Adaptive oracle for ``S(resource || candidate)`` of ``channel``."""

    def factory(cutoff):
        _, _, rho1, rho2 = resource_pair_fock(channel, cutoff, check=False)
        return rho1, rho2

    return adaptive_oracle(factory, start, max_cutoff, tol)
