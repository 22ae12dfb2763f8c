"""Symplectic linear algebra for bosonic Gaussian states.

Conventions: quadratures are ordered ``x1, p1, ..., xn, pn`` and the vacuum
has variance 1/2, so a thermal mode with ``nbar`` photons has covariance
matrix ``(nbar + 1/2) * I``.

Matrix functions (``arccoth`` for the Gibbs matrix, ``coth`` for its
inverse) are evaluated through a complex eigendecomposition. The matrices
involved here are at most 4x4, so this is both accurate and cheap.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DecompositionError,
    DimensionError,
    DomainError,
    NumericalConsistencyError,
    PhysicalityError,
    ShapeError,
    SingularGibbsError,
)

VACUUM_VARIANCE = 0.5

TOL_SYM = 1e-12
TOL_PHYS = 1e-9
TOL_GIBBS = 1e-7
TOL_IMAG = 1e-9

_LN2 = np.log(2.0)
_EPS = np.finfo(float).eps


def phys_tol(cm):
    """Physicality tolerance: ``TOL_PHYS``, widened for large-norm matrices.

    Storing a strongly squeezed CM in doubles perturbs its symplectic
    eigenvalues by roughly ``eps * ||V||^2``, so that floor is used whenever
    it exceeds ``TOL_PHYS`` (``||V||`` above a few hundred).
    """
    scale = float(np.max(np.abs(cm))) if np.size(cm) else 0.0
    return max(TOL_PHYS, 64.0 * _EPS * scale * scale)


def omega(n):
    """Symplectic form for ``n`` modes (block diagonal ``[[0, 1], [-1, 0]]``)."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _as_cm(cm):
    cm = np.asarray(cm, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise DimensionError(f"covariance matrix must be square, got shape {cm.shape}")
    if cm.shape[0] % 2:
        raise DimensionError(f"covariance matrix must have even dimension, got {cm.shape[0]}")
    asym = np.max(np.abs(cm - cm.T)) if cm.size else 0.0
    if asym > TOL_SYM * max(1.0, np.max(np.abs(cm))):
        raise ShapeError(f"covariance matrix is not symmetric (max asymmetry {asym:.3e})")
    return 0.5 * (cm + cm.T)


@dataclass(frozen=True)
class WilliamsonSpectrum:
    nus: tuple

    @property
    def min(self):
        return self.nus[0]

    def __iter__(self):
        return iter(self.nus)

    def __len__(self):
        return len(self.nus)


@dataclass(frozen=True)
class CMValidity:
    is_physical: bool
    min_sympl_eig: float


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of an n-mode Gaussian state.

    The covariance matrix is symmetrized on construction and checked for
    physicality; an unphysical matrix raises :class:`PhysicalityError`.
    """

    mean: np.ndarray
    cm: np.ndarray = field(repr=False)

    def __post_init__(self):
        cm = _as_cm(self.cm)
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        if mean.shape[0] != cm.shape[0]:
            raise DimensionError(
                f"mean has length {mean.shape[0]} but covariance matrix is {cm.shape[0]}x{cm.shape[0]}"
            )
        report = validate_cm(cm)
        if not report.is_physical:
            raise PhysicalityError(
                f"covariance matrix is not bona fide: minimum symplectic eigenvalue "
                f"{report.min_sympl_eig:.12g} < 1/2"
            )
        mean.setflags(write=False)
        cm.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cm", cm)

    @classmethod
    def zero_mean(cls, cm):
        cm = np.asarray(cm, dtype=float)
        return cls(np.zeros(cm.shape[0]), cm)

    @classmethod
    def thermal(cls, nbar, modes=1):
        return cls.zero_mean((nbar + VACUUM_VARIANCE) * np.eye(2 * modes))

    @classmethod
    def vacuum(cls, modes=1):
        return cls.thermal(0.0, modes)

    @property
    def modes(self):
        return self.cm.shape[0] // 2


def _sympl_eigs_unchecked(cm):
    """Symplectic eigenvalues of a positive-definite CM, ascending.

    With ``V = L L^T`` the Hermitian matrix ``L^T (i Omega) L`` has spectrum
    ``{+-nu_k}``. Its rounding error scales with ``||V||`` rather than
    ``||V||^2`` as for ``-(V Omega)^2``, which matters for strongly squeezed
    resources.
    """
    n = cm.shape[0] // 2
    chol = np.linalg.cholesky(cm)
    ev = np.linalg.eigvalsh(chol.T @ (1j * omega(n)) @ chol)
    return np.sort(ev[n:])


def validate_cm(cm):
    """Check the bona fide condition ``V + i Omega / 2 >= 0``.

    Returns a :class:`CMValidity`. Non positive-definite matrices are never
    physical; their reported ``min_sympl_eig`` is the smallest modulus of the
    spectrum of ``i Omega V``.
    """
    cm = _as_cm(cm)
    n = cm.shape[0] // 2
    try:
        nu_min = float(_sympl_eigs_unchecked(cm)[0])
        positive = True
    except np.linalg.LinAlgError:
        positive = False
        nu_min = float(np.min(np.abs(np.linalg.eigvals(1j * omega(n) @ cm))))
    return CMValidity(positive and nu_min >= VACUUM_VARIANCE - phys_tol(cm), nu_min)


def williamson_eigenvalues(cm):
    """Symplectic spectrum of a positive-definite covariance matrix, ascending."""
    cm = _as_cm(cm)
    try:
        nus = _sympl_eigs_unchecked(cm)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError("covariance matrix is not positive definite") from exc
    return WilliamsonSpectrum(tuple(float(x) for x in nus))


def extended_h(x):
    """Bosonic entropy function ``(x+1) log2(x+1) - x log2(x)`` with ``h(0) = 0``."""
    if x < 0:
        raise DomainError(f"h(x) requires x >= 0, got {x}")
    if x == 0:
        return 0.0
    return float((x + 1) * np.log2(x + 1) - x * np.log2(x))


def von_neumann_entropy(cm):
    """Entropy in bits, summed over symplectic eigenvalues.

    Eigenvalues within :func:`phys_tol` of 1/2 contribute exactly zero, so
    pure states return 0.0 rather than rounding noise.
    """
    cm = _as_cm(cm)
    tol = phys_tol(cm)
    nus = williamson_eigenvalues(cm).nus
    if nus[0] < VACUUM_VARIANCE - tol:
        raise PhysicalityError(f"symplectic eigenvalue {nus[0]:.12g} < 1/2")
    total = 0.0
    for nu in nus:
        if nu > VACUUM_VARIANCE + tol:
            total += extended_h(nu - VACUUM_VARIANCE)
    return total


def partial_transpose_cm(cm, mode_index=1):
    """Partial transposition of a two-mode CM: flip the sign of ``p`` on one mode."""
    cm = np.asarray(cm, dtype=float)
    if cm.shape != (4, 4):
        raise DimensionError(f"partial transpose needs a 4x4 matrix, got {cm.shape}")
    if mode_index not in (0, 1):
        raise DimensionError(f"mode_index must be 0 or 1, got {mode_index}")
    flip = np.ones(4)
    flip[2 * mode_index + 1] = -1.0
    return cm * np.outer(flip, flip)


def ppt_separable(cm):
    """Simon's criterion: a two-mode Gaussian state is separable iff PPT."""
    report = validate_cm(cm)
    if not report.is_physical:
        raise PhysicalityError(
            f"cannot test separability of an unphysical CM (min symplectic eigenvalue {report.min_sympl_eig:.12g})"
        )
    pt = partial_transpose_cm(cm)
    return bool(_sympl_eigs_unchecked(_as_cm(pt))[0] >= VACUUM_VARIANCE - phys_tol(pt))


def _real_part(mat, what):
    resid = float(np.max(np.abs(mat.imag))) if mat.size else 0.0
    if resid > TOL_IMAG:
        raise NumericalConsistencyError(f"{what}: imaginary residue {resid:.3e} exceeds {TOL_IMAG:g}")
    return mat.real


def _matrix_function(mat, func):
    vals, vecs = np.linalg.eig(mat)
    return vecs @ np.diag(func(vals)) @ np.linalg.inv(vecs)


def _arccoth(z):
    return 0.5 * np.log((z + 1.0) / (z - 1.0))


def _coth(z):
    return 1.0 / np.tanh(z)


def gibbs_matrix(cm):
    """Gibbs matrix ``G = 2i Omega arccoth(2i V Omega)``.

    ``rho ~ exp(-x^T G x / 2)``. The spectrum of ``2i V Omega`` is real
    (``+-2 nu_k``); every ``nu_k`` must exceed ``1/2 + TOL_GIBBS``, otherwise
    ``arccoth`` diverges and :class:`SingularGibbsError` is raised.
    """
    cm = _as_cm(cm)
    nus = williamson_eigenvalues(cm).nus
    if nus[0] <= VACUUM_VARIANCE + TOL_GIBBS:
        raise SingularGibbsError(
            f"Gibbs matrix is singular: symplectic eigenvalue {nus[0]:.12g} is not above 1/2 + {TOL_GIBBS:g}"
        )
    w = omega(cm.shape[0] // 2)
    # eigenvalues of 2iVOmega are real; drop rounding-level imaginary parts before arccoth
    f = _matrix_function(2j * cm @ w, lambda z: _arccoth(z.real))
    g = _real_part(2j * w @ f, "Gibbs matrix")
    return 0.5 * (g + g.T)


def cm_from_gibbs(g):
    """Inverse of :func:`gibbs_matrix`: ``V = coth(i Omega G / 2) (i Omega / 2)``."""
    g = np.asarray(g, dtype=float)
    w = omega(g.shape[0] // 2)
    f = _matrix_function(0.5j * w @ g, lambda z: _coth(z.real))
    v = _real_part(f @ (0.5j * w), "Gibbs inverse")
    return 0.5 * (v + v.T)


def log_det_gibbs_norm(cm):
    """``ln det(V + i Omega / 2)`` for a strictly mixed CM.

    Computed from the complex determinant directly; the value is real and
    positive (it equals ``prod_k (nu_k^2 - 1/4)``), which is asserted.
    """
    cm = _as_cm(cm)
    w = omega(cm.shape[0] // 2)
    det = np.linalg.det(cm + 0.5j * w)
    if abs(det.imag) > TOL_IMAG * max(1.0, abs(det.real)):
        raise NumericalConsistencyError(f"det(V + i Omega/2) has imaginary residue {det.imag:.3e}")
    if det.real <= 0:
        raise SingularGibbsError(f"det(V + i Omega/2) = {det.real:.3e} is not positive")
    return float(np.log(det.real))


def sigma_functional(cm1, mean1, cm2, mean2):
    """``Sigma(V1, V2)`` in bits: ``[ln det(V2 + iOmega/2) + Tr(V1 G2) + d^T G2 d] / (2 ln 2)``.

    ``d = mean1 - mean2``; ``G2`` is the Gibbs matrix of ``cm2``.
    """
    cm1 = _as_cm(cm1)
    g2 = gibbs_matrix(cm2)
    if cm1.shape != g2.shape:
        raise DimensionError(f"mode mismatch: {cm1.shape} vs {g2.shape}")
    delta = np.asarray(mean1, dtype=float) - np.asarray(mean2, dtype=float)
    num = log_det_gibbs_norm(cm2) + np.trace(cm1 @ g2) + delta @ g2 @ delta
    return float(num / (2.0 * _LN2))
