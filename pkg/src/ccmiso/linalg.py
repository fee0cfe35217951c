"""Complex linear algebra helpers used by the beamformer designs.

Everything works on plain numpy arrays with dtype complex128. Channel
vectors are 1-d arrays of length L (antennas), channel collections are
2-d arrays with one row per user.
"""

import numpy as np

from .errors import DegenerateChannelError, DimensionError, NumericalError

_RANK_TOL = 1e-9


def herm_inner(a, b):
    """Hermitian inner product <a, b> = a^H b.

    Conjugates the first argument, matching the convention that
    herm_inner(h, w) is the complex channel gain of beam w seen through
    channel h.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"herm_inner needs equal-length vectors, got {a.shape} and {b.shape}")
    return complex(np.vdot(a, b))


def null_projector(channels, L=None):
    """Orthogonal projector onto the complement of the span of the rows.

    Parameters
    ----------
    channels : array-like, shape (m, L) or empty list
        Channel vectors to null out. May be empty, in which case the
        identity is returned.
    L : int, optional
        Ambient dimension; required when ``channels`` is empty.

    Returns the L x L Hermitian idempotent Q with Q h = 0 for every row h.
    Uses modified Gram-Schmidt on the rows, which is stable enough at the
    sizes involved here and keeps the projector exactly Hermitian by
    construction.
    """
    rows = [np.asarray(h, dtype=complex) for h in channels]
    if not rows:
        if L is None:
            raise DimensionError("null_projector needs L when no channels are given")
        return np.eye(L, dtype=complex)
    L = rows[0].shape[0]
    if any(h.shape != (L,) for h in rows):
        raise DimensionError("channel vectors must share a common length")
    if len(rows) >= L:
        raise DegenerateChannelError(
            f"cannot null {len(rows)} directions in a {L}-dimensional space"
        )
    basis = []
    for h in rows:
        v = h.copy()
        for u in basis:
            v -= np.vdot(u, v) * u
        # second pass for numerical hygiene
        for u in basis:
            v -= np.vdot(u, v) * u
        nrm = np.linalg.norm(v)
        if nrm <= _RANK_TOL * max(1.0, np.linalg.norm(h)):
            raise DegenerateChannelError("channel vectors are linearly dependent")
        basis.append(v / nrm)
    U = np.stack(basis, axis=1)
    Q = np.eye(L, dtype=complex) - U @ U.conj().T
    return 0.5 * (Q + Q.conj().T)


def dominant_eigvec(A, max_iter=10000, tol=1e-10, seed=0):
    """Dominant eigenvector of a Hermitian PSD matrix by power iteration.

    Iterates until the eigen-residual ||A v - lam v|| drops below ``tol``
    times the matrix scale. The returned vector has unit norm and its
    largest-magnitude entry is rotated to be real and positive, which
    makes the output deterministic up to that convention.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    scale = max(1.0, float(np.linalg.norm(A, "fro")))
    for _ in range(max_iter):
        w = A @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            # A v is exactly zero; v is in the nullspace, any direction works
            raise NumericalError("power iteration hit the zero vector")
        lam = float(np.real(np.vdot(v, w)))
        if np.linalg.norm(w - lam * v) <= tol * scale:
            break
        v = w / nrm
    else:
        raise NumericalError("power iteration did not converge")
    k = int(np.argmax(np.abs(v)))
    phase = v[k] / abs(v[k])
    v = v / phase
    v[k] = v[k].real + 0.0j
    return v
