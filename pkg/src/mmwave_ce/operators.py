"""Matrix-free linear measurement operators with verified adjoints.

All solvers in this package talk to operators through `forward`/`adjoint`
callables instead of materialized matrices; the beamspace measurement maps
would otherwise require Kronecker products of size (N_Z*N_F) x (N1*N2).
"""

from __future__ import annotations

import numpy as np


class MeasurementOperator:
    """Linear map between complex arrays with an explicit conjugate-transpose map.

    Subclasses implement `forward` (in_shape -> out_shape) and `adjoint`
    (out_shape -> in_shape).
    """

    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class MatrixOperator(MeasurementOperator):
    """Dense matrix acting on vectors."""

    def __init__(self, a: np.ndarray):
        self.a = np.asarray(a)
        self.in_shape = (self.a.shape[1],)
        self.out_shape = (self.a.shape[0],)

    def forward(self, x):
        return self.a @ x

    def adjoint(self, y):
        return self.a.conj().T @ y


class SandwichOperator(MeasurementOperator):
    """X -> left @ X @ right, the beam-domain image of a beamspace matrix.

    For the sparse-recovery stage, left = Z^H A_BS and right = A_MS^H F.
    """

    def __init__(self, left: np.ndarray, right: np.ndarray):
        self.left = np.asarray(left)
        self.right = np.asarray(right)
        self.in_shape = (self.left.shape[1], self.right.shape[0])
        self.out_shape = (self.left.shape[0], self.right.shape[1])

    def forward(self, x):
        return self.left @ x @ self.right

    def adjoint(self, y):
        return self.left.conj().T @ y @ self.right.conj().T


class EntrySamplingOperator(MeasurementOperator):
    """X -> selected entries of left @ X @ right, one per sounding measurement.

    Output t equals row_{i_t}(left) @ X @ col_{j_t}(right), i.e. the direct
    per-measurement model z^H A_BS X A_MS^H f without the Kronecker matrix.
    """

    def __init__(self, left: np.ndarray, right: np.ndarray, omega: np.ndarray):
        self.left = np.asarray(left)
        self.right = np.asarray(right)
        self.omega = np.asarray(omega)
        self.in_shape = (self.left.shape[1], self.right.shape[0])
        self.out_shape = (len(self.omega),)
        self._rows = self.omega[:, 0]
        self._cols = self.omega[:, 1]
        self._left_h = self.left.conj().T
        self._right_h = self.right.conj().T

    def forward(self, x):
        # the sampled set is typically a large fraction of the product matrix,
        # so forming it fully is cheaper than per-measurement row/col gathers
        return (self.left @ x @ self.right)[self._rows, self._cols]

    def adjoint(self, y):
        scattered = np.zeros((self.left.shape[0], self.right.shape[1]), dtype=complex)
        scattered[self._rows, self._cols] = y  # omega pairs are distinct
        return self._left_h @ scattered @ self._right_h


class MaskedEntryOperator(MeasurementOperator):
    """X -> X[omega], plain entry sampling used by the completion solvers."""

    def __init__(self, shape: tuple[int, int], omega: np.ndarray):
        self.shape = shape
        self.omega = np.asarray(omega)
        self.in_shape = shape
        self.out_shape = (len(self.omega),)

    def forward(self, x):
        return x[self.omega[:, 0], self.omega[:, 1]]

    def adjoint(self, y):
        out = np.zeros(self.shape, dtype=complex)
        out[self.omega[:, 0], self.omega[:, 1]] = y
        return out


def _random_like(rng, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def adjoint_mismatch(op: MeasurementOperator, probes: int = 20, seed=0) -> float:
    """Worst relative inner-product mismatch <forward(x), w> vs <x, adjoint(w)>
    over random complex probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        x = _random_like(rng, op.in_shape)
        w = _random_like(rng, op.out_shape)
        lhs = np.vdot(op.forward(x).ravel(), w.ravel())
        rhs = np.vdot(x.ravel(), op.adjoint(w).ravel())
        scale = max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def check_adjoint(op: MeasurementOperator, probes: int = 20, seed=0, tol: float = 1e-10):
    mismatch = adjoint_mismatch(op, probes=probes, seed=seed)
    if mismatch > tol:
        raise ValueError(f"operator fails the adjoint test: mismatch {mismatch:.3e} > {tol:.1e}")


def lipschitz_estimate(op: MeasurementOperator, iters: int = 50, seed=0) -> float:
    """Power-iteration estimate of the largest eigenvalue of adjoint(forward(.)),
    i.e. the squared spectral norm of the operator."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    v = _random_like(rng, op.in_shape)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return 0.0
    v /= norm
    lam = 0.0
    for _ in range(iters):
        w = op.adjoint(op.forward(v))
        lam = float(np.real(np.vdot(v.ravel(), w.ravel())))
        wnorm = np.linalg.norm(w)
        if wnorm == 0.0:
            return 0.0
        v = w / wnorm
    return lam
