"""Matrix structure groups U(1) and SU(2) and their Lie algebras."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TagMismatch, TooFarFromGroup

U1 = "U1"
SU2 = "SU2"
DIM = {U1: 1, SU2: 2}
RENORMALIZE_BOUND = 0.1

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def _frozen(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GroupElement:
    tag: str
    matrix: np.ndarray

    def __post_init__(self):
        d = DIM[self.tag]
        object.__setattr__(self, "matrix", _frozen(np.reshape(self.matrix, (d, d))))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def __repr__(self):
        return f"GroupElement({self.tag}, {np.round(self.matrix, 12).tolist()})"


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    tag: str
    matrix: np.ndarray

    def __post_init__(self):
        d = DIM[self.tag]
        object.__setattr__(self, "matrix", _frozen(np.reshape(self.matrix, (d, d))))

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.tag, -self.matrix)

    def __mul__(self, s: float) -> "AlgebraElement":
        return AlgebraElement(self.tag, s * self.matrix)

    __rmul__ = __mul__


def identity(tag: str) -> GroupElement:
    return GroupElement(tag, np.eye(DIM[tag]))


def u1(theta: float) -> GroupElement:
    return GroupElement(U1, [[np.exp(1j * theta)]])


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(g.tag, g.matrix.conj().T)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.tag != b.tag:
        raise TagMismatch(f"{a.tag} * {b.tag}")
    return renormalize(GroupElement(a.tag, a.matrix @ b.matrix))


def exp_alg(X: AlgebraElement) -> GroupElement:
    """Exact exponential: scalar for U(1), axis-angle closed form for SU(2)."""
    if X.tag == U1:
        return GroupElement(U1, np.exp(X.matrix))
    # X = i * (a . sigma) with a real
    a = np.real(np.einsum("kij,ji->k", PAULI, X.matrix) / 2j)
    theta = float(np.linalg.norm(a))
    if theta < 1e-300:
        return identity(SU2)
    n_sigma = np.einsum("k,kij->ij", a / theta, PAULI)
    return GroupElement(SU2, np.cos(theta) * np.eye(2) + 1j * np.sin(theta) * n_sigma)


def renormalize_array(tag: str, mats: np.ndarray) -> np.ndarray:
    """Nearest group element for a stack of matrices ``(..., d, d)``.

    Polar factor; for SU(2) the polar factor is further divided by a square
    root of its determinant. Raises when any input is further than 0.1
    (Frobenius) from the result.
    """
    mats = np.asarray(mats, dtype=complex)
    if tag == U1:
        out = mats / np.abs(mats)
    else:
        w, _, vh = np.linalg.svd(mats)
        out = w @ vh
        det = np.linalg.det(out)
        out = out / np.sqrt(det)[..., None, None]
    dist = np.linalg.norm(mats - out, axis=(-2, -1))
    if np.any(~(dist <= RENORMALIZE_BOUND)):
        raise TooFarFromGroup(f"distance {float(np.max(dist)):.3g} exceeds {RENORMALIZE_BOUND}")
    return out


def renormalize(g: GroupElement) -> GroupElement:
    return GroupElement(g.tag, renormalize_array(g.tag, g.matrix))


def is_unitary(m: np.ndarray, tol: float = 1e-9) -> bool:
    m = np.asarray(m)
    return bool(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[-1])) <= tol)


def random_element(tag: str, rng) -> GroupElement:
    """Haar-uniform element from a `SplitMix64` stream."""
    if tag == U1:
        return u1(2 * np.pi * rng.random())
    u0, u1_, u2 = rng.random(), rng.random(), rng.random()
    a = np.sqrt(1 - u0) * np.exp(2j * np.pi * u1_)
    b = np.sqrt(u0) * np.exp(2j * np.pi * u2)
    return GroupElement(SU2, [[a, -np.conj(b)], [b, np.conj(a)]])


def random_algebra(tag: str, rng, scale: float = 1.0) -> AlgebraElement:
    if tag == U1:
        return AlgebraElement(U1, [[1j * scale * (2 * rng.random() - 1)]])
    a = [scale * (2 * rng.random() - 1) for _ in range(3)]
    return AlgebraElement(SU2, 1j * np.einsum("k,kij->ij", a, PAULI))
