"""Quadratic functions x -> 0.5 x'Qx + b'x + c."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class QuadraticFunction:
    """``x -> 0.5 * x @ Q @ x + b @ x + c`` with symmetric ``Q``."""

    Q: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if Q.shape != (b.size, b.size):
            raise ValueError(f"Q has shape {Q.shape}, expected {(b.size, b.size)}")
        if b.size and np.max(np.abs(Q - Q.T)) > 1e-12:
            raise ValueError("Q must be symmetric")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @classmethod
    def linear(cls, b, c=0.0):
        b = np.asarray(b, dtype=float).reshape(-1)
        return cls(np.zeros((b.size, b.size)), b, c)

    @property
    def dim(self) -> int:
        return self.b.size

    @property
    def is_linear(self) -> bool:
        return not np.any(self.Q)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.b @ x + self.c)

    def gradient(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) + self.b

    def min_eigenvalue(self) -> float:
        if self.is_linear:
            return 0.0
        return float(np.linalg.eigvalsh(self.Q)[0])

    def is_convex(self, rtol=1e-9) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.Q)))) if self.dim else 1.0
        return self.min_eigenvalue() >= -rtol * scale

    def embed(self, m: int, index) -> "QuadraticFunction":
        """Lift to ``m`` variables, placing the original ones at ``index``."""
        index = np.asarray(index)
        Q = np.zeros((m, m))
        Q[np.ix_(index, index)] = self.Q
        b = np.zeros(m)
        b[index] = self.b
        return QuadraticFunction(Q, b, self.c)

    def to_dict(self) -> dict:
        return {"Q": self.Q.tolist(), "b": self.b.tolist(), "c": self.c}

    @classmethod
    def from_dict(cls, data: dict) -> "QuadraticFunction":
        b = np.asarray(data["b"], dtype=float)
        Q = data.get("Q")
        Q = np.zeros((b.size, b.size)) if Q is None else np.asarray(Q, dtype=float)
        return cls(Q, b, data.get("c", 0.0))
