"""The three l_p norms supported for scalarization and their duals."""

import numpy as np

SUPPORTED = (1.0, 2.0, np.inf)


def parse_p(p) -> float:
    """Normalize ``p`` given as number or string ("1", "2", "inf") to a float."""
    if isinstance(p, str):
        key = p.strip().lower()
        if key in ("inf", "infinity", "oo"):
            return np.inf
        p = float(key)
    p = float(p)
    if p not in SUPPORTED:
        raise ValueError(f"unsupported norm p={p}; choose 1, 2 or inf")
    return p


def dual_exponent(p) -> float:
    """Hoelder conjugate of ``p``."""
    p = parse_p(p)
    if p == 1.0:
        return np.inf
    if p == np.inf:
        return 1.0
    return 2.0


def norm(z, p) -> float:
    return float(np.linalg.norm(np.asarray(z, dtype=float), ord=parse_p(p)))


def dual_norm(w, p) -> float:
    """Norm of ``w`` in the dual of the l_p norm."""
    return norm(w, dual_exponent(p))


def p_label(p) -> str:
    p = parse_p(p)
    return "inf" if p == np.inf else str(int(p))
