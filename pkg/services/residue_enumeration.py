"""
Vectorised enumeration over residue matrices.

Shared by the p-adic oscillatory oracle, the local zeta integrals and the
dyadic computations of the geometric side. Everything here works with plain
integers and numpy int64 arrays so that histograms are exact.
"""
# Standard libraries
import os
import sys
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Third-party libraries
import numpy as np

# Local imports
from services.error_handler import BudgetExceededError, PreconditionError
from utils.logger import get_logger

logger = get_logger(__name__)

IntMat = Tuple[int, int, int, int]
WeightFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def matrix_grid(modulus: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Entries (a, b, c, d) of every 2x2 matrix mod `modulus`, as flat int64 arrays."""
    r = np.arange(modulus, dtype=np.int64)
    a, b, c, d = np.meshgrid(r, r, r, r, indexing="ij")
    return a.ravel(), b.ravel(), c.ravel(), d.ravel()


def phase_histogram_block(args: Tuple[int, int, int, IntMat, Sequence[int]]) -> np.ndarray:
    """
    Histogram of x*det(T) + tr(g0 T) mod p^t over T mod p^t with t11 in `t11_values`.

    tr(g0 T) = g11 t11 + g12 t21 + g21 t12 + g22 t22 for T = (t11 t12; t21 t22).
    """
    p, t_exp, x, gamma, t11_values = args
    mod = p ** t_exp
    g11, g12, g21, g22 = (int(g) % mod for g in gamma)
    r = np.arange(mod, dtype=np.int64)
    t12, t21, t22 = (m.ravel() for m in np.meshgrid(r, r, r, indexing="ij"))
    rest = (x * (-(t12 * t21)) + g12 * t21 + g21 * t12 + g22 * t22) % mod
    hist = np.zeros(mod, dtype=np.int64)
    for t11 in t11_values:
        phase = (rest + (x * t11 % mod) * t22 + g11 * t11) % mod
        hist += np.bincount(phase, minlength=mod)
    return hist


def _det_phase(entries: Tuple[np.ndarray, ...], gamma: IntMat, det_mod: int,
               phase_mod: int) -> Tuple[np.ndarray, np.ndarray]:
    a, b, c, d = entries
    det = (a * d - b * c) % det_mod if det_mod > 1 else np.zeros_like(a)
    g11, g12, g21, g22 = gamma
    if phase_mod > 1:
        phase = (g11 % phase_mod * a + g12 % phase_mod * c
                 + g21 % phase_mod * b + g22 % phase_mod * d) % phase_mod
    else:
        phase = np.zeros_like(a)
    return det, phase


def shell_phase_table(p: int, b: Tuple[int, int], gamma_num: Tuple[IntMat, IntMat], a: int,
                      beta: Tuple[IntMat, IntMat] = ((0, 0, 0, 0), (0, 0, 0, 0)),
                      m: int = 0, k: int = 0, e: int = 0,
                      weights: Tuple[Optional[WeightFn], Optional[WeightFn]] = (None, None),
                      min_depth: int = 0, exact_valuation: bool = False,
                      budget: float = 1e8) -> Tuple[np.ndarray, int, int]:
    """
    Joint phase histogram of the fibered shell integral.

    The integral is over T in p^-m beta + p^k gl2(Z_p)^2 of
    w1(T1) w2(T2) 1[P(b,T) in p^e Z_p] psi(tr(gamma T) / p^e), where gamma = gamma_num / p^a.
    With exact_valuation the indicator is replaced by 1[v(P(b,T)) = e].

    Writing T = p^-m (beta + p^(k+m) S) with S mod p^R, returns (E, N, R) such that the
    integral equals p^(-8(k+R)) * sum_phi E[phi] zeta_{p^N}^(-phi). Weight functions act on
    the integer entries of beta + p^(k+m) S and must only depend on them mod p^min_depth.
    """
    extra = 1 if exact_valuation else 0
    if exact_valuation and e + 2 * m < 0:
        # v(P) >= -2m on the support, so the shell is empty
        return np.zeros(p ** max(a + e + m, 0), dtype=np.int64), max(a + e + m, 0), 0
    depth = max(a + e - k, e + m - k + extra, min_depth, 0)
    det_exp = max(e + 2 * m + extra, 0)
    phase_exp = max(a + e + m, 0)
    det_mod = p ** det_exp
    phase_mod = p ** phase_exp
    n_points = float(p) ** (4 * depth)
    if 2 * n_points > budget:
        raise BudgetExceededError("fibered shell enumeration", 2 * n_points, budget)

    work_mod = max(det_mod, phase_mod, p ** min_depth, 1)
    shift = p ** (k + m)
    s_entries = matrix_grid(p ** depth) if depth > 0 else tuple(np.zeros(1, dtype=np.int64) for _ in range(4))

    tables = []
    for i in range(2):
        entries = tuple((int(beta[i][j]) + shift * s_entries[j]) % work_mod for j in range(4))
        det, phase = _det_phase(entries, gamma_num[i], det_mod, phase_mod)
        w = weights[i](*entries) if weights[i] is not None else None
        flat = det * phase_mod + phase
        if w is None:
            hist = np.bincount(flat, minlength=det_mod * phase_mod)
        else:
            hist = np.rint(np.bincount(flat, weights=w, minlength=det_mod * phase_mod)).astype(np.int64)
        tables.append(hist.reshape(det_mod, phase_mod).astype(np.int64))
    h1, h2 = tables

    # allowed[d1, d2] = 1 when b1 d1 - b2 d2 satisfies the valuation condition
    d = np.arange(det_mod, dtype=np.int64)
    b1, b2 = int(b[0]) % det_mod, int(b[1]) % det_mod
    diff = (b1 * d[:, None] - b2 * d[None, :]) % det_mod
    target = p ** (det_exp - extra)
    allowed = (diff % target == 0)
    if exact_valuation:
        allowed &= (diff != 0)
    g = allowed.astype(np.int64) @ h2

    joint = np.zeros(phase_mod, dtype=np.int64)
    for d1 in range(det_mod):
        row1 = h1[d1]
        if not row1.any() or not g[d1].any():
            continue
        joint += circular_convolve(row1, g[d1])
    logger.debug(f"shell table p={p} a={a} m={m} k={k} e={e}: depth {depth}, modulus p^{phase_exp}")
    return joint, phase_exp, depth


def circular_convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Exact cyclic convolution of two integer arrays of equal length."""
    n = len(x)
    full = np.convolve(x, y)
    out = full[:n].copy()
    out[:n - 1] += full[n:]
    return out


def unit_twisted_tables(table: np.ndarray, p: int, phase_exp: int,
                        classify: Optional[Callable[[int], Hashable]] = None) -> Tuple[Dict[Hashable, np.ndarray], int]:
    """
    Re-index a phase histogram for t = p^e u, summed over units u grouped by classify(u).

    The phase of T at t = p^e u is phi * u^-1, so each unit permutes the histogram.
    Returns ({class: summed histogram}, number of units).
    """
    mod = p ** phase_exp
    unit_mod = max(mod, p)
    idx = np.arange(mod, dtype=np.int64)
    grouped: Dict[Hashable, np.ndarray] = {}
    n_units = 0
    for u in range(1, unit_mod):
        if u % p == 0:
            continue
        n_units += 1
        key = classify(u) if classify is not None else None
        if mod > 1:
            u_inv = pow(u, -1, mod)
            permuted = np.empty_like(table)
            permuted[(idx * u_inv) % mod] = table
        else:
            permuted = table.copy()
        if key in grouped:
            grouped[key] += permuted
        else:
            grouped[key] = permuted
    return grouped, n_units


def naive_joint_table(p: int, b: Tuple[int, int], gamma: Tuple[IntMat, IntMat], e: int,
                      budget: float = 1e8) -> np.ndarray:
    """
    Phase histogram of 1[p^e | P(b,T)] psi(tr(gamma T) / p^e) by joint enumeration of
    (T1, T2) mod p^e, for integral gamma and spherical support. Used to validate the
    fibered tables.
    """
    mod = p ** e
    total = float(mod) ** 8
    if total > budget:
        raise BudgetExceededError("joint enumeration", total, budget)
    entries = matrix_grid(mod)
    det1, ph1 = _det_phase(entries, gamma[0], mod, mod)
    det2, ph2 = _det_phase(entries, gamma[1], mod, mod)
    b1, b2 = int(b[0]) % mod, int(b[1]) % mod
    hist = np.zeros(mod, dtype=np.int64)
    for i in range(len(det1)):
        mask = (b1 * int(det1[i]) - b2 * det2) % mod == 0
        hist += np.bincount((int(ph1[i]) + ph2[mask]) % mod, minlength=mod)
    return hist


def det_histogram(modulus: int, weight: Optional[WeightFn] = None) -> np.ndarray:
    """Weighted pushforward of the uniform measure on M2(Z/modulus) under det."""
    entries = matrix_grid(modulus)
    a, b, c, d = entries
    det = (a * d - b * c) % modulus
    if weight is None:
        return np.bincount(det, minlength=modulus).astype(np.int64)
    w = weight(*entries)
    return np.rint(np.bincount(det, weights=w, minlength=modulus)).astype(np.int64)


def trace_phase_histogram(modulus: int, gamma: IntMat, weight: Optional[WeightFn] = None) -> np.ndarray:
    """Weighted histogram of tr(gamma r) mod modulus over r in M2(Z/modulus)."""
    entries = matrix_grid(modulus)
    _, phase = _det_phase(entries, gamma, 1, modulus)
    if weight is None:
        return np.bincount(phase, minlength=modulus).astype(np.int64)
    w = weight(*entries)
    return np.rint(np.bincount(phase, weights=w, minlength=modulus)).astype(np.int64)


def det_fibered_fourier(modulus: int, freqs: np.ndarray, weight: Optional[WeightFn] = None,
                        budget: float = 2e9) -> np.ndarray:
    """
    H[i, D] = sum over r in M2(Z/modulus) with det r = D of w(r) exp(-2 pi i k_i . r / modulus).

    k . r is the plain dot product in the entry order (11, 12, 21, 22). The (det, phase)
    histograms are exact integers; only the final contraction with the roots is in floats.
    A joint transform over pairs restricted by a determinant condition C[D1, D2] is then
    H1 @ C @ H2.T.
    """
    freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, 4) % modulus
    n = len(freqs)
    cost = float(modulus) ** 4 * max(n, 1)
    if cost > budget:
        raise BudgetExceededError("det-fibered Fourier table", cost, budget)
    r = np.arange(modulus, dtype=np.int64)
    b, c, d = (m.ravel() for m in np.meshgrid(r, r, r, indexing="ij"))
    counts = np.zeros((n, modulus * modulus), dtype=np.int64)
    for a in range(modulus):
        det = (a * d - b * c) % modulus
        w = weight(np.full_like(b, a), b, c, d) if weight is not None else None
        if w is not None and not np.any(w):
            continue
        for i, (k11, k12, k21, k22) in enumerate(freqs):
            phase = (k11 * a + k12 * b + k21 * c + k22 * d) % modulus
            flat = det * modulus + phase
            if w is None:
                counts[i] += np.bincount(flat, minlength=modulus * modulus)
            else:
                counts[i] += np.rint(np.bincount(flat, weights=w, minlength=modulus * modulus)).astype(np.int64)
    roots = np.exp(-2j * np.pi * np.arange(modulus) / modulus)
    logger.debug(f"det-fibered table mod {modulus}: {n} frequencies")
    return counts.reshape(n, modulus, modulus) @ roots


def require(condition: bool, message: str) -> None:
    if not condition:
        raise PreconditionError(message)
