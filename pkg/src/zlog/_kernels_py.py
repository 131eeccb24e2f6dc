"""Pure-Python (numpy) implementations of the hot kernels.

Two operations dominate runtime:

* ``cloud_eval`` -- evaluating the meromorphic tail
  ``-sum_m c_m (mu_m z)^r0 / (1 - mu_m z)`` over many points ``z`` at once
  (grid rendering calls this with up to ~1e6 points against ~1e4 terms);

* brute-force point counting over small finite fields, where every point of
  ``F_q^n`` (or of the normalized projective charts) is plugged into a system
  of polynomials.

The compiled twin of this module is ``zlog._kernels`` (Cython); the selector
``zlog.kernels`` picks whichever is available.  Both implementations must be
numerically identical: the pure versions are the reference.

Finite-field elements are encoded as integer indices ``0 .. q-1``; the base-p
digits of the index are the coefficients of the residue polynomial, least
significant digit = constant term.  Index 0 is the zero element, index 1 the
one element, and for prime fields the encoding is plain ``Z/p``.
"""

from __future__ import annotations

import numpy as np

# Points per chunk in the vectorized enumerators / cloud evaluation.  Keeps
# peak memory for the (chunk x terms) temporaries in the tens of MB.
_CHUNK = 1 << 13

IMPLEMENTATION = "python"


def cloud_eval(coeffs: np.ndarray, mus: np.ndarray, r0: int, z: np.ndarray) -> np.ndarray:
    """Evaluate ``-sum_m coeffs[m] * (mus[m]*z)^r0 / (1 - mus[m]*z)`` per point.

    ``coeffs`` and ``mus`` are complex128 arrays of equal length M; ``z`` is a
    complex128 array of arbitrary length.  Points with ``mus[m]*z == 1``
    produce inf/nan in the output (callers keep clear of poles).
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    mus = np.ascontiguousarray(mus, dtype=np.complex128)
    z = np.ascontiguousarray(z, dtype=np.complex128)
    out = np.empty(z.shape[0], dtype=np.complex128)
    if coeffs.shape[0] == 0:
        out[:] = 0.0
        return out
    for lo in range(0, z.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, z.shape[0])
        w = z[lo:hi, None] * mus[None, :]
        num = w**r0
        np.divide(num, 1.0 - w, out=num)
        out[lo:hi] = -(num @ coeffs)
    return out


# ---------------------------------------------------------------------------
# finite-field digit arithmetic, vectorized over point chunks
# ---------------------------------------------------------------------------


def _reduction_rows(p: int, k: int, modulus: tuple) -> np.ndarray:
    """Rows red[d-k] = coefficients of x^d mod (modulus) for d = k .. 2k-2.

    ``modulus`` is the ascending coefficient tuple of a monic degree-k
    polynomial over F_p (length k+1, last entry 1).
    """
    if k == 1:
        return np.zeros((0, 1), dtype=np.int64)
    rows = np.zeros((k - 1, k), dtype=np.int64)
    # x^k == -(f_0 + f_1 x + ... + f_{k-1} x^{k-1})
    cur = [(-modulus[i]) % p for i in range(k)]
    rows[0] = cur
    for d in range(k + 1, 2 * k - 1):
        # multiply by x: shift, then reduce the overflowing x^k term
        top = cur[k - 1]
        cur = [0] + cur[: k - 1]
        if top:
            for i in range(k):
                cur[i] = (cur[i] + top * rows[0][i]) % p
        rows[d - k] = cur
    return rows


def _idx_to_digits(idx: np.ndarray, p: int, k: int) -> np.ndarray:
    """Decode element indices (shape (N,)) into digit arrays (shape (N, k))."""
    digits = np.empty(idx.shape + (k,), dtype=np.int64)
    rest = idx.astype(np.int64)
    for j in range(k):
        digits[..., j] = rest % p
        rest = rest // p
    return digits


def _digit_mul(a: np.ndarray, b: np.ndarray, p: int, k: int, red: np.ndarray) -> np.ndarray:
    """Multiply two (N, k) digit arrays modulo p and the field modulus."""
    if k == 1:
        return (a * b) % p
    conv = np.zeros((a.shape[0], 2 * k - 1), dtype=np.int64)
    for i in range(k):
        ai = a[:, i]
        for j in range(k):
            conv[:, i + j] += ai * b[:, j]
    conv %= p
    out = conv[:, :k].copy()
    for d in range(2 * k - 2, k - 1, -1):
        top = conv[:, d]
        out += top[:, None] * red[d - k][None, :]
    return out % p


def _digit_pow(base: np.ndarray, e: int, p: int, k: int, red: np.ndarray) -> np.ndarray:
    """Raise a (N, k) digit array to the integer power e >= 0 (square & multiply)."""
    n = base.shape[0]
    result = np.zeros((n, k), dtype=np.int64)
    result[:, 0] = 1
    if e == 0:
        return result
    acc = base.copy()
    while True:
        if e & 1:
            result = _digit_mul(result, acc, p, k, red)
        e >>= 1
        if not e:
            return result
        acc = _digit_mul(acc, acc, p, k, red)


def count_zero_locus(
    p: int,
    k: int,
    modulus: tuple,
    coef_idx: np.ndarray,
    exps: np.ndarray,
    eq_offsets: np.ndarray,
    fixed: tuple,
    nfree: int,
) -> int:
    """Count points where every equation vanishes.

    The first ``len(fixed)`` variables are pinned to the given element
    indices; the remaining ``nfree`` variables range over all q^nfree
    combinations (variable v of the free block takes index
    ``(point // q^v) % q``).  Equations are flattened: term t has coefficient
    element index ``coef_idx[t]`` and exponent vector ``exps[t]``;
    ``eq_offsets`` are the CSR-style boundaries of the equations.
    """
    q = p**k
    red = _reduction_rows(p, k, modulus)
    nvars = len(fixed) + nfree
    total = q**nfree
    count = 0
    fixed_digits = [_idx_to_digits(np.array([f], dtype=np.int64), p, k) for f in fixed]
    coef_digits = _idx_to_digits(coef_idx.astype(np.int64), p, k)
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        pts = np.arange(lo, hi, dtype=np.int64)
        n = hi - lo
        # digit arrays per variable for this chunk
        var_digits = []
        for v in range(nvars):
            if v < len(fixed):
                var_digits.append(np.broadcast_to(fixed_digits[v], (n, k)))
            else:
                j = v - len(fixed)
                idx = (pts // (q**j)) % q
                var_digits.append(_idx_to_digits(idx, p, k))
        alive = np.ones(n, dtype=bool)
        for e in range(len(eq_offsets) - 1):
            acc = np.zeros((n, k), dtype=np.int64)
            for t in range(eq_offsets[e], eq_offsets[e + 1]):
                term = np.broadcast_to(coef_digits[t : t + 1], (n, k)).copy()
                for v in range(nvars):
                    ev = int(exps[t, v])
                    if ev:
                        term = _digit_mul(term, _digit_pow(var_digits[v], ev, p, k, red), p, k, red)
                acc = (acc + term) % p
            alive &= ~acc.any(axis=1)
            if not alive.any():
                break
        count += int(alive.sum())
    return count
