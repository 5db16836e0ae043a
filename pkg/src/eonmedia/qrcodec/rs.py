"""Reed-Solomon over GF(256) with generator roots alpha^0 .. alpha^(n-1).

Errors-and-erasures decoding: Berlekamp-Massey seeded with the erasure
locator, Chien search, Forney magnitudes, then a syndrome re-check so a
wrong codeword is never returned silently.
"""

from __future__ import annotations

from functools import cache
from collections.abc import Iterable, Sequence

import numpy as np

from . import gf

_EXP = np.array(gf.EXP[:255], dtype=np.int64)
_LOG = np.array(gf.LOG, dtype=np.int64)


class UncorrectableError(ValueError):
    """Codeword could not be corrected. ``syndromes`` holds the received syndromes."""

    def __init__(self, message: str, syndromes: Sequence[int] = ()):
        nz = sum(1 for s in syndromes if s)
        super().__init__(f"uncorrectable: {message} ({nz}/{len(syndromes)} non-zero syndromes)")
        self.syndromes = list(syndromes)


@cache
def generator(nparity: int) -> tuple[int, ...]:
    g = [1]
    for i in range(nparity):
        g = gf.poly_mul(g, [1, gf.alpha_pow(i)])
    return tuple(g)


def rs_encode(data: bytes | Sequence[int], nparity: int) -> bytes:
    """Parity bytes: remainder of data(x) * x^nparity divided by the generator."""
    if nparity < 1:
        raise ValueError("nparity must be >= 1")
    if len(data) == 0:
        raise ValueError("data must be non-empty")
    gen = generator(nparity)
    log_gen = [gf.LOG[c] for c in gen[1:]]
    rem = [0] * nparity
    for byte in data:
        factor = byte ^ rem[0]
        rem = rem[1:] + [0]
        if factor:
            lf = gf.LOG[factor]
            for i, lg in enumerate(log_gen):
                rem[i] ^= gf.EXP[lf + lg]
    return bytes(rem)


def syndromes(codeword: Sequence[int], nparity: int) -> list[int]:
    """S_j = c(alpha^j) for j = 0 .. nparity-1."""
    c = np.frombuffer(bytes(codeword), dtype=np.uint8).astype(np.int64)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return [0] * nparity
    n = len(c)
    logs = _LOG[c[nz]]
    powers = n - 1 - nz
    exps = (logs[None, :] + np.arange(nparity)[:, None] * powers[None, :]) % 255
    return np.bitwise_xor.reduce(_EXP[exps], axis=1).tolist()


def _eval_low(p: list[int], x: int) -> int:
    # p lowest degree first
    y = 0
    for c in reversed(p):
        y = gf.mul(y, x) ^ c
    return y


def rs_correct(codeword: bytes | Sequence[int], nparity: int, erasures: Iterable[int] = ()) -> tuple[bytes, list[int]]:
    """Return the corrected codeword and the positions that were changed."""
    cw = list(codeword)
    n = len(cw)
    if n > 255:
        raise ValueError("codeword longer than 255 symbols")
    erasures = sorted(set(erasures))
    if any(not 0 <= e < n for e in erasures):
        raise ValueError("erasure position out of range")
    if len(erasures) > nparity:
        raise ValueError(f"{len(erasures)} erasures exceed {nparity} parity symbols")
    synd = syndromes(cw, nparity)
    if not any(synd):
        return bytes(cw), []

    f = len(erasures)
    # locators are lowest-degree-first here
    gamma = [1]
    for pos in erasures:
        gamma = _mul_low(gamma, [1, gf.alpha_pow(n - 1 - pos)])
    lam = list(gamma)
    b = list(gamma)
    big_l = f
    for r in range(f, nparity):
        delta = 0
        for j, c in enumerate(lam):
            if r - j < 0:
                break
            delta ^= gf.mul(c, synd[r - j])
        xb = [0] + b
        if delta == 0:
            b = xb
        elif 2 * big_l <= r + f:
            t = _add_low(lam, [gf.mul(delta, c) for c in xb])
            inv_delta = gf.inv(delta)
            b = [gf.mul(inv_delta, c) for c in lam]
            big_l = r + 1 + f - big_l
            lam = t
        else:
            lam = _add_low(lam, [gf.mul(delta, c) for c in xb])
            b = xb
    while len(lam) > 1 and lam[-1] == 0:
        lam.pop()
    degree = len(lam) - 1
    n_errors = degree - f
    if n_errors < 0 or 2 * n_errors + f > nparity:
        raise UncorrectableError(f"locator degree {degree} beyond capacity", synd)

    omega = _mul_low(synd, lam)[:nparity]
    dlam = [lam[j] if j % 2 == 1 else 0 for j in range(1, len(lam))]  # formal derivative

    positions = []
    for pos in range(n):
        x = gf.alpha_pow(n - 1 - pos)
        x_inv = gf.inv(x)
        if _eval_low(lam, x_inv) == 0:
            denom = _eval_low(dlam, x_inv)
            if denom == 0:
                raise UncorrectableError("repeated locator root", synd)
            magnitude = gf.mul(x, gf.div(_eval_low(omega, x_inv), denom))
            cw[pos] ^= magnitude
            positions.append(pos)
    if len(positions) != degree:
        raise UncorrectableError(f"found {len(positions)} locator roots, expected {degree}", synd)
    if any(syndromes(cw, nparity)):
        raise UncorrectableError("residual syndrome after correction", synd)
    changed = [p for p in positions if cw[p] != codeword[p]]
    return bytes(cw), changed


def rs_decode(codeword: bytes | Sequence[int], nparity: int, erasures: Iterable[int] = ()) -> bytes:
    """Corrected message bytes (codeword without its parity tail)."""
    fixed, _ = rs_correct(codeword, nparity, erasures)
    return fixed[: len(fixed) - nparity]


def _mul_low(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, c in enumerate(q):
                if c:
                    out[i + j] ^= gf.mul(a, c)
    return out


def _add_low(p: list[int], q: list[int]) -> list[int]:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] ^= c
    return out
