"""GF(2^8) arithmetic with primitive polynomial x^8+x^4+x^3+x^2+1 (0x11D).

Polynomials are lists of ints, highest degree first, which matches the
order codewords are transmitted in.
"""

from __future__ import annotations

import numpy as np

PRIMITIVE = 0x11D

EXP = [0] * 512
LOG = [0] * 256
_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= PRIMITIVE
for _i in range(255, 512):
    EXP[_i] = EXP[_i - 255]
del _x, _i


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return EXP[(LOG[a] - LOG[b]) % 255]


def inv(a: int) -> int:
    return div(1, a)


def pow_(a: int, n: int) -> int:
    if a == 0:
        return 0 if n else 1
    return EXP[(LOG[a] * n) % 255]


def alpha_pow(n: int) -> int:
    return EXP[n % 255]


def mul_table() -> np.ndarray:
    """Full 256x256 product table."""
    log = np.array(LOG)
    exp = np.array(EXP)
    table = exp[(log[:, None] + log[None, :])]
    table[0, :] = 0
    table[:, 0] = 0
    return table.astype(np.uint8)


def poly_scale(p: list[int], s: int) -> list[int]:
    return [mul(c, s) for c in p]


def poly_add(p: list[int], q: list[int]) -> list[int]:
    n = max(len(p), len(q))
    out = [0] * n
    for i, c in enumerate(p):
        out[i + n - len(p)] = c
    for i, c in enumerate(q):
        out[i + n - len(q)] ^= c
    return out


def poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for j, b in enumerate(q):
        if b == 0:
            continue
        lb = LOG[b]
        for i, a in enumerate(p):
            if a:
                out[i + j] ^= EXP[LOG[a] + lb]
    return out


def poly_eval(p: list[int], x: int) -> int:
    y = 0
    for c in p:
        y = mul(y, x) ^ c
    return y
