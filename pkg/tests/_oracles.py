"""Reference arithmetic for the tests, written separately from the
package so the two implementations check each other."""

from __future__ import annotations


def is_prime(n: int) -> bool:
    # deterministic Miller-Rabin witness set, valid far past 64 bits
    if n < 2:
        return False
    for sp in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % sp == 0:
            return n == sp
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def ec_add(p: int, A, B):
    if A is None:
        return B
    if B is None:
        return A
    (x1, y1), (x2, y2) = A, B
    if x1 == x2 and (y1 + y2) % p == 0:
        return None
    if A == B:
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def ec_mul(p: int, k: int, A):
    R = None
    while k:
        if k & 1:
            R = ec_add(p, R, A)
        A = ec_add(p, A, A)
        k >>= 1
    return R


def on_curve(p: int, A) -> bool:
    x, y = A
    return (y * y - (x * x * x + x)) % p == 0


def fp2_mul(p: int, a, b):
    (ar, ai), (br, bi) = a, b
    return ((ar * br - ai * bi) % p, (ar * bi + ai * br) % p)


def fp2_pow(p: int, a, k: int):
    r = (1, 0)
    while k:
        if k & 1:
            r = fp2_mul(p, r, a)
        a = fp2_mul(p, a, a)
        k >>= 1
    return r
