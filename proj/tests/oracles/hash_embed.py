"""Independent re-implementation of the offline hash embedder.

Regenerates the frozen cosine values used in test_embed.cpp:
    python3 tests/oracles/hash_embed.py
"""

import math
import struct

MASK = (1 << 64) - 1


class MT19937_64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & MASK
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.index = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.index = 0

    def next(self):
        if self.index >= 312:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK


def fnv1a64(data, basis=0xCBF29CE484222325):
    h = basis
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK
    return h


def gaussians(seed, n):
    rng = MT19937_64(seed)
    out = []
    while len(out) < n:
        u1 = 0.0
        while u1 <= 0.0:
            u1 = (rng.next() >> 11) * 2.0**-53
        u2 = (rng.next() >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        out.append(r * math.cos(2 * math.pi * u2))
        out.append(r * math.sin(2 * math.pi * u2))
    return out[:n]


def tokenize(text):
    tokens, cur = [], bytearray()
    for b in text.encode("utf-8"):
        if b >= 0x80 or chr(b).isalnum():
            cur.append(b + 32 if 65 <= b <= 90 else b)
        elif cur:
            tokens.append(bytes(cur))
            cur = bytearray()
    if cur:
        tokens.append(bytes(cur))
    return tokens


def embed(text, dim, seed):
    basis = fnv1a64(struct.pack("<Q", seed))
    v = [0.0] * dim
    for tok in tokenize(text):
        g = gaussians(fnv1a64(tok, basis), dim)
        v = [a + b for a, b in zip(v, g)]
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def cosine(a, b):
    return sum(x * y for x, y in zip(a, b))


if __name__ == "__main__":
    seat = embed("chair seat", 256, 42)
    bench = embed("chair bench", 256, 42)
    xylo = embed("xylophone quartz", 256, 42)
    print("chair seat . chair bench      = %.17g" % cosine(seat, bench))
    print("chair seat . xylophone quartz = %.17g" % cosine(seat, xylo))
    print("chair d=8 s=42 first three    =", ["%.17g" % x for x in embed("chair", 8, 42)[:3]])
