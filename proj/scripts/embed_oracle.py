#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The Dockwright Authors
"""Reference hashed n-gram embedder.

Written separately from the C++ code. Its output is frozen into
tests/unit/embed_test.cpp; rerun it after any change to the feature scheme.
"""

import math
from collections import Counter

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def features(text: str, nmin=3, nmax=5, words=True):
    grams = Counter()
    for n in range(nmin, nmax + 1):
        for i in range(len(text) - n + 1):
            grams[text[i:i + n]] += 1
    feats = list(grams.items())
    if words:
        feats += list(Counter("w:" + w for w in text.split(" ") if w).items())
    return feats


def embed(text: str, dim=256):
    acc = [0.0] * dim
    for feat, tf in features(text):
        h = fnv1a64(feat.encode())
        sign = -1.0 if h >> 63 else 1.0
        acc[h % dim] += sign * math.log1p(tf)
    norm = math.sqrt(sum(v * v for v in acc))
    return [v / norm for v in acc] if norm else acc


def cosine(a, b):
    return sum(x * y for x, y in zip(a, b))


if __name__ == "__main__":
    t1 = "unable to locate package python pip"
    t2 = "unable to locate package curl"
    t3 = "your ruby version is 2 6 3"
    for s in ["", "a", "foobar", "w:pip"]:
        print(f"fnv1a64({s!r}) = {fnv1a64(s.encode())}")
    e1, e2, e3 = embed(t1), embed(t2), embed(t3)
    print(f"cos(t1,t2) = {cosine(e1, e2):.17g}")
    print(f"cos(t1,t3) = {cosine(e1, e3):.17g}")
    print(f"cos(t2,t3) = {cosine(e2, e3):.17g}")
    nz = [(i, v) for i, v in enumerate(e1) if v != 0.0][:4]
    for i, v in nz:
        print(f"t1[{i}] = {v:.17g}")
    print("t1 nonzero buckets:", sum(1 for v in e1 if v != 0.0))
