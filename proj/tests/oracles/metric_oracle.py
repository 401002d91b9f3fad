#!/usr/bin/env python3
"""Independent reference values for the caption-metric micro-corpora.

Written from the textbook definitions with collections.Counter; shares no code
with the C++ implementation. Run it to regenerate the constants frozen in
tests/unit/test_metrics.cpp and tests/acceptance/acceptance_main.cpp.
"""
import math
from collections import Counter

CORPORA = {
    "A": (
        ["the cat sat on the mat", "a dog runs in the park", "a red square left-of a blue circle"],
        [["the cat is on the mat", "there is a cat on the mat"],
         ["a dog is running in a park"],
         ["a red square left-of a blue circle", "a blue circle right-of a red square"]],
    ),
    "B": (
        ["the cat sat", "a b c d", "x y"],
        [["the cat sat down"], ["a c d", "a b d"], ["x y z", "y x"]],
    ),
    "C": (
        ["a red square", "a blue circle above a green star", "a yellow triangle below a red circle"],
        [["a red square"],
         ["a blue circle above a green star", "a green star below a blue circle"],
         ["a yellow triangle below a blue circle"]],
    ),
}


def grams(words, n):
    return Counter(tuple(words[i:i + n]) for i in range(len(words) - n + 1))


def corpus_bleu(cands, refs, n):
    hits = [0] * n
    tot = [0] * n
    c_len = r_len = 0
    for c, rs in zip(cands, refs):
        c_len += len(c)
        r_len += min((abs(len(r) - len(c)), len(r)) for r in rs)[1]
        for k in range(1, n + 1):
            cg = grams(c, k)
            best = Counter()
            for r in rs:
                best |= grams(r, k)  # elementwise max
            hits[k - 1] += sum(min(v, best[g]) for g, v in cg.items())
            tot[k - 1] += sum(cg.values())
    if any(h == 0 for h in hits):
        return 0.0
    bp = 1.0 if c_len >= r_len else math.exp(1 - r_len / c_len)
    return bp * math.exp(sum(math.log(h / t) for h, t in zip(hits, tot)) / n)


def lcs(a, b):
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            table[i + 1][j + 1] = table[i][j] + 1 if x == y else max(table[i][j + 1], table[i + 1][j])
    return table[-1][-1]


def rouge(c, rs, beta=1.2):
    p = max(lcs(c, r) / len(c) for r in rs)
    r_ = max(lcs(c, r) / len(r) for r in rs)
    if p == 0 or r_ == 0:
        return 0.0
    return (1 + beta ** 2) * p * r_ / (r_ + beta ** 2 * p)


def cider(cands, refs, sigma=6.0):
    df = Counter()
    for rs in refs:
        df.update(set(g for r in rs for n in range(1, 5) for g in grams(r, n)))
    big_n = math.log(len(refs))

    def vec(words):
        v = [dict() for _ in range(4)]
        for n in range(1, 5):
            for g, tf in grams(words, n).items():
                v[n - 1][g] = tf * (big_n - math.log(max(1.0, df[g])))
        norms = [math.sqrt(sum(x * x for x in d.values())) for d in v]
        return v, norms, max(len(words) - 1, 0)

    per = []
    for c, rs in zip(cands, refs):
        hv, hn, hl = vec(c)
        acc = [0.0] * 4
        for r in rs:
            rv, rn, rl = vec(r)
            pen = math.exp(-((hl - rl) ** 2) / (2 * sigma ** 2))
            for k in range(4):
                s = sum(min(w, rv[k][g]) * rv[k][g] for g, w in hv[k].items() if g in rv[k])
                if hn[k] and rn[k]:
                    s /= hn[k] * rn[k]
                acc[k] += s * pen
        per.append(10.0 * sum(acc) / 4 / len(rs))
    return sum(per) / len(per), per


for name, (cands, refs) in CORPORA.items():
    c = [s.split() for s in cands]
    r = [[s.split() for s in rs] for rs in refs]
    b = [corpus_bleu(c, r, n) for n in range(1, 5)]
    rl = sum(rouge(x, y) for x, y in zip(c, r)) / len(c)
    cd, per = cider(c, r)
    print(f"corpus {name}")
    print("  bleu   = {" + ", ".join(f"{x:.17g}" for x in b) + "}")
    print(f"  rouge  = {rl:.17g}")
    print(f"  cider  = {cd:.17g}")
    print("  per    = {" + ", ".join(f"{x:.17g}" for x in per) + "}")
