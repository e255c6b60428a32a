"""Independent evaluation of the hand-checked values frozen into the unit and acceptance tests."""
import math
from fractions import Fraction

# class-based weighting on the two-class toy corpus
tf = {0: {"apple": 2, "banana": 1}, 1: {"banana": 1, "cherry": 1}}
total = sum(sum(r.values()) for r in tf.values())
A = total / len(tf)
glob = {}
for r in tf.values():
    for t, c in r.items():
        glob[t] = glob.get(t, 0) + c
for c, r in tf.items():
    for t, v in sorted(r.items()):
        print(f"ctfidf c{c} {t}: {v * math.log(1 + A / glob[t]):.12f}")
print(f"A = {A}")

# per-timestep weighting: banana count 3 in the bin, global tf 2, A 2.5
print(f"timestep banana: {3 * math.log(1 + 2.5 / 2):.12f}")

# classic tf-idf, docs [a b], [a]
print(f"tfidf b,d1: {1 * math.log(2 / 1):.12f}")

# NPMI on whole-document windows {a,b},{a,b},{a},{b}
wins = [{"a", "b"}, {"a", "b"}, {"a"}, {"b"}]
pa = sum("a" in w for w in wins) / len(wins)
pb = sum("b" in w for w in wins) / len(wins)
pab = sum({"a", "b"} <= w for w in wins) / len(wins)
eps = 1e-12
print(f"npmi toy: {math.log((pab + eps) / (pa * pb)) / -math.log(pab + eps):.12f}")

# diversity: 3 topics of 5 words sharing a,b,c,d
topics = [["a", "b", "c", "d", x] for x in "xyz"]
u = set().union(*map(set, topics))
print(f"td: {Fraction(len(u), sum(map(len, topics)))} = {len(u) / 15:.12f}")

# smoothing: [1,1] then [3,1]
prev = [v / 2 for v in [1, 1]]
cur = [v / 4 for v in [3, 1]]
print("smoothed:", [(p + c) / 2 for p, c in zip(prev, cur)])
