#!/usr/bin/env python3
"""Brute-force enumeration of the 22 ladder entries and their structural classes.

Groups follow the default order g1=(1,1), g2=(1,2), g3=(2,1), g4=(2,2) where the
pair is (level of factor 1, level of factor 2). Each entry is reduced to the set
of its loading columns; two entries are equivalent when those sets are equal.
"""
import itertools

GROUPS = [(0, 0), (0, 1), (1, 0), (1, 1)]


def col(pred):
    return tuple(1 if pred(l1, l2) else 0 for (l1, l2) in GROUPS)


def entries():
    out = [("M0", ()), ("M1", tuple(col(lambda a, b, g=g: (a, b) == g) for g in GROUPS))]
    ones = col(lambda a, b: True)
    for b1, b2 in itertools.product((0, 1), repeat=2):
        out.append(("M2", (ones,)))
    for b1 in (0, 1):
        out.append(("M3", (ones, col(lambda a, b: a != b1))))
    for b2 in (0, 1):
        out.append(("M4", (ones, col(lambda a, b: b != b2))))
    for b1, b2 in itertools.product((0, 1), repeat=2):
        out.append(("M5", (ones, col(lambda a, b: a != b1), col(lambda a, b: b != b2))))
    for first, b1, b2 in itertools.product((0, 1), (0, 1), (0, 1)):
        def rel(a, b):
            # levels of (first factor, second factor) relative to their bases
            x, y = (a != b1, b != b2)
            return (x, y) if first == 0 else (y, x)
        out.append(("M6", (ones,
                           col(lambda a, b: rel(a, b)[0]),
                           col(lambda a, b: not rel(a, b)[0] and rel(a, b)[1]),
                           col(lambda a, b: rel(a, b)[0] and rel(a, b)[1]))))
    return out


if __name__ == "__main__":
    ladder = entries()
    classes = []
    for fam, cols in ladder:
        key = frozenset(cols)
        for c in classes:
            if c[0] == key:
                c[1].append(fam)
                break
        else:
            classes.append((key, [fam]))
    print("entries:", len(ladder))
    print("classes:", len(classes))
    print("class sizes:", [len(c[1]) for c in classes])
