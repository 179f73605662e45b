"""Slow, direct reference computations used to cross-check the library."""

import itertools


def all_words(alphabet, bound):
    out = []
    for k in range(bound + 1):
        out.extend("".join(w) for w in itertools.product(alphabet, repeat=k))
    return out


def maps_preserving(obj, semiring_size=2):
    """Every map obj -> S kept by a hand-written structure check."""
    n = obj.size
    out = []
    for vals in itertools.product(range(semiring_size), repeat=n):
        v = list(vals)
        kind = obj.kind.value
        if kind == "pos":
            ok = all(v[x] <= v[y] for x in range(n) for y in range(n) if obj.leq[x][y])
        elif kind == "jsl":
            ok = v[obj.bottom] == 0 and all(
                v[obj.join[x][y]] == max(v[x], v[y]) for x in range(n) for y in range(n))
        elif kind == "vect":
            p = obj.modulus
            c = obj.coords.tolist()
            ok = True
            for x in range(n):
                for y in range(n):
                    s = tuple((a + b) % p for a, b in zip(c[x], c[y]))
                    if v[c.index(list(s))] != (v[x] + v[y]) % p:
                        ok = False
        else:
            ok = True
        if ok:
            out.append(v)
    return out


def fold(table, unit, images, word, alphabet):
    x = unit
    for ch in word:
        x = table[x][images[alphabet.index(ch)]]
    return x


def marked_product_words(k, a, lang, word, add, mul, zero):
    acc = zero
    for i, ch in enumerate(word):
        if ch == a:
            acc = add(acc, mul(k(word[:i]), lang(word[i + 1:])))
    return acc


def jsl_ideals(obj):
    n = obj.size
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        s = {i for i in range(n) if bits[i]}
        if not s:
            continue
        down = all(y in s for x in s for y in range(n) if obj.join[x][y] == x)
        closed = all(obj.join[x][y] in s for x in s for y in s)
        if down and closed:
            out.append(s)
    return out


def kp_closure(pairs, m, n):
    ideals_m, ideals_n = jsl_ideals(m.carrier), jsl_ideals(n.carrier)
    out = set()
    for a in range(m.size):
        for b in range(n.size):
            if all(any(x not in i and y not in j for x, y in pairs)
                   for i in ideals_m if a not in i for j in ideals_n if b not in j):
                out.add((a, b))
    return out


def down_sets(leq):
    n = len(leq)
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        if all(bits[y] for x in range(n) if bits[x] for y in range(n) if leq[y][x]):
            out.append(bits)
    return out


def antichains(leq):
    n = len(leq)
    count = 0
    for bits in itertools.product((0, 1), repeat=n):
        s = [i for i in range(n) if bits[i]]
        if all(not leq[x][y] for x in s for y in s if x != y):
            count += 1
    return count


def boolean_expressions(atoms, depth, ops):
    """Value tuples of all expressions up to ``depth`` over the given atoms (tuples of 0/1)."""
    n = len(next(iter(atoms)))
    level = set(atoms) | {tuple([0] * n)}
    if "full" in ops:
        level.add(tuple([1] * n))
    for _ in range(depth):
        new = set(level)
        for x in level:
            if "compl" in ops:
                new.add(tuple(1 - v for v in x))
            for y in level:
                new.add(tuple(max(a, b) for a, b in zip(x, y)))
                if "inter" in ops:
                    new.add(tuple(min(a, b) for a, b in zip(x, y)))
        level = new
    return level
