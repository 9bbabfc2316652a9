#!/usr/bin/env python3
"""Regenerate crates/core/data/spacegroups.txt from pyxtal's Wyckoff table.

Usage: gen_spacegroups.py path/to/pyxtal/database > spacegroups.txt

Ops are the full general-position coset list (centering expanded). Wyckoff
site expressions keep one representative per centering coset. All constants
are reduced to [0, 1) and written as exact fractions.
"""
import ast
import csv
import json
import sys
from fractions import Fraction

VARS = "xyz"
CENTERING = {
    "P": [],
    "A": [(0, Fraction(1, 2), Fraction(1, 2))],
    "B": [(Fraction(1, 2), 0, Fraction(1, 2))],
    "C": [(Fraction(1, 2), Fraction(1, 2), 0)],
    "I": [(Fraction(1, 2),) * 3],
    "F": [(0, Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), 0, Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2), 0)],
    "R": [(Fraction(2, 3), Fraction(1, 3), Fraction(1, 3)), (Fraction(1, 3), Fraction(2, 3), Fraction(2, 3))],
}


def crystal_system(n):
    for hi, name in [(2, "triclinic"), (15, "monoclinic"), (74, "orthorhombic"), (142, "tetragonal"),
                     (167, "trigonal"), (194, "hexagonal"), (230, "cubic")]:
        if n <= hi:
            return name


def parse_component(text):
    text = text.replace(" ", "")
    coeffs = [Fraction(0)] * 3
    const = Fraction(0)
    i = 0
    while i < len(text):
        sign = 1
        if text[i] in "+-":
            sign = -1 if text[i] == "-" else 1
            i += 1
        j = i
        while j < len(text) and (text[j].isdigit() or text[j] in "./"):
            j += 1
        num = Fraction(text[i:j]) if j > i else None
        if j < len(text) and text[j] in VARS:
            coeffs[VARS.index(text[j])] += sign * (num if num is not None else 1)
            j += 1
        else:
            const += sign * num
        i = j
    return coeffs, const


def parse_triplet(text):
    parts = [parse_component(c) for c in text.split(",")]
    assert len(parts) == 3, text
    return tuple(tuple(p[0]) for p in parts), tuple(p[1] % 1 for p in parts)


def fmt_frac(f):
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def fmt_component(coeffs, const):
    out = ""
    for c, v in zip(coeffs, VARS):
        if c == 0:
            continue
        sign = "-" if c < 0 else ("+" if out else "")
        mag = abs(c)
        out += sign + ("" if mag == 1 else fmt_frac(mag)) + v
    if const != 0 or not out:
        sign = "-" if const < 0 else ("+" if out else "")
        out += sign + fmt_frac(abs(const))
    return out


def fmt_triplet(t):
    m, o = t
    return ", ".join(fmt_component(m[i], o[i]) for i in range(3))


def main():
    db = sys.argv[1]
    with open(f"{db}/symbols.json") as fh:
        symbols = json.load(fh)["space_group"]
    rows = list(csv.reader(open(f"{db}/wyckoff_list.csv")))[1:]
    letters = "abcdefghijklmnopqrstuvwxyzA"
    for row in rows:
        n = int(row[0])
        if n == 0:
            continue
        sym = symbols[n - 1]
        wps = ast.literal_eval(row[1])
        cents = CENTERING[sym[0]]
        ops = [parse_triplet(t) for t in wps[0]]
        print(f"SG {n} {sym} {crystal_system(n)} {len(ops)}")
        for op in ops:
            print(fmt_triplet(op))
        entries = []
        for idx, wp in enumerate(wps):
            letter = letters[len(wps) - 1 - idx]
            kept = []
            for t in map(parse_triplet, wp):
                dup = False
                for k in kept:
                    if k[0] != t[0]:
                        continue
                    d = tuple((t[1][i] - k[1][i]) % 1 for i in range(3))
                    if any(d == tuple(Fraction(x) for x in c) for c in cents):
                        dup = True
                        break
                if not dup:
                    kept.append(t)
            assert len(kept) * (len(cents) + 1) == len(wp), (n, letter)
            entries.append((len(wp), letter, kept))
        entries.sort(key=lambda e: (-e[0], e[1]))
        print(f"WYCKOFF {len(entries)}")
        for mult, letter, kept in entries:
            print(f"{mult}{letter} " + ";".join(fmt_triplet(t) for t in kept))


if __name__ == "__main__":
    main()
