#!/usr/bin/env python3
"""Regenerates include/tokscan/unicode_data.hpp from the unicodedata module.

Emits codepoint range tables for the general categories L* and N* plus a
simple case-fold mapping (single-codepoint foldings only; multi-codepoint
full foldings fall back to the single-codepoint lowercase, else identity).

Usage: python3 tools/gen_unicode_tables.py > include/tokscan/unicode_data.hpp
"""

import sys
import unicodedata

MAX_CP = 0x110000


def ranges(pred):
    out = []
    lo = None
    for cp in range(MAX_CP):
        if pred(cp):
            if lo is None:
                lo = cp
        elif lo is not None:
            out.append((lo, cp - 1))
            lo = None
    if lo is not None:
        out.append((lo, MAX_CP - 1))
    return out


def category(cp):
    return unicodedata.category(chr(cp))


def simple_fold(cp):
    c = chr(cp)
    f = c.casefold()
    if len(f) == 1:
        return ord(f)
    l = c.lower()
    if len(l) == 1:
        return ord(l)
    return cp


def emit(name, rows, cols):
    print(f"inline constexpr uint32_t {name}[][2] = {{")
    for i in range(0, len(rows), cols):
        chunk = ", ".join("{0x%X, 0x%X}" % r for r in rows[i : i + cols])
        print(f"    {chunk},")
    print("};")
    print()


def main():
    letters = ranges(lambda cp: category(cp).startswith("L"))
    numbers = ranges(lambda cp: category(cp).startswith("N"))
    folds = [(cp, simple_fold(cp)) for cp in range(MAX_CP) if simple_fold(cp) != cp]

    print("// Generated by tools/gen_unicode_tables.py -- do not edit by hand.")
    print(f"// Source: Python unicodedata, UCD {unicodedata.unidata_version}")
    print("#pragma once")
    print()
    print("#include <cstdint>")
    print()
    print("namespace tokscan::unicode::data {")
    print()
    emit("kLetterRanges", letters, 6)
    emit("kNumberRanges", numbers, 6)
    emit("kSimpleFolds", folds, 6)
    print("} // namespace tokscan::unicode::data")


if __name__ == "__main__":
    sys.exit(main())
