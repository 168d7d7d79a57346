#!/usr/bin/env python3
"""Regenerates src/punct_table.inc: code point ranges whose Unicode general
category is P* (punctuation) or S* (symbol). Run when bumping the Unicode
version; the output is committed so the C++ build has no Python dependency."""

import sys
import unicodedata

ranges = []
start = None
prev = None
for cp in range(0x110000):
    cat = unicodedata.category(chr(cp))
    if cat[0] in ("P", "S"):
        if start is None:
            start = cp
        prev = cp
    else:
        if start is not None:
            ranges.append((start, prev))
            start = None
if start is not None:
    ranges.append((start, prev))

out = sys.stdout
out.write("// Generated by tools/gen_punct_table.py (Unicode %s). Do not edit.\n"
          % unicodedata.unidata_version)
out.write("// Inclusive [first, last] ranges of general categories P* and S*.\n")
out.write("static constexpr PunctRange kPunctRanges[] = {\n")
for a, b in ranges:
    out.write("    {0x%05X, 0x%05X},\n" % (a, b))
out.write("};\n")
