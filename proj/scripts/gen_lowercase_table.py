#!/usr/bin/env python3
"""Regenerate src/lowercase_table.inc from the Python unicodedata tables.

Emits the Unicode simple lowercase mapping (UnicodeData.txt field 13) as a
sorted list of {code_point, lowercase} pairs.
"""
import sys
import unicodedata

pairs = []
for cp in range(0x110000):
    ch = chr(cp)
    low = ch.lower()
    if len(low) == 1 and low != ch:
        pairs.append((cp, ord(low)))
    elif len(low) > 1:
        # Full mapping differs (only U+0130 for lowercasing); use the simple form.
        simple = low[0]
        if simple != ch:
            pairs.append((cp, ord(simple)))

out = sys.stdout
out.write(f"// Generated by scripts/gen_lowercase_table.py (Unicode {unicodedata.unidata_version}).\n")
out.write("// clang-format off\n")
for i, (a, b) in enumerate(pairs):
    out.write(f"{{0x{a:05X}, 0x{b:05X}}},")
    out.write("\n" if i % 4 == 3 else " ")
out.write("\n")
