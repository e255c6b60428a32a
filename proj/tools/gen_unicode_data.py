#!/usr/bin/env python3
"""Regenerates src/unicode_data.cpp from Python's unicodedata tables."""
import string
import sys
import unicodedata


def ranges(cps):
    out = []
    for cp in sorted(cps):
        if out and out[-1][1] + 1 == cp:
            out[-1][1] = cp
        else:
            out.append([cp, cp])
    return out


punct = {ord(c) for c in string.punctuation}
lower = []
for cp in range(0x110000):
    ch = chr(cp)
    if unicodedata.category(ch).startswith("P"):
        punct.add(cp)
    lo = ch.lower()
    if len(lo) == 1 and lo != ch:
        lower.append((cp, ord(lo)))

out = [
    "// Generated by tools/gen_unicode_data.py (Unicode %s). Do not edit." % unicodedata.unidata_version,
    "",
    '#include "unicode_data.hpp"',
    "",
    "namespace topicforge::unicode::detail {",
    "",
    "const std::vector<CodepointRange> kPunctuationRanges = {",
]
out += ["    {0x%04X, 0x%04X}," % (a, b) for a, b in ranges(punct)]
out += ["};", "", "const std::vector<CaseMapping> kLowercaseMappings = {"]
out += ["    {0x%04X, 0x%04X}," % p for p in lower]
out += ["};", "", "}  // namespace topicforge::unicode::detail", ""]
sys.stdout.write("\n".join(out))
