#!/usr/bin/env python3
"""Regenerate src/unicode_data.cpp from the Python Unicode database.

The word property used for tokenization is the one matched by Python's
re pattern \\w (alphanumeric characters plus the underscore), and the
lowercase mapping is the one performed by str.lower(). Run this with the
CPython version you want to pin and commit the result.
"""

import re
import sys
import unicodedata

WORD = re.compile(r"\w", re.UNICODE)


def word_ranges():
    ranges = []
    start = None
    for cp in range(0x110000):
        ch = chr(cp)
        is_word = bool(WORD.match(ch))
        if is_word and start is None:
            start = cp
        elif not is_word and start is not None:
            ranges.append((start, cp - 1))
            start = None
    if start is not None:
        ranges.append((start, 0x10FFFF))
    return ranges


def lower_entries():
    entries = []
    for cp in range(0x110000):
        ch = chr(cp)
        low = ch.lower()
        if low == ch:
            continue
        cps = [ord(c) for c in low]
        assert 1 <= len(cps) <= 2, f"unexpected expansion at U+{cp:04X}"
        entries.append((cp, cps))
    return entries


def main():
    ranges = word_ranges()
    entries = lower_entries()
    out = sys.stdout
    out.write("// Generated by tools/gen_unicode_tables.py -- do not edit by hand.\n")
    out.write('// Source: CPython %s, Unicode %s.\n\n' % (
        sys.version.split()[0], unicodedata.unidata_version))
    out.write('#include "pine/unicode.h"\n\n')
    out.write("#include <algorithm>\n#include <cstdint>\n\n")
    out.write("namespace pine::uni {\n\n")
    out.write('const char kUnicodeVersion[] = "%s";\n\n' % unicodedata.unidata_version)
    out.write("namespace {\n\n")
    out.write("struct Range { char32_t lo; char32_t hi; };\n\n")
    out.write("constexpr Range kWordRanges[] = {\n")
    for lo, hi in ranges:
        out.write("    {0x%X, 0x%X},\n" % (lo, hi))
    out.write("};\n\n")
    out.write("struct LowerEntry { char32_t cp; char32_t to[2]; };\n\n")
    out.write("constexpr LowerEntry kLowerTable[] = {\n")
    for cp, cps in entries:
        to = cps + [0] * (2 - len(cps))
        out.write("    {0x%X, {0x%X, 0x%X}},\n" % (cp, to[0], to[1]))
    out.write("};\n\n")
    out.write("}  // namespace\n\n")
    out.write("""bool is_word(char32_t cp) {
    auto it = std::upper_bound(
        std::begin(kWordRanges), std::end(kWordRanges), cp,
        [](char32_t c, const Range& r) { return c < r.lo; });
    return it != std::begin(kWordRanges) && cp <= std::prev(it)->hi;
}

void append_lower(char32_t cp, std::u32string& out) {
    auto it = std::lower_bound(
        std::begin(kLowerTable), std::end(kLowerTable), cp,
        [](const LowerEntry& e, char32_t c) { return e.cp < c; });
    if (it == std::end(kLowerTable) || it->cp != cp) {
        out.push_back(cp);
        return;
    }
    out.push_back(it->to[0]);
    if (it->to[1] != 0) {
        out.push_back(it->to[1]);
    }
}

}  // namespace pine::uni
""")


if __name__ == "__main__":
    main()
