#!/usr/bin/env python3
"""Regenerate include/qmcsa/detail/joe_kuo_table.hpp from data/new-joe-kuo-1111.txt."""
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
text = (root / "data" / "new-joe-kuo-1111.txt").read_text()
out = root / "include" / "qmcsa" / "detail" / "joe_kuo_table.hpp"
out.write_text(
    "#pragma once\n\n"
    "// Generated by tools/embed_direction_numbers.py from data/new-joe-kuo-1111.txt.\n"
    "// Do not edit by hand.\n\n"
    "#include <string_view>\n\n"
    "namespace qmcsa::detail {\n\n"
    "inline constexpr std::string_view kJoeKuoTable = R\"JK(" + text + ")JK\";\n\n"
    "}  // namespace qmcsa::detail\n"
)
