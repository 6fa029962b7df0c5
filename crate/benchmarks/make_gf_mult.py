#!/usr/bin/env python3
"""Writes GF(2^m) multiplier circuits as OpenQASM 2.0 in the supported subset.

Registers a[m], b[m] hold the operands and c[m] accumulates a*b modulo a
fixed irreducible polynomial. Each partial product a_i*b_j lands on every
output bit t where x^(i+j) mod p has a 1, as a Toffoli. Toffolis are
written in the textbook 6-CX Clifford+T form, since the parser accepts
only 1-qubit gates and cx.

Normalisation rules for other corpora: ccx as below, swap as 3 cx,
cz as h-cx-h, u as u3, and no custom gate blocks.

Usage: python3 make_gf_mult.py [OUTDIR]
"""

import sys
from pathlib import Path

# Low-weight irreducible polynomials, as bit masks including x^m.
IRREDUCIBLE = {2: 0b111, 3: 0b1011, 4: 0b10011}


def reduce_power(k, m):
    """Bit mask of x^k mod p."""
    p = IRREDUCIBLE[m]
    v = 1 << k
    for d in range(k, m - 1, -1):
        if v >> d & 1:
            v ^= p << (d - m)
    return v


def toffoli(c1, c2, t):
    return [
        f"h {t};",
        f"cx {c2},{t};",
        f"tdg {t};",
        f"cx {c1},{t};",
        f"t {t};",
        f"cx {c2},{t};",
        f"tdg {t};",
        f"cx {c1},{t};",
        f"t {c2};",
        f"t {t};",
        f"h {t};",
        f"cx {c1},{c2};",
        f"t {c1};",
        f"tdg {c2};",
        f"cx {c1},{c2};",
    ]


def multiplier(m):
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"// GF(2^{m}) multiplier, p = {bin(IRREDUCIBLE[m])}",
        f"qreg a[{m}];",
        f"qreg b[{m}];",
        f"qreg c[{m}];",
    ]
    for i in range(m):
        for j in range(m):
            mask = reduce_power(i + j, m)
            for t in range(m):
                if mask >> t & 1:
                    lines += toffoli(f"a[{i}]", f"b[{j}]", f"c[{t}]")
    return "\n".join(lines) + "\n"


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    for m in sorted(IRREDUCIBLE):
        (out / f"gf2_{m}_mult.qasm").write_text(multiplier(m))


if __name__ == "__main__":
    main()
