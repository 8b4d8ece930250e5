"""Pure-Python fraction-free pivot kernel (fallback for the Cython one)."""
from __future__ import annotations


def pivot(tableau: list[list[int]], r: int, c: int, den: int) -> int:
    """Integer-preserving Gaussian pivot on (r, c); returns the new denominator.

    The tableau stores den * (real tableau); after the update it stores
    piv * (real tableau) with piv = tableau[r][c]. The divisions are exact
    (entries stay minors of the original integer matrix). The pivot row
    itself is left untouched by construction.
    """
    prow = tableau[r]
    piv = prow[c]
    ncols = len(prow)
    for i in range(len(tableau)):
        if i == r:
            continue
        row = tableau[i]
        f = row[c]
        if f:
            for j in range(ncols):
                row[j] = (piv * row[j] - f * prow[j]) // den
        elif piv != den:
            for j in range(ncols):
                row[j] = piv * row[j] // den
    return piv
