# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled fraction-free pivot kernel.

Same contract as bnbapprox._pivot_py.pivot: entries are arbitrary-precision
Python ints (they must stay exact), so the arithmetic goes through PyObject
calls; the win is the compiled loop and indexing around them.
"""


def pivot(list tableau, Py_ssize_t r, Py_ssize_t c, object den):
    cdef list prow = <list>tableau[r]
    cdef object piv = prow[c]
    cdef Py_ssize_t nrows = len(tableau)
    cdef Py_ssize_t ncols = len(prow)
    cdef Py_ssize_t i, j
    cdef list row
    cdef object f
    cdef bint rescale = piv != den
    for i in range(nrows):
        if i == r:
            continue
        row = <list>tableau[i]
        f = row[c]
        if f:
            for j in range(ncols):
                row[j] = (piv * row[j] - f * prow[j]) // den
        elif rescale:
            for j in range(ncols):
                row[j] = piv * row[j] // den
    return piv
