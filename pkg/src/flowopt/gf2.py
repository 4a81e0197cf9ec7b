"""Gaussian elimination over GF(2) with rows packed into Python ints."""

from __future__ import annotations

from collections.abc import Sequence


def solve_many(rows: Sequence[int], ncols: int, rhs: Sequence[int]) -> list[int | None]:
    """Solve ``A x = b_j`` for several right-hand sides at once.

    Parameters
    ----------
    rows
        ``rows[r]`` is the bitmask of row ``r`` of ``A`` (bit ``c`` = column ``c``).
    ncols
        Number of columns of ``A``.
    rhs
        ``rhs[j]`` is the bitmask over rows of the ``j``-th right-hand side.

    Returns
    -------
    list
        For each right-hand side, the solution as a bitmask over columns, or
        ``None`` when the system is inconsistent. Pivots are taken in ascending
        column order and free variables are set to zero, so the result is
        deterministic.
    """
    nrows = len(rows)
    aug = []
    for r in range(nrows):
        b = 0
        for j, col in enumerate(rhs):
            if col >> r & 1:
                b |= 1 << j
        aug.append(rows[r] | (b << ncols))

    pivots: list[tuple[int, int]] = []  # (column, row index)
    r = 0
    for c in range(ncols):
        bit = 1 << c
        p = next((i for i in range(r, nrows) if aug[i] & bit), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        for i in range(nrows):
            if i != r and aug[i] & bit:
                aug[i] ^= aug[r]
        pivots.append((c, r))
        r += 1
        if r == nrows:
            break

    col_mask = (1 << ncols) - 1
    inconsistent = 0
    for i in range(r, nrows):
        if not aug[i] & col_mask:
            inconsistent |= aug[i] >> ncols

    out: list[int | None] = []
    for j in range(len(rhs)):
        if inconsistent >> j & 1:
            out.append(None)
            continue
        x = 0
        for c, i in pivots:
            if aug[i] >> (ncols + j) & 1:
                x |= 1 << c
        out.append(x)
    return out


def solve(rows: Sequence[int], ncols: int, b: int) -> int | None:
    return solve_many(rows, ncols, [b])[0]

