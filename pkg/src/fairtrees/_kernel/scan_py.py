"""Pure-python (numpy) implementation of the split-candidate scan.

Mirrors the compiled kernel in fairtrees._kernel._scan: given the rows that
reached a node, enumerate every admissible split and return its target and
sensitive information gains plus the child sizes. Admissible means both
children keep at least ``max(1, min_child)`` rows. Binary columns yield one
candidate (left = value 0); numeric columns yield up to ``n_thresholds``
cut points equally spaced strictly inside the observed (min, max) range.

Candidates are emitted in (column index, threshold) order, which is the
global tie-break order used by every selection policy.
"""

import numpy as np

KIND_BINARY = 0
KIND_NUMERIC = 1


def _entropy_counts(ones, total):
    """Entropy in bits of a binary distribution given as counts (arrays)."""
    total = np.asarray(total, dtype=np.float64)
    p = np.divide(ones, total, out=np.zeros_like(total), where=total > 0)
    h = np.zeros_like(p)
    inner = (p > 0.0) & (p < 1.0)
    pi = p[inner]
    qi = 1.0 - pi
    h[inner] = -(pi * np.log2(pi) + qi * np.log2(qi))
    return h


def _column_thresholds(values, k):
    """Equally spaced cut points strictly inside (min, max); may be < k."""
    mn = float(values.min())
    mx = float(values.max())
    if not mx > mn:
        return []
    step = (mx - mn) / (k + 1)
    out = []
    for i in range(1, k + 1):
        t = mn + i * step
        if t <= mn or t >= mx:
            continue
        if out and t == out[-1]:
            continue
        out.append(t)
    return out


def scan_split_candidates(X, y, s, kinds, n_thresholds, min_child):
    """Scan all admissible splits of the rows in ``X``.

    Parameters
    ----------
    X : float64 array (n, m), feature values of the rows at this node
    y, s : uint8 arrays (n,), target and sensitive labels
    kinds : uint8 array (m,), 0 = binary column, 1 = numeric column
    n_thresholds : int, cut points tested per numeric column
    min_child : int, minimum rows each child must keep (floored at 1)

    Returns
    -------
    (cols, thrs, gain_y, gain_s, left_n, right_n) arrays, one entry per
    admissible candidate; ``thrs`` is NaN for binary-column candidates.
    """
    n, m = X.shape
    mc = max(1, int(min_child))
    yf = y.astype(np.float64)
    sf = s.astype(np.float64)
    ty = float(yf.sum())
    ts = float(sf.sum())
    hy = float(_entropy_counts(np.array([ty]), np.array([float(n)]))[0])
    hs = float(_entropy_counts(np.array([ts]), np.array([float(n)]))[0])

    cols, thrs, lns, lys, lss = [], [], [], [], []
    for j in range(m):
        v = X[:, j]
        if kinds[j] == KIND_BINARY:
            mask = v == 0.0
            ln = int(mask.sum())
            if ln < mc or n - ln < mc:
                continue
            cols.append(j)
            thrs.append(np.nan)
            lns.append(ln)
            lys.append(float(yf[mask].sum()))
            lss.append(float(sf[mask].sum()))
        else:
            cuts = _column_thresholds(v, n_thresholds)
            if not cuts:
                continue
            below = v[:, None] <= np.asarray(cuts)[None, :]
            ln_all = below.sum(axis=0)
            ly_all = yf @ below
            ls_all = sf @ below
            for idx, t in enumerate(cuts):
                ln = int(ln_all[idx])
                if ln < mc or n - ln < mc:
                    continue
                cols.append(j)
                thrs.append(t)
                lns.append(ln)
                lys.append(float(ly_all[idx]))
                lss.append(float(ls_all[idx]))

    if not cols:
        empty_f = np.empty(0, dtype=np.float64)
        empty_i = np.empty(0, dtype=np.int64)
        return empty_i, empty_f, empty_f.copy(), empty_f.copy(), empty_i.copy(), empty_i.copy()

    ln = np.asarray(lns, dtype=np.float64)
    rn = n - ln
    ly = np.asarray(lys)
    ls = np.asarray(lss)
    h_ly = _entropy_counts(ly, ln)
    h_ry = _entropy_counts(ty - ly, rn)
    h_ls = _entropy_counts(ls, ln)
    h_rs = _entropy_counts(ts - ls, rn)
    w_l = ln / n
    w_r = rn / n
    gain_y = np.maximum(hy - w_l * h_ly - w_r * h_ry, 0.0)
    gain_s = np.maximum(hs - w_l * h_ls - w_r * h_rs, 0.0)
    return (
        np.asarray(cols, dtype=np.int64),
        np.asarray(thrs, dtype=np.float64),
        gain_y,
        gain_s,
        ln.astype(np.int64),
        rn.astype(np.int64),
    )
