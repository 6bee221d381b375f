"""Matrix Market graphs and the CSV layouts shared by the CLI and benches.

All node indices written to CSV are 0-based; Matrix Market files are
1-based on disk and converted on read/write.
"""

import csv
from pathlib import Path

import numpy as np

from .errors import MatrixMarketError
from .spectral import ADJACENCY, GraphMatrix

_FIELDS = ("real", "integer", "pattern")
_SYMMETRIES = ("symmetric", "general")


def load_matrix_market(path, kind=ADJACENCY):
    """Read a coordinate Matrix Market file into a dense symmetric matrix.

    Pattern entries get weight 1.  Mirror entries that disagree raise
    :class:`MatrixMarketError`, as does any malformed line (with its number).
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket":
        raise MatrixMarketError("missing %%MatrixMarket header", 1)
    obj, fmt, fld, sym = (h.lower() for h in head[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported object/format {obj} {fmt}", 1)
    if fld not in _FIELDS:
        raise MatrixMarketError(f"unsupported field {fld!r}", 1)
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1)

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        text = lines[lineno - 1].strip()
        if text and not text.startswith("%"):
            size = text.split()
            break
    if size is None:
        raise MatrixMarketError("missing size line", lineno)
    try:
        nrows, ncols, nnz = (int(t) for t in size)
    except ValueError:
        raise MatrixMarketError(f"bad size line {' '.join(size)!r}", lineno) from None
    if nrows != ncols:
        raise MatrixMarketError(f"matrix is not square ({nrows} x {ncols})", lineno)

    a = np.zeros((nrows, nrows))
    seen = np.zeros((nrows, nrows), dtype=bool)
    count = 0
    for ln in range(lineno + 1, len(lines) + 1):
        text = lines[ln - 1].strip()
        if not text or text.startswith("%"):
            continue
        tok = text.split()
        want = 2 if fld == "pattern" else 3
        if len(tok) != want:
            raise MatrixMarketError(f"expected {want} fields, got {len(tok)}", ln)
        try:
            i, j = int(tok[0]) - 1, int(tok[1]) - 1
            v = 1.0 if fld == "pattern" else float(tok[2])
        except ValueError:
            raise MatrixMarketError(f"unparsable entry {text!r}", ln) from None
        if not (0 <= i < nrows and 0 <= j < nrows):
            raise MatrixMarketError(f"index ({i + 1}, {j + 1}) out of range", ln)
        if not np.isfinite(v):
            raise MatrixMarketError("non-finite value", ln)
        for r, c in ((i, j), (j, i)):
            if seen[r, c] and a[r, c] != v:
                raise MatrixMarketError(
                    f"entry ({i + 1}, {j + 1}) conflicts with its mirror or a duplicate", ln
                )
        a[i, j] = a[j, i] = v
        seen[i, j] = seen[j, i] = True
        count += 1
    if count != nnz:
        raise MatrixMarketError(f"header declares {nnz} entries, found {count}", len(lines))
    if sym == "general" and count and not _general_is_symmetric(lines, lineno, fld):
        raise MatrixMarketError("general matrix is not symmetric")
    return GraphMatrix(a, kind=kind)


def _general_is_symmetric(lines, size_line, fld):
    entries = {}
    for text in lines[size_line:]:
        text = text.strip()
        if not text or text.startswith("%"):
            continue
        tok = text.split()
        v = 1.0 if fld == "pattern" else float(tok[2])
        entries[(int(tok[0]), int(tok[1]))] = v
    return all(i == j or entries.get((j, i)) == v for (i, j), v in entries.items())


def write_matrix_market(path, graph, pattern=False, comment=None):
    """Write the lower triangle in symmetric coordinate format."""
    m = graph.entries
    ii, jj = np.nonzero(np.tril(m))
    fld = "pattern" if pattern else "real"
    if pattern and np.any(m[ii, jj] != 1.0):
        raise ValueError("pattern output requires unit weights")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {fld} symmetric\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{m.shape[0]} {m.shape[0]} {ii.size}\n")
        for i, j in zip(ii, jj):
            if pattern:
                fh.write(f"{i + 1} {j + 1}\n")
            else:
                fh.write(f"{i + 1} {j + 1} {float(m[i, j])!r}\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def write_rows(path, header, rows):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]


def write_vector(path, values, name="value"):
    write_rows(path, ["node", name], enumerate(np.asarray(values, dtype=float)))


def read_vector(path):
    _, rows = read_rows(path)
    out = np.empty(len(rows))
    for r in rows:
        out[int(r[0])] = float(r[1])
    return out


def write_signal_batch(path, Y):
    Y = np.atleast_2d(np.asarray(Y, dtype=float).T).T
    header = ["node"] + [f"signal_{p}" for p in range(Y.shape[1])]
    write_rows(path, header, ([i] + list(row) for i, row in enumerate(Y)))


def read_signal_batch(path):
    _, rows = read_rows(path)
    Y = np.empty((len(rows), len(rows[0]) - 1))
    for r in rows:
        Y[int(r[0])] = [float(v) for v in r[1:]]
    return Y


def write_sampling_set(path, sampling_set):
    write_rows(path, ["rank", "node_index"], enumerate(sampling_set.order))


def read_sampling_order(path):
    _, rows = read_rows(path)
    return [int(r[1]) for r in sorted(rows, key=lambda r: int(r[0]))]


def write_support_estimate(path, estimate):
    chosen = set(estimate.support.indices)
    write_rows(
        path,
        ["index", "row_norm", "selected_flag"],
        ((i, v, i in chosen) for i, v in enumerate(estimate.row_norms)),
    )


def write_trajectory(path, trace, timing=True):
    """One row per selection step of a :class:`~gsp_sampling.bayes.SelectionTrace`."""
    rows = (
        (i, j, g, f, ns if timing else None)
        for i, (j, g, f, ns) in enumerate(
            zip(trace.selected.order, trace.gains, trace.f_values, trace.step_ns))
    )
    write_rows(path, ["iteration", "selected_node", "gain", "f_value", "wall_clock_ns"], rows)


def write_theory_report(path, report):
    fields = ["c", "curvature_bound", "alpha", "beta", "s", "expectation_rhs"]
    write_rows(path, fields, [[getattr(report, f) for f in fields]])
