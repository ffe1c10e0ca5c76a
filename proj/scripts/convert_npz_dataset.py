#!/usr/bin/env python3
"""Convert a citation-network .npz bundle to the dataset directory format.

Handles both layouts seen in the wild: whole CSR matrices pickled under
`adj_matrix` / `attr_matrix`, and split arrays (`adj_data`, `adj_indices`,
`adj_indptr`, `adj_shape`, same for `attr_`). Labels come from `labels`.

Usage: convert_npz_dataset.py INPUT.npz OUTPUT_DIR
"""

import json
import sys
from pathlib import Path

import numpy as np


def load_csr(npz, prefix):
    """Return (data, indices, indptr, shape) for `prefix` or None."""
    whole = npz.get(f"{prefix}_matrix")
    if whole is not None:
        m = whole.item() if whole.dtype == object else whole
        if hasattr(m, "tocsr"):
            m = m.tocsr()
            return m.data, m.indices, m.indptr, m.shape
        dense = np.asarray(m)
        return dense, None, None, dense.shape
    if f"{prefix}_data" in npz:
        shape = tuple(npz[f"{prefix}_shape"])
        return (npz[f"{prefix}_data"], npz[f"{prefix}_indices"],
                npz[f"{prefix}_indptr"], shape)
    return None


def csr_rows(data, indices, indptr, shape):
    for r in range(shape[0]):
        yield indices[indptr[r]:indptr[r + 1]], data[indptr[r]:indptr[r + 1]]


def fmt(x):
    return repr(float(x))


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    src, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    npz = np.load(src, allow_pickle=True)

    adj = load_csr(npz, "adj")
    attr = load_csr(npz, "attr")
    labels = npz.get("labels")
    if adj is None or attr is None or labels is None:
        sys.exit(f"{src}: need adj_*, attr_* and labels entries "
                 f"(found: {sorted(npz.files)})")

    out_dir.mkdir(parents=True, exist_ok=True)

    # edges: emit each undirected edge once, skip self-loops
    edges = set()
    if adj[1] is not None:
        for u, (cols, _) in enumerate(csr_rows(*adj)):
            for v in cols:
                v = int(v)
                if u != v:
                    edges.add((min(u, v), max(u, v)))
    else:
        dense = adj[0]
        for u, v in zip(*np.nonzero(dense)):
            if u != v:
                edges.add((min(int(u), int(v)), max(int(u), int(v))))
    with open(out_dir / "edges.tsv", "w", newline="\n") as f:
        for u, v in sorted(edges):
            f.write(f"{u}\t{v}\n")

    # features: densify row by row
    num_nodes, dim = attr[3]
    with open(out_dir / "features.csv", "w", newline="\n") as f:
        if attr[1] is not None:
            for cols, vals in csr_rows(*attr):
                row = np.zeros(dim)
                row[cols] = vals
                f.write(",".join(fmt(x) for x in row) + "\n")
        else:
            for row in attr[0]:
                f.write(",".join(fmt(x) for x in row) + "\n")

    labels = np.asarray(labels).astype(int)
    with open(out_dir / "labels.csv", "w", newline="\n") as f:
        for y in labels:
            f.write(f"{int(y)}\n")

    counts = {
        "num_nodes": int(num_nodes),
        "num_edges": len(edges),
        "feature_dim": int(dim),
        "num_classes": int(labels.max()) + 1,
    }
    with open(out_dir / "counts.json", "w", newline="\n") as f:
        json.dump(counts, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {out_dir}: {counts}")


if __name__ == "__main__":
    main()
