#!/usr/bin/env python3
"""Convert a Planetoid citation dataset into this project's text format.

Usage:

    python3 python/convert_planetoid.py Cora data/cora
    python3 python/convert_planetoid.py CiteSeer data/citeseer
    python3 python/convert_planetoid.py PubMed data/pubmed

Requires `torch` and `torch-geometric` (plus network access on first use,
since Planetoid downloads its raw files). The output directory is what the
CLI's `--dataset` flag and the acceptance tests' `HDGCN_DATA_DIR` expect:
`meta`, `edges`, `features`, `labels`, and `split` text files, with the
standard semi-supervised split taken from the dataset's masks.
"""

import sys
import tempfile
from pathlib import Path


def main() -> None:
    if len(sys.argv) != 3:
        sys.exit(__doc__.strip())
    name, out = sys.argv[1], Path(sys.argv[2])

    try:
        from torch_geometric.datasets import Planetoid
    except ImportError:
        sys.exit(
            "torch-geometric is not installed; run "
            "`pip install torch torch-geometric` and retry"
        )

    with tempfile.TemporaryDirectory() as tmp:
        data = Planetoid(root=tmp, name=name)[0]

    x = data.x.numpy()
    y = data.y.numpy()
    n, d = x.shape
    binary = ((x == 0.0) | (x == 1.0)).all()
    out.mkdir(parents=True, exist_ok=True)

    kind = "binary" if binary else "continuous"
    (out / "meta").write_text(
        f"nodes={n}\nclasses={int(y.max()) + 1}\nfeatures={d} kind={kind}\n"
    )

    edges = set()
    for u, v in data.edge_index.t().tolist():
        if u != v:
            edges.add((min(u, v), max(u, v)))
    (out / "edges").write_text(
        "".join(f"{u} {v}\n" for u, v in sorted(edges))
    )

    rows, cols = x.nonzero()
    (out / "features").write_text(
        "".join(f"{i} {j} {x[i, j]:.10g}\n" for i, j in zip(rows, cols))
    )

    (out / "labels").write_text(
        "".join(f"{i} {int(c)}\n" for i, c in enumerate(y))
    )

    parts = []
    for tag in ("train", "val", "test"):
        mask = getattr(data, f"{tag}_mask").numpy()
        parts.extend(f"{tag} {i}\n" for i in mask.nonzero()[0])
    (out / "split").write_text("".join(parts))

    print(
        f"wrote {name}: {n} nodes, {len(edges)} edges, {d} {kind} features "
        f"to {out}"
    )


if __name__ == "__main__":
    main()
