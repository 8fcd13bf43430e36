"""Deterministic CSV and manifest output.

Every floating value is printed with a fixed 17-significant-digit format so
identical configurations produce byte-identical file bodies; exact
rationals are printed as numerator/denominator columns and never
decimalized.  Each run directory carries a manifest.json echoing the fully
resolved configuration.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

__all__ = ["fmt", "write_csv", "write_matrix_csv", "mirror_csv_as_json",
           "write_manifest", "read_config_file"]


def fmt(x) -> str:
    """Fixed-width deterministic rendering of one CSV cell."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, complex):
        return f"{x.real:.17g}+{x.imag:.17g}j"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header: list[str], rows, meta: dict | None = None) -> Path:
    """Write rows under a one-line header, with optional '#' metadata lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        if meta:
            for key in sorted(meta):
                fh.write(f"# {key}={meta[key]}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(c) for c in row) + "\n")
    return path


def write_matrix_csv(path, op, meta: dict | None = None) -> Path:
    """Operator entries as `row,col,re,im` rows under a one-line header.

    Accepts a dense OperatorMatrix or a SparseOperator; only nonzero
    entries are emitted, in (row, col) order.
    """
    rows = []
    if hasattr(op, "triplets"):
        for r, c, v in op.triplets():
            rows.append((r, c, v.real, v.imag))
    else:
        m = op.entries
        for r in range(m.shape[0]):
            for c in range(m.shape[1]):
                v = complex(m[r, c])
                if v != 0:
                    rows.append((r, c, v.real, v.imag))
    return write_csv(path, ["row", "col", "re", "im"], rows, meta)


def write_manifest(outdir, command: str, config: dict, outputs: list[str],
                   status: str = "ok", error: dict | None = None) -> Path:
    """Record the resolved run configuration next to its outputs."""
    from . import __version__

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    body = {
        "artifact": "phi4trunc",
        "version": __version__,
        "command": command,
        "config": {k: config[k] for k in sorted(config)},
        "outputs": sorted(outputs),
        "status": status,
    }
    if error is not None:
        body["error"] = error
    path = outdir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def mirror_csv_as_json(csv_path) -> Path:
    """Write a .json sibling of a CSV file: metadata, header and row cells.

    Cells stay as their deterministic CSV strings so both mirrors are
    byte-reproducible from the same configuration.
    """
    csv_path = Path(csv_path)
    meta: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[str]] = []
    for line in csv_path.read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        elif not header:
            header = line.split(",")
        elif line:
            rows.append(line.split(","))
    out = csv_path.with_suffix(".json")
    with open(out, "w") as fh:
        json.dump({"meta": meta, "header": header, "rows": rows}, fh, indent=1)
        fh.write("\n")
    return out


def read_config_file(path) -> dict[str, str]:
    """Flat `key = value` file with '#' comments; later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out
