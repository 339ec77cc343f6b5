"""Machine-readable outputs: fixed-precision JSON and CSV traces."""

from __future__ import annotations

import math
from typing import Any, Sequence

import numpy as np

from .dynamics import EvolutionTrace, Spectrum
from .reduction import ReducedHamiltonian

JSON_DIGITS = 17
CSV_DIGITS = 12


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def dumps_json(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written at 17 significant digits.

    Non-finite floats become ``null``. Key order is preserved, so equal
    inputs give byte-identical output.
    """
    pad = " " * indent

    def enc(o, level):
        if o is None or o is True or o is False:
            return {None: "null", True: "true", False: "false"}[o]
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _fmt(float(o), JSON_DIGITS) if math.isfinite(o) else "null"
        if isinstance(o, str):
            import json
            return json.dumps(o)
        if isinstance(o, np.ndarray):
            o = o.tolist()
        inner = pad * (level + 1)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{enc(str(k), level + 1)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad * level + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(inner + enc(v, level + 1) for v in o) + "\n" + pad * level + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


def trace_csv(trace: EvolutionTrace, labels: Sequence[str] | None = None,
              columns: Sequence[int] | None = None) -> str:
    """``t,prob_<label>,...`` rows at 12 significant digits."""
    probs = trace.probabilities
    cols = list(range(probs.shape[1])) if columns is None else list(columns)
    labels = labels or trace.labels or [str(j) for j in range(probs.shape[1])]
    lines = [",".join(["t"] + [f"prob_{labels[j]}" for j in cols])]
    for t, row in zip(trace.times, probs):
        lines.append(",".join([_fmt(t, CSV_DIGITS)] + [_fmt(row[j], CSV_DIGITS) for j in cols]))
    return "\n".join(lines) + "\n"


def reduced_block(red: ReducedHamiltonian) -> dict:
    return {
        "labels": list(red.basis.labels),
        "sizes": [int(s) for s in red.basis.sizes],
        "dim": red.dim,
        "entries": red.matrix.tolist(),
    }


def spectrum_block(spec: Spectrum, overlaps: dict[str, np.ndarray] | None = None) -> dict:
    out = {"eigenvalues": spec.eigenvalues.tolist()}
    out["gap"] = float(spec.eigenvalues[1] - spec.eigenvalues[0]) if spec.dim > 1 else None
    if overlaps:
        out["overlaps"] = {k: v.tolist() for k, v in overlaps.items()}
    return out
