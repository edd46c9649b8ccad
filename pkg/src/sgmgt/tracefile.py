"""Trace CSV persistence: ``iter,theta_0,...,theta_{D-1}[,energy]``."""

import csv
from pathlib import Path

import numpy as np

from .errors import TraceFormatError


def write_trace(path, trace):
    path = Path(path)
    dim = trace.samples.shape[1] if trace.samples.ndim == 2 else 1
    header = ["iter"] + [f"theta_{i}" for i in range(dim)]
    with_energy = trace.energies is not None
    if with_energy:
        header.append("energy")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for j in range(len(trace.iters)):
            row = [int(trace.iters[j])] + [repr(float(v)) for v in trace.samples[j]]
            if with_energy:
                row.append(repr(float(trace.energies[j])))
            w.writerow(row)


def read_trace(path):
    """Return ``(iters, samples, energies_or_None)``; raises TraceFormatError."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty trace file") from None
        if not header or header[0] != "iter":
            raise TraceFormatError(f"{path}: header must start with 'iter'")
        has_energy = header[-1] == "energy"
        thetas = header[1:-1] if has_energy else header[1:]
        if not thetas or thetas != [f"theta_{i}" for i in range(len(thetas))]:
            raise TraceFormatError(f"{path}: expected columns theta_0..theta_D-1, got {thetas}")
        rows = []
        for i, row in enumerate(reader, 1):
            if len(row) != len(header):
                raise TraceFormatError(f"{path}: data row {i} has {len(row)} fields, expected {len(header)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise TraceFormatError(f"{path}: data row {i} is not numeric") from None
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    iters = arr[:, 0].astype(int)
    if has_energy:
        return iters, arr[:, 1:-1], arr[:, -1]
    return iters, arr[:, 1:], None
