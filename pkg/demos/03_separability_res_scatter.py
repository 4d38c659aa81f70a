#!/usr/bin/env python3
"""Rank feature sets by cluster separability before any classifier runs.

For each named feature set, extract all windows of one subject, reduce with
the uncorrelated projection, and score the first two reduced dimensions with
the RES index (mean centroid distance over mean within-class spread).
Higher RES means cleaner clusters.  Also exports the normalized 2-D scatter
of the winning set as CSV for plotting.
"""

from pathlib import Path

import numpy as np

from emgpr import (
    apply_filters,
    extract_matrix,
    feature_set,
    fit_ulda,
    generate_synthetic,
    normalize_features,
    project,
    res_index,
    scatter_export,
    segment,
    separable_spec,
)

recordings = generate_synthetic(separable_spec(seed=42))

windows, labels = [], []
for rec in recordings:
    for w in segment(apply_filters(rec), window_ms=250.0):
        windows.append(w)
        labels.append(rec.movement)
labels = np.asarray(labels)
print(f"{len(windows)} windows from {len(set(labels))} movements\n")

scores = {}
reduced_two = {}
for name in ("FS1", "FS2", "FS3", "FS4", "PROPOSED"):
    X = extract_matrix(feature_set(name), windows)
    norm, _ = normalize_features(X)
    reduced = project(fit_ulda(norm, labels), norm)
    scores[name] = res_index(reduced[:, :2], labels)
    reduced_two[name] = reduced[:, :2]

print(f"{'feature set':<12} {'RES index':>10}")
for name, value in sorted(scores.items(), key=lambda kv: -kv[1]):
    print(f"{name:<12} {value:>10.3f}")

best = max(scores, key=scores.get)
out = Path(__file__).parent / "output"
path = out / f"scatter_{best}.csv"
scatter_export(reduced_two[best], labels, path)
print(f"\nwrote normalized 2-D scatter of {best} ({len(labels)} rows) to {path}")
