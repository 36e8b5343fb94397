"""Regenerates tests/data/welch_fixtures.json with scipy's Welch t-test."""
import json
import pathlib

import numpy as np
from scipy import stats

rng = np.random.default_rng(20240611)
fixtures = []
for k in range(50):
    na, nb = rng.integers(2, 40, size=2)
    a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.2, 3.0), size=na)
    b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.2, 3.0), size=nb)
    res = stats.ttest_ind(b, a, equal_var=False)
    fixtures.append({"a": a.tolist(), "b": b.tolist(), "t": float(res.statistic), "p": float(res.pvalue)})

out = pathlib.Path(__file__).resolve().parents[1] / "data" / "welch_fixtures.json"
out.write_text(json.dumps(fixtures, indent=1) + "\n")
print(f"wrote {len(fixtures)} fixtures to {out}")
