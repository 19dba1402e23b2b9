#!/usr/bin/env python3
"""Freeze the acceptance band for the mean attempt count of 1-char searches.

Each search's attempt count is Geometric(p = 1/16) on {1, 2, ...}; the sum
over n trials is n plus a negative binomial (r = n failures-counting form).
The band holds with probability 1 - 2 * TAIL under the model, so a pass is
overwhelming evidence the generator behaves geometrically with p = 1/16.

Writes tests/vectors/geom_band.json. Uses scipy only here, at freeze time.
"""

import json
import pathlib

from scipy.stats import nbinom

TRIALS = 200
P_MATCH = 1 / 16
TAIL = 1e-7

dist = nbinom(TRIALS, P_MATCH)
lo_sum = TRIALS + int(dist.ppf(TAIL))
hi_sum = TRIALS + int(dist.ppf(1 - TAIL))

band = {
    "trials": TRIALS,
    "p_match": P_MATCH,
    "tail_probability": TAIL,
    "sum_lo": lo_sum,
    "sum_hi": hi_sum,
    "mean_lo": lo_sum / TRIALS,
    "mean_hi": hi_sum / TRIALS,
}

out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "vectors" / "geom_band.json"
out.write_text(json.dumps(band, indent=1) + "\n")
print(json.dumps(band, indent=2))
