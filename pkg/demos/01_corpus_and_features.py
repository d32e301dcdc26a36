"""Walkthrough: from a synthetic corpus to a feature matrix.

Generates a small troll/benign pair, looks at a few raw tweets, then builds
the 45-column feature matrix and compares the two classes with KS tests.
"""
import numpy as np

from trolltrace.features import FEATURE_GROUPS, FEATURE_NAMES, build_dataset
from trolltrace.sources import classify_source, is_fake_source
from trolltrace.stats import comparison_report, format_comparison, split_by_label
from trolltrace.synth import SynthConfig, synth_generate

# a small corpus keeps this fast; the knobs are the defaults
cfg = SynthConfig(n_troll=150, n_benign=150, seed=1)
trolls, benign = synth_generate(cfg)
print(len(trolls), "troll accounts,", len(benign), "benign accounts")

# what a troll account's tweets look like
acc = trolls.accounts[0]
for t in acc.tweets[:5]:
    print(f"  {t.timestamp}  rt={t.is_retweet!s:5}  {t.client_name!r:28} {t.text[:50]!r}")

# client names: some are near-copies of real apps (note the doubled space)
clients = sorted({t.client_name for t in trolls.tweets()})
for name in clients:
    print(f"  {name!r:30} {classify_source(name).value:10} fake={is_fake_source(name)}")

ds = build_dataset([trolls, benign])
print(ds.X.shape, "feature matrix")
for group, cols in FEATURE_GROUPS.items():
    print(f"  {group:10} columns {cols[0]}-{cols[-1]}")

# the hourly histogram rows sum to one for any account with tweets
hourly = ds.X[:, FEATURE_GROUPS["temporal"]]
print("hourly row sums:", np.unique(np.round(hourly.sum(axis=1), 12)))

# two-sample KS per feature, troll vs benign
t, b = split_by_label(ds)
rows = comparison_report(t, b, [n for n in FEATURE_NAMES if not n.startswith("hour_")])
print(format_comparison(rows))
