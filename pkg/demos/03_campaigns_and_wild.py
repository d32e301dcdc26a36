"""Walkthrough: cross-campaign detection and screening unlabeled accounts.

Trains on one campaign at a time and scores the others, estimates the false
positive rate on a fresh benign sample, then screens a mixed corpus.
"""
from trolltrace.corpus import Corpus
from trolltrace.evaluation import detect_in_wild, false_positive_eval, leave_one_campaign_eval
from trolltrace.features import build_dataset
from trolltrace.learners import train
from trolltrace.stats import cross_corpus_duplicates
from trolltrace.synth import SynthConfig, synth_campaigns, synth_generate

camps, benign = synth_campaigns(SynthConfig(n_troll=150, n_benign=300, n_campaigns=3, seed=4))

for rep in leave_one_campaign_eval(camps, benign, n_per_class=150, seed=0):
    rates = ", ".join(f"{t.campaign} {t.detected}/{t.total}" for t in rep.targets)
    print(f"trained on {rep.training_campaign}: {rates}  (overall {rep.detection_rate:.3f})")

# campaigns recycle the same copypasta
shared = cross_corpus_duplicates(camps)
print(len(shared), "texts shared across campaigns, e.g.", repr(shared[0].text[:60]))

# a model on one campaign, scored against benign accounts it never saw
model = train("rf", build_dataset([camps[0], benign]))
_, holdout = synth_generate(SynthConfig(n_troll=1, n_benign=500, seed=40, benign_name="holdout"))
print("false positive rate:", false_positive_eval(model, holdout))

# screening: only accounts that ever used an impersonated client are scored
wild = Corpus([*holdout.accounts[:200], *camps[1].accounts[:20]], label="unlabeled", name="wild")
rep = detect_in_wild(model, wild)
print(rep.candidate_count, "candidates,", len(rep.flagged), "flagged")
