"""In-distribution control across the remaining position kinds.

Whatever a position mechanism does to length generalization, it must not
break fitting the training scales: every kind has to reach 0.95 exact match
on held-out strings from the scales it trained on. The two kinds the
acceptance gap test trains are covered there; this covers the rest, at the
same data budget, so expect a few minutes of training per kind.
"""

import pytest

from toylm.config import TrainConfig
from toylm.evaluate import evaluate, mean_exact_match
from toylm.train import train_model


@pytest.mark.parametrize("pe", ["nope", "alibi", "rope", "rpe-absolute"])
def test_in_distribution_control(copy_split, pe):
    cfg = TrainConfig(pe=pe, train_path=str(copy_split["train"]))
    model, vocab, _ = train_model(cfg)
    report = evaluate(model, vocab, copy_split["id"], pe)
    score = mean_exact_match(report, range(1, 6))
    assert score >= 0.95, f"{pe}: in-distribution exact match {score:.3f}"
