import csv
import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crmssl.baselines import GaussianNaiveBayes, KnnClassifier
from crmssl.evaluation import (UNDEFINED, ConfusionMatrix, EvaluationError, compare, confusion,
                               metrics, sweep_divisor)
from crmssl.mlp import MlpClassifier, TrainConfig, default_hidden_size
from crmssl.ssl import SelfTrainConfig


def brute_force_rates(pairs, positive):
    """Recount every rate straight from (predicted, actual) pairs."""
    n = len(pairs)
    correct = sum(p == t for p, t in pairs)
    pos = [(p, t) for p, t in pairs if t == positive]
    neg = [(p, t) for p, t in pairs if t != positive]

    def frac(items, want_pred_positive):
        if not items:
            return None
        return sum((p == positive) == want_pred_positive for p, _ in items) / len(items)

    return {
        "accuracy": correct / n,
        "true_positive_rate": frac(pos, True),
        "false_negative_rate": frac(pos, False),
        "false_positive_rate": frac(neg, True),
        "true_negative_rate": frac(neg, False),
    }


def pairs_for(a, b, c, d):
    return ([("N", "N")] * a + [("P", "N")] * b + [("N", "P")] * c + [("P", "P")] * d)


def test_confusion_four_pairs():
    cm = confusion(["P", "P", "N", "N"], ["P", "N", "N", "P"], "P")
    assert (cm.a, cm.b, cm.c, cm.d) == (1, 1, 1, 1)


def test_confusion_diagonal():
    cm = confusion(["P", "N", "N"], ["P", "N", "N"], "P")
    assert cm.b == 0 and cm.c == 0


def test_confusion_swap_positive_class():
    pred, act = ["P", "P", "N", "N", "P"], ["P", "N", "N", "P", "P"]
    cm, sw = confusion(pred, act, "P"), confusion(pred, act, "N")
    assert (sw.a, sw.b, sw.c, sw.d) == (cm.d, cm.c, cm.b, cm.a)
    assert cm.swapped() == sw


@pytest.mark.parametrize("pred,act", [(["P"], ["P", "N"]), ([], []), (["X"], ["P"])])
def test_confusion_errors(pred, act):
    with pytest.raises(EvaluationError):
        confusion(pred, act, "P", ("N", "P"))


def test_metrics_hand_case():
    m = metrics(ConfusionMatrix(50, 10, 5, 35))
    assert m.accuracy == pytest.approx(0.85)
    assert m.true_positive_rate == pytest.approx(0.875)
    assert m.false_positive_rate == pytest.approx(10 / 60)
    assert m.true_negative_rate == pytest.approx(50 / 60)
    assert m.false_negative_rate == pytest.approx(0.125)


def test_metrics_perfect_and_undefined():
    m = metrics(ConfusionMatrix(4, 0, 0, 6))
    assert (m.accuracy, m.true_positive_rate, m.false_positive_rate) == (1.0, 1.0, 0.0)
    u = metrics(ConfusionMatrix(3, 2, 0, 0))
    assert u.true_positive_rate is None and u.false_negative_rate is None
    assert u.as_dict()["true_positive_rate"] == UNDEFINED
    assert u.true_negative_rate == pytest.approx(0.6)
    with pytest.raises(EvaluationError):
        metrics(ConfusionMatrix(0, 0, 0, 0))


def test_metrics_exhaustive_against_pair_counting():
    for total in range(1, 21):
        for a, b, c in itertools.product(range(total + 1), repeat=3):
            d = total - a - b - c
            if d < 0:
                continue
            pairs = pairs_for(a, b, c, d)
            cm = confusion([p for p, _ in pairs], [t for _, t in pairs], "P", ("N", "P"))
            assert (cm.a, cm.b, cm.c, cm.d) == (a, b, c, d)
            got = metrics(cm)
            want = brute_force_rates(pairs, "P")
            for k, v in want.items():
                assert getattr(got, k) == v


@given(st.lists(st.tuples(st.sampled_from("NP"), st.sampled_from("NP")), min_size=1,
                max_size=40), st.randoms())
def test_confusion_permutation_invariant(pairs, rnd):
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    a = confusion([p for p, _ in pairs], [t for _, t in pairs], "P", ("N", "P"))
    b = confusion([p for p, _ in shuffled], [t for _, t in shuffled], "P", ("N", "P"))
    assert a == b
    m = metrics(a)
    if m.true_positive_rate is not None:
        assert m.true_positive_rate + m.false_negative_rate == 1
    if m.true_negative_rate is not None:
        assert m.true_negative_rate + m.false_positive_rate == 1
    assert 0 <= m.accuracy <= 1


FAST = SelfTrainConfig(base=TrainConfig(training_cycles=30))


def test_sweep_rows_and_hidden_sizes(small_split):
    res = sweep_divisor(*small_split, range(1, 7), False, FAST)
    assert [r.divisor for r in res.rows] == [1, 2, 3, 4, 5, 6]
    for r in res.rows:
        assert r.hidden_size == default_hidden_size(4, 2, r.divisor)
        assert 0 <= r.error_percent <= 100
    plus = sweep_divisor(*small_split, [2], True, FAST)
    assert plus.rows[0].hidden_size == default_hidden_size(4, 2, 2, True)
    assert plus.rows[0].formula_variant == "plus_one"


def test_sweep_error_percent_matches_accuracy(small_split):
    from crmssl.evaluation import fit_arm, holdout_confusion, prepare

    res = sweep_divisor(*small_split, [3], False, FAST, init_seed=5)
    data = prepare(*small_split)
    h = default_hidden_size(4, 2, 3)
    model, _ = fit_arm(MlpClassifier(hidden_size=h, config=FAST.base, init_seed=5), data, FAST,
                       True)
    acc = metrics(holdout_confusion(model, data)).accuracy
    assert res.rows[0].error_percent == pytest.approx(100 * (1 - acc))


def test_compare_single_learner_consistent(small_split, tmp_path):
    table = compare([("KNN", KnnClassifier(3), False)], *small_split, FAST)
    assert len(table.rows) == 1
    row = table.rows[0]
    assert row.report == metrics(row.confusion)
    assert table.columns == ["Operator", "Accuracy (%)", "True yes (%)", "True no (%)",
                             "False yes (%)", "False no (%)"]
    rec = table.records()[0]
    m = row.report
    assert rec[1:] == [f"{100 * v:.2f}" for v in (m.accuracy, m.true_positive_rate,
                                                    m.true_negative_rate, m.false_positive_rate,
                                                    m.false_negative_rate)]
    table.write_csv(tmp_path / "c.csv")
    with open(tmp_path / "c.csv") as fh:
        assert next(csv.reader(fh)) == table.columns
    doc = table.to_dict()
    json.dumps(doc)
    assert "(a+d)" in doc["footer"]


def test_compare_constant_positive_learner(small_split):
    class AlwaysYes:
        def fit(self, X, y, n_classes):
            return self

        def predict_proba(self, X):
            import numpy as np
            return np.tile([0.0, 1.0], (len(X), 1))

    table = compare([("yes", AlwaysYes(), False)], *small_split, FAST, positive_class="yes")
    m = table.rows[0].report
    assert m.true_positive_rate == 1.0 and m.true_negative_rate == 0.0


def test_compare_row_order(small_split):
    table = compare([("NB", GaussianNaiveBayes(), False), ("KNN", KnnClassifier(), False)],
                    *small_split, FAST)
    assert [r.name for r in table.rows] == ["NB", "KNN"]
