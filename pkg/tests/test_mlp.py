import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crmssl.dataset import generate_synthetic
from crmssl.mlp import (CYCLES_EXHAUSTED, EPSILON_REACHED, Mlp, MlpClassifier, NetworkTopology,
                        TrainConfig, TrainingError, backprop_step, default_hidden_size, error,
                        forward, gradient, init_network, one_hot, predict, train)
from crmssl.preprocess import Preprocessor

from gradcheck import max_relative_error, numeric_gradient, random_case


@pytest.mark.parametrize(
    "attrs,classes,divisor,plus_one,expected",
    [(31, 2, 4, False, 8), (31, 2, 2, True, 17), (1, 2, 6, False, 1), (21, 2, 4, False, 5),
     (31, 2, 1, False, 33), (31, 2, 6, True, 6)],
)
def test_default_hidden_size(attrs, classes, divisor, plus_one, expected):
    assert default_hidden_size(attrs, classes, divisor, plus_one) == expected


@given(st.integers(1, 200), st.integers(2, 10), st.integers(1, 12), st.booleans())
def test_default_hidden_size_matches_floor(attrs, classes, divisor, plus_one):
    expected = max(1, math.floor((attrs + classes) / divisor) + int(plus_one))
    assert default_hidden_size(attrs, classes, divisor, plus_one) == expected


def test_init_network_deterministic_and_bounded():
    topo = NetworkTopology(5, (4,), 2)
    a, b = init_network(topo, 3), init_network(topo, 3)
    np.testing.assert_array_equal(a.params, b.params)
    assert np.all(np.abs(a.params) <= 0.5)
    assert np.any(a.params != init_network(topo, 4).params)
    assert [w.shape for w in a.weights] == [(6, 4), (5, 2)]


def test_forward_zero_weights_gives_half():
    net = Mlp(NetworkTopology(3, (2,), 2), np.zeros(NetworkTopology(3, (2,), 2).n_params))
    np.testing.assert_array_equal(forward(net, [0.3, -1, 1]), [0.5, 0.5])


def test_forward_hand_evaluated_chain():
    # 1-1-1 net; output layer needs 2 units, second one all-zero weights
    topo = NetworkTopology(1, (1,), 2)
    params = np.array([1.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    out = forward(Mlp(topo, params), [1.0])
    assert out[0] == pytest.approx(0.6750375273768237, abs=1e-12)
    assert out[1] == 0.5


def test_forward_dimension_mismatch():
    net = init_network(NetworkTopology(3, (2,), 2), 0)
    with pytest.raises(ValueError):
        forward(net, [1.0, 2.0])


def test_error_matches_definition():
    net = Mlp(NetworkTopology(2, (2,), 2), np.zeros(NetworkTopology(2, (2,), 2).n_params))
    assert error(net, [[0.1, 0.2]], [[1.0, 0.0]]) == pytest.approx(0.25)
    assert error(net, [[0.1, 0.2]], [[0.5, 0.5]]) == 0.0


def test_error_is_additive_over_examples(rng):
    net = init_network(NetworkTopology(4, (3,), 2), 1)
    X = rng.uniform(-1, 1, (25, 4))
    T = one_hot(rng.integers(0, 2, 25), 2)
    total = error(net, X, T)
    assert total >= 0
    assert total == pytest.approx(sum(error(net, x, t) for x, t in zip(X, T)), rel=1e-12)


def test_gradient_matches_finite_differences(rng):
    for _ in range(30):
        net, x, t = random_case(rng)
        assert max_relative_error(gradient(net, x, t), numeric_gradient(net, x, t)) < 1e-4


def test_backprop_step_zero_rate_is_identity(rng):
    net, x, t = random_case(rng)
    new, vel = backprop_step(net, x, t, lr=0.0)
    np.testing.assert_array_equal(new.params, net.params)
    assert not np.any(vel)


def test_backprop_step_descends(rng):
    for _ in range(50):
        net, x, t = random_case(rng)
        new, _ = backprop_step(net, x, t, lr=1e-3)
        assert error(new, x, t) <= error(net, x, t)


def test_backprop_step_momentum_reuses_velocity(rng):
    net, x, t = random_case(rng)
    g = gradient(net, x, t)
    v = rng.normal(size=net.params.shape)
    new, step = backprop_step(net, x, t, lr=0.1, momentum=0.5, velocity=v)
    np.testing.assert_allclose(step, 0.5 * v - 0.1 * g)
    np.testing.assert_allclose(new.params, net.params + step)


def test_backprop_step_rejects_non_finite():
    topo = NetworkTopology(1, (1,), 2)
    net = Mlp(topo, np.array([np.nan, 0, 0, 0, 0, 0]))
    with pytest.raises(TrainingError):
        backprop_step(net, [1.0], [1.0, 0.0], lr=0.1)


def _encoded(es, pre=None):
    pre = pre or Preprocessor.fit(es)
    return pre.transform(es).features(), one_hot(es.label_codes(), 2), pre


def test_train_epsilon_boundary():
    X, T, _ = _encoded(generate_synthetic(40, 2, 3.0, 0))
    net = init_network(NetworkTopology(2, (2,), 2), 0)
    _, hist = train(net, X, T, TrainConfig(error_epsilon=1e9))
    assert len(hist.errors) == 1 and hist.stop_reason == EPSILON_REACHED


def test_train_runs_all_cycles_and_is_deterministic():
    X, T, _ = _encoded(generate_synthetic(60, 2, 3.0, 0))
    net = init_network(NetworkTopology(2, (2,), 2), 0)
    cfg = TrainConfig(training_cycles=25, shuffle_seed=4)
    a, ha = train(net, X, T, cfg)
    b, hb = train(net, X, T, cfg)
    np.testing.assert_array_equal(a.params, b.params)
    assert ha.errors == hb.errors
    assert len(ha.errors) == 25 and ha.stop_reason == CYCLES_EXHAUSTED
    assert ha.errors[-1] < ha.errors[0]
    # input network untouched
    np.testing.assert_array_equal(net.params, init_network(net.topology, 0).params)


def test_train_rejects_empty_and_divergence():
    net = init_network(NetworkTopology(2, (2,), 2), 0)
    with pytest.raises(TrainingError):
        train(net, np.zeros((0, 2)), np.zeros((0, 2)))
    bad = Mlp(net.topology, np.full(net.topology.n_params, np.nan))
    with pytest.raises(TrainingError):
        train(bad, np.zeros((3, 2)), one_hot([0, 1, 0], 2), TrainConfig(training_cycles=2))


def test_train_separable_data_high_training_accuracy():
    es = generate_synthetic(200, 2, 6.0, 0)
    X, T, _ = _encoded(es)
    clf = MlpClassifier().fit(X, es.label_codes(), 2)
    acc = np.mean(np.argmax(clf.predict_proba(X), axis=1) == es.label_codes())
    assert acc >= 0.95


@pytest.mark.parametrize(
    "raw,label",
    [((0.185, 0.815), "response"), ((0.937, 0.063), "no response"), ((0.5, 0.5), "no response")],
)
def test_predict_confidence_to_label(raw, label):
    topo = NetworkTopology(1, (), 2)
    # no hidden layer; biases chosen so sigmoid outputs equal `raw` at input 0
    logit = [math.log(p / (1 - p)) for p in raw]
    net = Mlp(topo, np.array([0.0, 0.0, *logit]), ("no response", "response"))
    pred = predict(net, [0.0])
    assert pred.label == label
    assert pred.confidences == pytest.approx(raw, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_prediction_invariants(seed, x):
    net = init_network(NetworkTopology(3, (4,), 3), seed)
    net.params *= 3
    raw = forward(net, x)
    assert np.all((raw > 0) & (raw < 1))
    pred = predict(net, x, ("a", "b", "c"))
    assert abs(sum(pred.confidences) - 1.0) < 1e-9
    assert pred.label == "abc"[int(np.argmax(pred.confidences))]


def test_model_json_round_trip_bit_identical(tmp_path, rng):
    net = init_network(NetworkTopology(6, (5,), 2), 9, ("no", "yes"))
    net.params += rng.normal(size=net.params.shape) * 1e-3
    path = tmp_path / "m.json"
    net.save(path)
    back = Mlp.load(path)
    assert back.class_names == ("no", "yes")
    X = rng.uniform(-1, 1, (200, 6))
    np.testing.assert_array_equal(back.params, net.params)
    for x in X[:20]:
        assert predict(back, x) == predict(net, x)


def test_no_hidden_layer_topology():
    clf = MlpClassifier(hidden_size=0, config=TrainConfig(training_cycles=5))
    es = generate_synthetic(30, 3, 2.0, 0)
    X, _, _ = _encoded(es)
    clf.fit(X, es.label_codes(), 2)
    assert clf.net.topology.hidden_sizes == ()
