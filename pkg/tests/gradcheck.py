"""Central-difference oracle for the single-example squared error."""
import numpy as np

from crmssl.mlp import Mlp, error


def numeric_gradient(net: Mlp, x, t, h=1e-5):
    g = np.empty_like(net.params)
    probe = net.copy()
    for i in range(len(g)):
        orig = probe.params[i]
        probe.params[i] = orig + h
        up = error(probe, x, t)
        probe.params[i] = orig - h
        down = error(probe, x, t)
        probe.params[i] = orig
        g[i] = (up - down) / (2 * h)
    return g


def max_relative_error(analytic, numeric):
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))))


def random_case(rng):
    """Random topology (1-2 hidden layers, sizes <= 8, inputs <= 10), weights and example."""
    from crmssl.mlp import NetworkTopology, init_network

    n_in = int(rng.integers(1, 11))
    hidden = tuple(int(h) for h in rng.integers(1, 9, size=int(rng.integers(1, 3))))
    n_out = int(rng.integers(2, 5))
    net = init_network(NetworkTopology(n_in, hidden, n_out), int(rng.integers(2**31)))
    net.params *= rng.uniform(0.5, 4.0)
    x = rng.uniform(-1, 1, n_in)
    t = np.zeros(n_out)
    t[rng.integers(n_out)] = 1.0
    return net, x, t
