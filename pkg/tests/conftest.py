import numpy as np
import pytest

from crmssl.dataset import SplitSpec, generate_synthetic, split_labeled_unlabeled, split_random
from crmssl.evaluation import prepare


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_split(n=200, d=4, separation=3.0, seed=0, labeled_count=40):
    es = generate_synthetic(n, d, separation, seed)
    train, test = split_random(es, SplitSpec(0.3, seed))
    labeled, unlabeled = split_labeled_unlabeled(train, labeled_count, seed)
    return labeled, unlabeled, test


@pytest.fixture
def small_split():
    return make_split()


@pytest.fixture
def prepared(small_split):
    return prepare(*small_split)
