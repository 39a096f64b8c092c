"""Self-trained multilayer perceptron for semi-supervised customer classification."""
from ._backend import BACKEND
from .baselines import GaussianNaiveBayes, KnnClassifier
from .dataset import (Attribute, ExampleSet, SplitSpec, generate_synthetic, load_csv,
                      split_labeled_unlabeled, split_random)
from .evaluation import ConfusionMatrix, compare, confusion, metrics, sweep_divisor
from .mlp import (Mlp, MlpClassifier, NetworkTopology, Prediction, TrainConfig,
                  default_hidden_size, init_network, predict, train)
from .preprocess import Preprocessor
from .ssl import SelfTrainConfig, ViewSplit, co_train, select_confident, self_train

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Attribute",
    "ConfusionMatrix",
    "ExampleSet",
    "GaussianNaiveBayes",
    "KnnClassifier",
    "Mlp",
    "MlpClassifier",
    "NetworkTopology",
    "Prediction",
    "Preprocessor",
    "SelfTrainConfig",
    "SplitSpec",
    "TrainConfig",
    "ViewSplit",
    "co_train",
    "compare",
    "confusion",
    "default_hidden_size",
    "generate_synthetic",
    "init_network",
    "load_csv",
    "metrics",
    "predict",
    "select_confident",
    "self_train",
    "split_labeled_unlabeled",
    "split_random",
    "sweep_divisor",
    "train",
]
