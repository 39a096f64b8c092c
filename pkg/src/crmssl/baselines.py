"""KNN and Gaussian naive Bayes, with the same fit/predict_proba contract as MlpClassifier."""
import numpy as np

from .mlp import make_prediction

VARIANCE_FLOOR = 1e-9


class KnnClassifier:
    """Majority vote among the k nearest stored points (Euclidean).

    Distance ties are broken by training-row order.
    """

    def __init__(self, k: int = 5):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.X = None
        self.y = None
        self.n_classes = None

    def fit(self, X, y, n_classes: int):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.intp)
        self.n_classes = n_classes
        if len(self.X) == 0:
            raise ValueError("cannot fit KNN on no data")
        return self

    def predict_proba(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.k > len(self.X):
            raise ValueError(f"k={self.k} exceeds the {len(self.X)} stored points")
        out = np.empty((len(X), self.n_classes))
        for start in range(0, len(X), 64):
            Q = X[start:start + 64]
            d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
            for r, idx in enumerate(nearest):
                out[start + r] = np.bincount(self.y[idx], minlength=self.n_classes) / self.k
        return out


def knn_predict(model: KnnClassifier, features, class_names):
    return make_prediction(model.predict_proba(features)[0], class_names)


class GaussianNaiveBayes:
    """Class priors times per-attribute Gaussian likelihoods, in log space."""

    def __init__(self, variance_floor: float = VARIANCE_FLOOR):
        self.variance_floor = variance_floor
        self.priors = None
        self.means = None
        self.variances = None

    def fit(self, X, y, n_classes: int):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.intp)
        if len(X) == 0:
            raise ValueError("cannot fit naive Bayes on no data")
        self.priors = np.bincount(y, minlength=n_classes) / len(y)
        self.means = np.zeros((n_classes, X.shape[1]))
        self.variances = np.ones((n_classes, X.shape[1]))
        for c in range(n_classes):
            Xc = X[y == c]
            if len(Xc):
                self.means[c] = Xc.mean(axis=0)
                self.variances[c] = Xc.var(axis=0)
        self.variances = np.maximum(self.variances, self.variance_floor)
        return self

    def log_joint(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors)
        ll = -0.5 * (
            np.log(2.0 * np.pi * self.variances)[None, :, :]
            + (X[:, None, :] - self.means[None, :, :]) ** 2 / self.variances[None, :, :]
        ).sum(axis=2)
        return log_prior[None, :] + ll

    def predict_proba(self, X):
        lj = self.log_joint(X)
        lj = lj - lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        return p / p.sum(axis=1, keepdims=True)


def nb_fit(X, y, n_classes: int) -> GaussianNaiveBayes:
    return GaussianNaiveBayes().fit(X, y, n_classes)


def nb_predict(model: GaussianNaiveBayes, features, class_names):
    return make_prediction(model.predict_proba(features)[0], class_names)
