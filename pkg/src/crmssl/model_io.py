"""Save and load a trained network together with its preprocessing."""
import json

from .mlp import Mlp
from .preprocess import Preprocessor

FORMAT = "crmssl-model/1"


def save_model(path, net: Mlp, preprocessor: Preprocessor, label_column: str) -> None:
    doc = {
        "format": FORMAT,
        "label_column": label_column,
        "preprocessing": preprocessor.to_dict(),
        "network": net.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    """Returns ``(net, preprocessor, label_column)``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT:
        raise ValueError(f"{path}: not a {FORMAT} document")
    return (Mlp.from_dict(doc["network"]), Preprocessor.from_dict(doc["preprocessing"]),
            doc["label_column"])
