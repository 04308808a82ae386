"""The feed-forward network behind the uniform classifier contract."""
import numpy as np

from .. import ann
from ..core import N_CLASSES
from .base import TrainedModel


class MlpClassifierModel(TrainedModel):
    algorithm = "MLP"

    def __init__(self, params, classes, n_features, net, epoch_loss=()):
        super().__init__(params, classes, n_features)
        self.net = net
        self.epoch_loss = list(epoch_loss)

    def _predict(self, X):
        return ann.predict(self.net, X)

    def get_state(self):
        return {"hidden_layers": list(self.net.arch.hidden_layers), "params": self.net.params}

    @classmethod
    def from_state(cls, params, classes, n_features, state):
        arch = ann.MlpArchitecture(tuple(state["hidden_layers"]), n_features, N_CLASSES)
        return cls(params, classes, n_features, ann.MlpModel(arch, state["params"]))


def fit_mlp(X, y, classes, params, seed):
    arch = ann.MlpArchitecture(tuple(params["hidden_layers"]), X.shape[1], N_CLASSES)
    cfg = ann.TrainConfig(int(params["epochs"]), int(params["batch_size"]), seed, True,
                          float(params["learning_rate"]))
    res = ann.train(arch, cfg, X, y)
    # the softmax covers every quality class, trained or not
    return MlpClassifierModel(params, np.arange(N_CLASSES), X.shape[1], res.model, res.epoch_loss)
