import numpy as np
import pytest

from fluorospec import core, kernels, synth

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_dataset():
    return synth.generate_dataset(synth.SynthConfig())


@pytest.fixture(scope="session")
def default_fm(default_dataset):
    return core.build_feature_matrix(default_dataset, normalize=True)


@pytest.fixture(scope="session")
def small_fm():
    """3 classes x 3 samples x 5 repetitions of real-shaped spectra."""
    cfg = synth.SynthConfig(samples_per_class=(3, 3, 3), repetitions_per_sample=5, seed=11)
    return core.build_feature_matrix(synth.generate_dataset(cfg), normalize=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


backends = pytest.mark.parametrize(
    "backend",
    ["numpy", pytest.param("numba", marks=pytest.mark.skipif(not kernels.HAVE_NUMBA,
                                                           reason="numba not installed"))],
)


@pytest.fixture
def use_backend(monkeypatch):
    """Route the package's kernel calls through one backend."""
    def _use(name):
        impl = kernels.get_backend(name)
        for fn in ("best_split", "tree_apply", "knn_predict", "smo_solve", "adam_update"):
            monkeypatch.setattr(kernels, fn, getattr(impl, fn))
    return _use
