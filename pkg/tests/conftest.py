import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from dtameta import FitOptions, ModelSpec, PriorConfig, fit
from dtameta.datasets import telomerase
from dtameta.priors import CorrelationPrior, VariancePrior


def paper_priors() -> PriorConfig:
    """The no-covariate example call: PC(3, 0.05) variances, Normal(0, 5) correlation."""
    return PriorConfig(
        var=VariancePrior("pc", (3.0, 0.05)),
        var2=VariancePrior("pc", (3.0, 0.05)),
        cor=CorrelationPrior("normal", (0.0, 5.0)),
    )


@pytest.fixture(scope="session")
def telomerase_fit():
    """The reference fit used across the suite: seed 1, 10000 samples."""
    spec = ModelSpec(model_type=1, link="logit", nsample=10000, seed=1)
    return fit(telomerase(), spec, paper_priors(), FitOptions())


@pytest.fixture(scope="session")
def telomerase_fit_small():
    spec = ModelSpec(model_type=1, link="logit", nsample=2000, seed=5)
    return fit(telomerase(), spec, paper_priors(), FitOptions())
