import pytest

from varsmile import ConstantSigma, LsvModel, TanhEta


@pytest.fixture(scope="session")
def tanh_model():
    """Bounded-leverage lognormal-vol test model (rho = 0)."""
    return LsvModel(
        s0=1.0,
        v0=0.1,
        rho=0.0,
        eta=TanhEta(f0=1.0, f1=-0.1, x0=0.0),
        sigma=ConstantSigma(2.0),
    )
