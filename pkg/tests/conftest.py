import warnings

import numpy as np
import pytest

from pseudoe.geometry import GeometryConfig, Signature
from pseudoe.likelihood import TfdParams
from pseudoe.model import InitConfig, init
from pseudoe.relmaps import Variant


def make_random_model(
    n_entities=6,
    n_relations=3,
    n_t=2,
    n_x=3,
    variant=Variant.BOTH,
    beta=0.3,
    cylinder=None,
    seed=0,
    sigma=0.5,
    tau1=0.7,
    tau2=0.5,
    u=0.1,
    alpha=0.4,
    alpha_prime=0.9,
    swap=False,
):
    """Small model with random coordinates and non-zero biases."""
    geometry = GeometryConfig(Signature(n_t, n_x), cylinder)
    tfd = TfdParams(tau1=tau1, tau2=tau2, u=u, alpha=alpha, alpha_prime=alpha_prime, beta=beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = init(
            n_entities,
            n_relations,
            geometry,
            variant,
            InitConfig(sigma_init=sigma, seed=seed),
            tfd=tfd,
            swap_transforms=swap,
        )
    rng = np.random.default_rng(seed + 1)
    params.node_bias[:] = rng.normal(0.0, 0.3, n_entities)
    params.rel_c[:] = rng.normal(0.0, 0.3, n_relations)
    return params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
