import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tpgmm_aug.frames import Frame
from tpgmm_aug.tpgmm import Situation, TpGmm

from oracles import random_rotation

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_spd(D, rng, scale=1.0):
    A = rng.normal(size=(D, D))
    return scale * (A @ A.T / D + 0.2 * np.eye(D))


def random_situation(p, N, rng, spread=2.0):
    return Situation(tuple(Frame(random_rotation(p, rng), rng.uniform(-spread, spread, p))
                           for _ in range(N)))


def random_model(mode, p, N, K, rng):
    D = p + 1 if mode == "time" else 2 * p
    d = 1 if mode == "time" else p
    w = rng.dirichlet(np.ones(K))
    mu = rng.normal(size=(N, K, D))
    S = np.array([[random_spd(D, rng) for _ in range(K)] for _ in range(N)])
    return TpGmm(mode, w, mu, S, d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
