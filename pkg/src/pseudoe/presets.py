"""Tuned run presets, named ``{dataset}-{variant}``.

Each preset pins the full hyperparameter set for one dataset/variant
combination: likelihood temperatures and slopes, geometry, initialization
scale, optimizer and loop settings.  The triple files themselves are
external; point ``data`` at a directory holding train.txt/valid.txt/test.txt.
"""

from __future__ import annotations

_WN18RR_TFD = dict(alpha=0.3673, alpha_prime=0.75182, u=0.040226, tau1=0.29015, tau2=0.21697)
_FB15K237_TFD = dict(alpha=0.136206, alpha_prime=0.971685, u=0.09592, tau1=0.129815, tau2=0.086457)
_HETIONET_TFD = dict(alpha=0.10124, alpha_prime=1.0, u=0.03, tau1=0.11071, tau2=0.06277)

_WN18RR_LOOP = dict(sigma_init=0.001, batch_size=128, m_negatives=50, augment_reverse=True)
_FB15K237_LOOP = dict(sigma_init=0.001, batch_size=128, m_negatives=50, augment_reverse=True)
_HETIONET_LOOP = dict(
    sigma_init=0.02255, batch_size=100, m_negatives=20, augment_reverse=False, protocol="fixed"
)

PRESETS: dict[str, dict] = {
    "wn18rr-mt": {
        **_WN18RR_TFD,
        **_WN18RR_LOOP,
        "variant": "mt",
        "n_t": 41,
        "n_x": 500,
        "beta": 0.18,
        "circumference": None,
        "learning_rate": 0.08,
        "optimizer": "sm3",
    },
    "wn18rr-dt": {
        **_WN18RR_TFD,
        **_WN18RR_LOOP,
        "variant": "dt",
        "n_t": 1,
        "n_x": 500,
        "beta": 0.18,
        "circumference": None,
        "learning_rate": 0.08,
        "optimizer": "sm3",
    },
    "wn18rr-both": {
        **_WN18RR_TFD,
        **_WN18RR_LOOP,
        "variant": "both",
        "n_t": 2,
        "n_x": 500,
        "beta": 0.18,
        "circumference": None,
        "learning_rate": 0.08,
        "optimizer": "adam",
    },
    "fb15k237-mt": {
        **_FB15K237_TFD,
        **_FB15K237_LOOP,
        "variant": "mt",
        "n_t": 41,
        "n_x": 200,
        "beta": 0.0,
        "circumference": None,
        "learning_rate": 0.1,
        "optimizer": "sm3",
    },
    "fb15k237-dt": {
        **_FB15K237_TFD,
        **_FB15K237_LOOP,
        "variant": "dt",
        "n_t": 1,
        "n_x": 500,
        "beta": 0.15,
        "circumference": 8.0,
        "learning_rate": 0.0001,
        "optimizer": "adam",
    },
    "fb15k237-both": {
        **_FB15K237_TFD,
        **_FB15K237_LOOP,
        "variant": "both",
        "n_t": 3,
        "n_x": 500,
        "beta": 0.15,
        "circumference": None,
        "learning_rate": 0.0001,
        "optimizer": "adam",
    },
    "hetionet-mt": {
        **_HETIONET_TFD,
        **_HETIONET_LOOP,
        "variant": "mt",
        "n_t": 2,
        "n_x": 200,
        "beta": 0.0,
        "circumference": None,
        "learning_rate": 0.0002,
        "optimizer": "adam",
    },
    "hetionet-dt": {
        **_HETIONET_TFD,
        **_HETIONET_LOOP,
        "variant": "dt",
        "n_t": 1,
        "n_x": 200,
        "beta": 0.0,
        "circumference": 8.0,
        "learning_rate": 0.0002,
        "optimizer": "adam",
    },
    "hetionet-both": {
        **_HETIONET_TFD,
        **_HETIONET_LOOP,
        "variant": "both",
        "n_t": 2,
        "n_x": 200,
        "beta": 0.0,
        "circumference": 6.0,
        "learning_rate": 0.0002,
        "optimizer": "adam",
    },
}
