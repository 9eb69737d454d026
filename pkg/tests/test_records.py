import numpy as np
import pytest

from mmwave_ce import (
    AngleGrid,
    ArrayConfig,
    ClusterChannelConfig,
    draw_channel,
    gen_mbc_codebook,
    gen_rc_codebook,
    observe,
    sample_support,
)
from mmwave_ce.records import from_record, load_record, save_record, to_record

BS = MS = ArrayConfig(16)
GRID = AngleGrid.sine_uniform(16)
CFG = ClusterChannelConfig(
    num_clusters=2, mean_aoa=(0.4, -0.4), mean_aod=(0.4, -0.4),
    spread_aoa=np.deg2rad(10), spread_aod=np.deg2rad(10), rays_aoa=3, rays_aod=3,
)


def test_channel_round_trip(tmp_path):
    real = draw_channel(CFG, BS, MS, GRID, GRID, seed=0)
    path = tmp_path / "chan.json"
    save_record(path, real)
    back = load_record(path)
    assert np.array_equal(back.h, real.h)
    assert np.array_equal(back.hv_truth, real.hv_truth)
    assert np.array_equal(back.rays, real.rays)
    assert back.p_measured == real.p_measured
    assert back.rank_truth == real.rank_truth


def test_off_grid_channel_round_trip(tmp_path):
    cfg = ClusterChannelConfig(
        num_clusters=1, mean_aoa=(0.2,), mean_aod=(-0.3,),
        spread_aoa=0.1, spread_aod=0.1, rays_aoa=2, rays_aod=2, on_grid=False,
    )
    real = draw_channel(cfg, BS, MS, GRID, GRID, seed=1)
    back = from_record(to_record(real))
    assert back.hv_truth is None
    assert np.array_equal(back.h, real.h)


def test_codebook_round_trip(tmp_path):
    for cb in (gen_rc_codebook(16, 6, seed=2), gen_mbc_codebook(16, 6, 4, seed=3)):
        back = from_record(to_record(cb))
        assert np.array_equal(back.matrix, cb.matrix)
        assert back.scheme == cb.scheme
        assert back.subarrays == cb.subarrays


def test_observation_round_trip(tmp_path):
    real = draw_channel(CFG, BS, MS, GRID, GRID, seed=4)
    z = gen_rc_codebook(16, 8, seed=5)
    f = gen_rc_codebook(16, 8, seed=6)
    om = sample_support(8, 8, 30, seed=7)
    obs = observe(real.h, z, f, om, sigma=0.1, seed=8)
    back = from_record(to_record(obs))
    assert np.array_equal(back.omega, obs.omega)
    assert np.array_equal(back.values, obs.values)
    assert back.sigma == obs.sigma


def test_records_are_self_describing():
    real = draw_channel(CFG, BS, MS, GRID, GRID, seed=9)
    rec = to_record(real)
    assert rec["record"] == "channel_realization"
    assert rec["version"] == 1
    with pytest.raises(ValueError):
        from_record({"record": "mystery"})
    with pytest.raises(TypeError):
        to_record(object())
