import numpy as np
import pytest

from evscan.block import DUAL_SCAN, ScanBlockConfig, run_hsfc_block
from evscan.curves import CurveKind, GridDims, generate
from evscan.ssm import DiscreteSsm, SsmParams

IDENTITY = DiscreteSsm(np.zeros(1), np.ones(1), np.ones(1))
DECAY = SsmParams(np.array([-0.5]), np.array([1.0]), np.array([1.0]), 1.0)


def suffix_cells(kind, dims, cell):
    idx = generate(kind, dims).linear_indices.tolist()
    return set(idx[idx.index(cell):])


class TestScanBlock:
    def test_identity_ssm_passes_through(self, rng):
        vol = rng.normal(size=(3, 6, 5))
        out = run_hsfc_block(ScanBlockConfig(IDENTITY), vol)
        np.testing.assert_allclose(out, vol, atol=1e-12)

    def test_identity_with_windows(self, rng):
        vol = rng.normal(size=(2, 8, 8))
        out = run_hsfc_block(ScanBlockConfig(IDENTITY, win_size=4, samples=3), vol)
        np.testing.assert_allclose(out, vol, atol=1e-12)

    def test_impulse_support_is_union_of_suffixes(self):
        dims = GridDims(4, 4)
        for cell in (0, 5, 10, 15):
            vol = np.zeros((1, 4, 4))
            vol.reshape(-1)[cell] = 1.0
            out = run_hsfc_block(ScanBlockConfig(DECAY), vol)
            expected = set().union(*(suffix_cells(k, dims, cell) for k in DUAL_SCAN))
            assert set(np.flatnonzero(out[0]).tolist()) == expected

    def test_channels_scanned_independently_in_2d(self, rng):
        vol = rng.normal(size=(3, 4, 4))
        out = run_hsfc_block(ScanBlockConfig(DECAY), vol)
        for c in range(3):
            alone = run_hsfc_block(ScanBlockConfig(DECAY), vol[c:c + 1])
            np.testing.assert_allclose(out[c], alone[0], atol=1e-12)

    def test_curve_dim_three_mixes_channels(self):
        vol = np.zeros((2, 4, 4))
        vol[0, 0, 0] = 1.0
        out2 = run_hsfc_block(ScanBlockConfig(DECAY), vol)
        out3 = run_hsfc_block(ScanBlockConfig(DECAY, curve_dim=3), vol)
        assert not out2[1].any()
        assert out3[1].any()

    def test_deterministic(self, rng):
        vol = rng.normal(size=(2, 8, 8))
        cfg = ScanBlockConfig(DECAY, win_size=4, samples=4, seed=5)
        assert run_hsfc_block(cfg, vol).tobytes() == run_hsfc_block(cfg, vol).tobytes()

    def test_seed_changes_sampled_result(self, rng):
        vol = rng.normal(size=(1, 8, 8))
        a = run_hsfc_block(ScanBlockConfig(DECAY, win_size=4, samples=2, seed=0), vol)
        b = run_hsfc_block(ScanBlockConfig(DECAY, win_size=4, samples=2, seed=1), vol)
        assert not np.array_equal(a, b)

    def test_enumeration_is_translation_equivariant(self, rng):
        vol = rng.normal(size=(1, 8, 8))
        cfg = ScanBlockConfig(DECAY, win_size=4, enumerate_offsets=True)
        moved = run_hsfc_block(cfg, np.roll(vol, (4, 0), axis=(1, 2)))
        np.testing.assert_allclose(moved, np.roll(run_hsfc_block(cfg, vol), (4, 0), axis=(1, 2)), atol=1e-12)

    def test_single_kind(self, rng):
        vol = rng.normal(size=(1, 4, 4))
        out = run_hsfc_block(ScanBlockConfig(IDENTITY, kinds=(CurveKind.ZORDER,)), vol)
        np.testing.assert_allclose(out, vol, atol=1e-12)

    def test_dims_mismatch(self):
        cfg = ScanBlockConfig(DECAY, dims=GridDims(4, 4))
        run_hsfc_block(cfg, np.zeros((1, 4, 4)))
        with pytest.raises(ValueError):
            run_hsfc_block(cfg, np.zeros((1, 4, 5)))

    @pytest.mark.parametrize("kwargs", [dict(samples=0), dict(win_size=0), dict(curve_dim=1), dict(kinds=())])
    def test_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            ScanBlockConfig(DECAY, **kwargs)

    def test_rejects_non_volume(self):
        with pytest.raises(ValueError):
            run_hsfc_block(ScanBlockConfig(DECAY), np.zeros((4, 4)))
