import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from conftest import GOLDEN, load_golden_points
from evscan.cli import BENCH_COLUMNS, main
from evscan.events import read_voxel_grid, write_voxel_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def events_file(tmp_path):
    rng = np.random.default_rng(3)
    n = 500
    t = np.sort(rng.uniform(0, 1, n))
    x, y = rng.integers(0, 8, n), rng.integers(0, 6, n)
    p = rng.integers(0, 2, n)
    lines = ["8 6"] + [f"{ti:.9f} {xi} {yi} {pi}" for ti, xi, yi, pi in zip(t, x, y, p)]
    path = tmp_path / "events.txt"
    path.write_text("\n".join(lines) + "\n")
    return path, np.where(p == 0, -1, 1).sum()


class TestCurve:
    def test_hilbert_text_matches_golden(self, capsys):
        code, out, _ = run(capsys, "curve", "--kind", "hilbert", "--dims", "8x8")
        assert code == 0
        rows = np.loadtxt(io.StringIO(out), dtype=np.int64)
        assert rows.shape == (64, 3)
        np.testing.assert_array_equal(rows, load_golden_points("hilbert_8x8x1"))

    def test_binary_linear_indices(self, tmp_path, capsys):
        target = tmp_path / "c.bin"
        assert run(capsys, "curve", "--kind", "reshape", "--dims", "3x2x2", "--format", "bin", "--out", str(target))[0] == 0
        assert np.fromfile(target, "<u4").tolist() == list(range(12))

    def test_bad_dims_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["curve", "--dims", "8by8"])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert err.startswith("evscan: error: code=2 type=UsageError")

    def test_invalid_peano_size_is_validation_error(self, capsys):
        code, _, err = run(capsys, "curve", "--kind", "peano", "--dims", "4x4")
        assert code == 1
        assert "code=1 type=ValueError" in err
        assert err.count("\n") == 1


class TestLocality:
    def test_hilbert_has_no_jumps(self, capsys):
        code, out, _ = run(capsys, "locality", "--kinds", "hilbert,reshape", "--sizes", "2,4,8", "--dims", "2,3")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 12
        for row in rows:
            if row["kind"] == "hilbert":
                assert float(row["jump_ratio"]) == 0.0
        slr = {r["N"]: r["slr"] for r in rows if r["kind"] == "reshape" and r["D"] == "2"}
        assert slr == {"2": "2", "4": "10", "8": "50"}


class TestVoxelize:
    def test_sum_equals_polarity_sum(self, events_file, tmp_path, capsys):
        path, psum = events_file
        target = tmp_path / "v.evx"
        assert run(capsys, "voxelize", str(path), "--out", str(target))[0] == 0
        grid = read_voxel_grid(target)
        assert grid.shape == (5, 6, 8)
        assert abs(grid.astype(np.float64).sum() - psum) < 1e-4

    def test_frame_times_write_one_file_per_group(self, events_file, tmp_path, capsys):
        path, _ = events_file
        target = tmp_path / "v.evx"
        code, _, _ = run(capsys, "voxelize", str(path), "--frame-times", "0,0.5,1", "--bins", "3", "--out", str(target))
        assert code == 0
        assert sorted(p.name for p in tmp_path.glob("v_*.evx")) == ["v_0000.evx", "v_0001.evx"]

    def test_csv(self, events_file, capsys):
        code, out, _ = run(capsys, "voxelize", str(events_file[0]), "--format", "csv")
        assert code == 0 and out.startswith("bin,y,x,value\n")

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "voxelize", str(tmp_path / "nope.txt"))
        assert code == 2 and "type=InputFileError" in err

    def test_malformed_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("4 4\n0.1 1 1\n")
        code, _, err = run(capsys, "voxelize", str(bad))
        assert code == 2 and "line 2" in err

    def test_unknown_sensor_size(self, tmp_path, capsys):
        f = tmp_path / "nohdr.txt"
        f.write_text("0.1 1 1 1\n")
        assert run(capsys, "voxelize", str(f))[0] == 1
        assert run(capsys, "voxelize", str(f), "--dims", "2x2", "--out", str(tmp_path / "o.evx"))[0] == 0


class TestMask:
    def test_golden(self, capsys):
        code, out, _ = run(capsys, "mask", "--dims", "8x8", "--win-size", "4", "--offset", "2,3")
        assert code == 0
        header, body = out.split("\n", 1)
        assert header == "# dh=2 dw=3 s=4 regions=9"
        labels = np.loadtxt(io.StringIO(body), dtype=np.int64)
        np.testing.assert_array_equal(labels, np.loadtxt(GOLDEN / "mask_8x8_s4_dh2_dw3.txt", dtype=np.int64))

    def test_offset_out_of_range(self, capsys):
        assert run(capsys, "mask", "--dims", "8x8", "--win-size", "4", "--offset", "4,0")[0] == 1


class TestScanblock:
    def test_identity_like_round_trip(self, tmp_path, capsys):
        vol = np.random.default_rng(0).normal(size=(2, 8, 8)).astype(np.float32)
        src = tmp_path / "in.evx"
        write_voxel_grid(vol, src)
        target = tmp_path / "out.evx"
        code, _, _ = run(capsys, "scanblock", str(src), "--win-size", "4", "--samples", "2", "--out", str(target))
        assert code == 0
        assert read_voxel_grid(target).shape == (2, 8, 8)

    def test_bad_magic(self, tmp_path, capsys):
        src = tmp_path / "in.evx"
        src.write_bytes(b"NOTAGRID" + bytes(12))
        code, _, err = run(capsys, "scanblock", str(src))
        assert code == 2 and "magic" in err


class TestBench:
    def test_columns(self, capsys):
        code, out, _ = run(capsys, "bench", "--lengths", "16,32", "--state-dim", "2", "--batch", "2",
                           "--sizes", "8", "--repeat", "1")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert tuple(rows[0]) == BENCH_COLUMNS
        assert len(rows) == 1 + 4 + 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "evscan", "curve", "--dims", "2x2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["0 0 0", "0 1 0", "1 1 0", "1 0 0"]


def test_no_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
