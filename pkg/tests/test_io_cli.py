import json
import os

import numpy as np
import pytest

from rtesource import DiscDomain, Grid
from rtesource import io as rio
from rtesource.cli import main
from rtesource.errors import FormatError
from rtesource.forward import BoundaryData


def make_bd(nb=16, nd=12, seed=0):
    rng = np.random.default_rng(seed)
    beta = 2 * np.pi * np.arange(nb) / nb
    ang = 2 * np.pi * np.arange(nd) / nd
    return BoundaryData(values=rng.random((nb, nd)), boundary_angles=beta,
                        direction_angles=ang)


def test_boundary_roundtrip(tmp_path):
    bd = make_bd()
    path = tmp_path / "b.data"
    rio.save_boundary_data(path, bd)
    back = rio.load_boundary_data(path)
    assert np.array_equal(back.values, bd.values)
    assert np.allclose(back.boundary_angles, bd.boundary_angles)


def test_field_roundtrip_real_and_complex(tmp_path):
    g = Grid.make(16)
    real = np.arange(256.0).reshape(16, 16)
    cplx = real + 1j * real[::-1]
    rio.save_field(tmp_path / "r.field", real, g)
    rio.save_field(tmp_path / "c.field", cplx, g)
    back_r, hdr_r = rio.load_field(tmp_path / "r.field")
    back_c, hdr_c = rio.load_field(tmp_path / "c.field")
    assert np.array_equal(back_r, real) and not hdr_r["complex"]
    assert np.array_equal(back_c, cplx) and hdr_c["complex"]
    assert hdr_c["n"] == 16


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "x.data"
    with open(path, "wb") as fh:
        fh.write(b'{"magic": "something-else"}\n')
    with pytest.raises(FormatError):
        rio.load_boundary_data(path)


def test_truncated_payload_rejected(tmp_path):
    bd = make_bd()
    path = tmp_path / "b.data"
    rio.save_boundary_data(path, bd)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(FormatError):
        rio.load_boundary_data(path)


def test_unparsable_header_rejected(tmp_path):
    path = tmp_path / "junk.data"
    path.write_bytes(b"\x00\x01\x02 not json\n" + b"\x00" * 64)
    with pytest.raises(FormatError):
        rio.load_boundary_data(path)


def test_write_pgm(tmp_path):
    img = np.linspace(0, 1, 64).reshape(8, 8)
    path = tmp_path / "img.pgm"
    rio.write_pgm(path, img)
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n8 8\n255\n")
    meta = json.loads((tmp_path / "img.pgm.json").read_text())
    assert meta["min"] == 0.0 and meta["max"] == 1.0


TINY_CONFIG = {
    "medium": {"g": 0.2, "mu_s": 1.0, "background": 0.5,
               "attenuation_variant": "discontinuous",
               "regions": [], "source_regions": [
                   {"shape": "disc", "params": [0.0, 0.0, 0.4], "value": 1.0}]},
    "forward": {"grid_n": 48, "n_dirs": 30, "tol": 1e-6,
                "max_iters": 400, "n_boundary": 40},
    "reconstruction": {"grid_n": 32, "M": 1, "N": 8, "n_dirs_h": 60},
}


def write_config(tmp_path, cfg=None):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg or TINY_CONFIG))
    return str(path)


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["forward"]) == 2                      # missing config
    assert main(["reconstruct", "--config",
                 write_config(tmp_path)]) == 2         # missing data
    assert main(["verify", "nope"]) == 2               # unknown suite
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["forward", "--config", str(bad)]) == 2


def test_cli_missing_files_are_io_errors(tmp_path):
    assert main(["forward", "--config", str(tmp_path / "none.json")]) == 3
    assert main(["plot", "--data", str(tmp_path / "nowhere")]) == 3
    assert main(["metrics", "--data", str(tmp_path / "nowhere")]) == 3


def test_cli_forward_reconstruct_plot_metrics(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = str(tmp_path / "run")
    assert main(["forward", "--config", cfg, "--out", out]) == 0
    data = os.path.join(out, "boundary.data")
    assert os.path.exists(data)
    log = json.loads((tmp_path / "run" / "forward_log.json").read_text())
    assert log["final_residual"] < 1e-6

    bundle = str(tmp_path / "bundle")
    assert main(["reconstruct", "--config", cfg, "--data", data,
                 "--out", bundle]) == 0
    assert os.path.exists(os.path.join(bundle, "f_rec.field"))
    assert os.path.exists(os.path.join(bundle, "diagnostics.json"))
    assert os.path.exists(os.path.join(bundle, "cross_section.csv"))

    assert main(["plot", "--data", bundle]) == 0
    assert os.path.exists(os.path.join(bundle, "f_rec.pgm"))

    assert main(["metrics", "--data", bundle]) == 0
    printed = capsys.readouterr().out
    assert "rel_l2" in printed


def test_cli_inverse_crime_guard(tmp_path):
    cfg = dict(TINY_CONFIG)
    cfg["reconstruction"] = dict(cfg["reconstruction"], grid_n=48)
    path = write_config(tmp_path, cfg)
    # needs real data on disk first
    out = str(tmp_path / "fw")
    assert main(["forward", "--config", path, "--out", out]) == 0
    data = os.path.join(out, "boundary.data")
    assert main(["reconstruct", "--config", path, "--data", data]) == 2


def test_cli_noise_is_seeded_and_multiplicative(tmp_path):
    bd = make_bd(nb=8, nd=6, seed=1)
    from rtesource.cli import apply_noise
    import copy
    a = apply_noise(copy.deepcopy(bd), 0.01, 42)
    b = apply_noise(copy.deepcopy(bd), 0.01, 42)
    c = apply_noise(copy.deepcopy(bd), 0.01, 43)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    ratio = a.values / bd.values
    assert np.max(np.abs(ratio - 1.0)) < 0.1


def test_cli_verify_runs_quick_suite(tmp_path, capsys):
    out = str(tmp_path / "v")
    assert main(["verify", "geometry", "--out", out]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["suite"] == "geometry"
    assert all(c["pass"] for c in report["checks"])
    assert os.path.exists(os.path.join(out, "verify_geometry.json"))
