import json
import warnings

import numpy as np
import pytest

from cellmat.cli import main
from cellmat.config import load_config, parse_config
from cellmat.errors import ConfigError
from cellmat.gridio import read_grid, write_grid
from cellmat.optimize import seed_lattice


def base_cfg(**kw):
    cfg = {"n": 8, "f_star": 0.3, "gamma1": 0.0}
    cfg.update(kw)
    return cfg


class TestConfig:
    def test_minimal(self):
        problem, material = parse_config(base_cfg())
        assert problem.n == 8
        assert material is None

    def test_material_lookup(self):
        problem, material = parse_config(base_cfg(material="PC"))
        assert material.name == "PC"
        assert problem.sigma1_rel == 0.044

    def test_material_conflicts_with_sigma1(self):
        with pytest.raises(ConfigError, match="not both"):
            parse_config(base_cfg(material="PC", sigma1_rel=0.01))

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="(?i)additional properties"):
            parse_config(base_cfg(volume=0.5))
        with pytest.raises(ConfigError):
            parse_config(base_cfg(ks={"sharpness": 10}))

    def test_bad_types_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(base_cfg(n=8.5))
        with pytest.raises(ConfigError):
            parse_config(base_cfg(gamma1=2.0))
        with pytest.raises(ConfigError):
            parse_config({"n": 8})

    def test_ks_block(self):
        problem, _ = parse_config(base_cfg(
            gamma1=1.0, ks={"kappa1": 0, "kappa2": 1, "n_seg": 3,
                            "m_bands": 5, "zeta": 60.0}))
        assert problem.ks.zeta == 60.0
        assert problem.ks.n_seg == 3

    def test_load_rejects_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{nope")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(p)
        p.write_text("[1,2]")
        with pytest.raises(ConfigError, match="object"):
            load_config(p)


class TestCli:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n": 8}))
        rc = main(["optimize", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ConfigError"

    def test_evaluate_round_trip(self, tmp_path, capsys):
        grid = tmp_path / "d.grid"
        write_grid(grid, seed_lattice(8, 0.3), 8)
        argv = ["evaluate", "--grid", str(grid), "--material", "PC",
                "--n-seg", "2", "--m-bands", "4"]
        assert main(argv) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["material"] == "PC"
        assert rep["failure"] in ("yield", "buckling", "simultaneous")
        assert rep["sigma_c"] < rep["sigma_y"]

        # byte-identical on a second run
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_evaluate_needs_material_info(self, tmp_path, capsys):
        grid = tmp_path / "d.grid"
        write_grid(grid, seed_lattice(8, 0.3), 8)
        assert main(["evaluate", "--grid", str(grid)]) == 2
        assert main(["evaluate", "--grid", str(grid), "--material", "PC",
                     "--sigma1-rel", "0.01"]) == 2

    def test_band_and_sweep(self, tmp_path, capsys):
        grid = tmp_path / "d.grid"
        write_grid(grid, seed_lattice(8, 0.3), 8)
        assert main(["band", "--grid", str(grid), "--k", "0.8,0.3",
                     "--m-bands", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["samples"]) == 1
        assert len(out["samples"][0]["tau"]) == 3

        # the exact zone center expands into offset and pinned samples
        assert main(["band", "--grid", str(grid), "--k", "0,0"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert [s["pinned"] for s in out["samples"]] == [False, False, True]

        sweep_csv = tmp_path / "s.csv"
        assert main(["sweep", "--grid", str(grid), "--n-seg", "2",
                     "--m-bands", "3", "--out", str(sweep_csv)]) == 0
        lines = sweep_csv.read_text().splitlines()
        assert lines[0] == "arclength,kx,ky,pinned,tau_1,tau_2,tau_3"
        assert len(lines) == 1 + 4 * 2 + 2

        assert main(["band", "--grid", str(grid), "--k", "zzz"]) == 2

    def test_fit(self, tmp_path, capsys):
        pts = tmp_path / "p.txt"
        pts.write_text("# density strength\n0.1, 0.05\n0.05 0.0125\n0.2 1\n")
        assert main(["fit", "--points", str(pts)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["n0"] == pytest.approx(2.0, rel=1e-12)
        assert out["c0"] == pytest.approx(5.0, rel=1e-12)
        assert out["points_given"] == 3

    def test_check_gradients(self, capsys):
        assert main(["check-gradients", "--n", "4", "--elements", "4"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["pass"] is True
        assert out["err_tau"] < 1e-3

    def test_optimize_end_to_end(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(base_cfg(max_iter=4, material="PC")))
        out_dir = tmp_path / "run"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rc = main(["optimize", "--config", str(cfg),
                       "--out", str(out_dir)])
        assert rc == 0
        rep = json.loads((out_dir / "report.json").read_text())
        assert rep["iterations"] == 4
        assert rep["design"]["material"] == "PC"
        assert rep["design"]["sigma_c"] is None  # stiffness run, no bands
        rho, n = read_grid(out_dir / "design_int.grid")
        assert n == 8
        assert np.all((rho >= 0.0) & (rho <= 1.0))

    def test_optimize_seed_grid_mismatch(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(base_cfg()))
        bad = tmp_path / "seed.grid"
        write_grid(bad, np.zeros(16), 4)
        rc = main(["optimize", "--config", str(cfg), "--out",
                   str(tmp_path / "r"), "--seed-grid", str(bad)])
        assert rc == 2
