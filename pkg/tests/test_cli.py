import csv
import json

import numpy as np
import pytest

from stokespec import fileio
from stokespec.cli import main
from stokespec.config import JobConfig, load_config, worker_count
from stokespec.errors import ConfigurationError, ParseError
from stokespec.fields import VectorShellField
from stokespec.sphgrid import build_shell_grid


def _csv_rows(path):
    with open(path) as fh:
        head = json.loads(fh.readline()[1:])
        return head, list(csv.DictReader(fh))


# --- eigs -----------------------------------------------------------------------

def test_eigs_ball_table(tmp_path, capsys):
    out = tmp_path / "table"
    assert main(["eigs", "--sigma", "0", "--lmax", "4", "--per-l", "3", "--out", str(out)]) == 0
    head, rows = _csv_rows(tmp_path / "table.csv")
    assert head["generator"] == "stokespec" and head["config"]["lmax"] == 4 and "version" in head
    first = rows[0]
    assert first["rank"] == "1" and first["family"] == "toroidal"
    assert (first["l"], first["j"], first["multiplicity"]) == ("1", "1", "3")
    assert float(first["lambda"]) == pytest.approx(20.190729, rel=1e-7)
    assert float(first["lambda"]) == float(repr(float(first["lambda"])))
    doc = json.loads((tmp_path / "table.json").read_text())
    assert len(doc["entries"]) == len(rows) == 24
    assert doc["truncated"] is True
    assert "truncated" in capsys.readouterr().err


def test_annulus_eigs_verify(tmp_path, capsys):
    out = tmp_path / "ann"
    code = main(["annulus-eigs", "--sigma", "0.5", "--lmax", "2", "--per-l", "2", "--verify", "--out", str(out)])
    assert code == 0
    rep = json.loads((tmp_path / "ann.verify.json").read_text())
    assert rep["status"] == "pass"
    assert len(rep["checks"]) == 8 * 4
    assert "verified 8 rows: pass" in capsys.readouterr().out


def test_sigma_out_of_range(capsys):
    assert main(["eigs", "--sigma", "1.2", "--lmax", "2"]) == 2
    assert "sigma out of range" in capsys.readouterr().err


def test_annulus_eigs_needs_shell(capsys):
    assert main(["annulus-eigs", "--sigma", "0", "--lmax", "2"]) == 2


def test_outputs_byte_identical(tmp_path, monkeypatch):
    docs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        monkeypatch.chdir(d)
        assert main(["eigs", "--sigma", "0.3", "--lmax", "3", "--per-l", "2", "--out", "t"]) == 0
        assert main(["verify", "--suite", "identities", "--trials", "2", "--seed", "4", "--out", "v.json"]) == 0
        docs.append([(d / n).read_bytes() for n in ("t.csv", "t.json", "v.json")])
    assert docs[0] == docs[1]


# --- config ---------------------------------------------------------------------

def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"sigma": 0.5, "lmax": 2, "per_l": 1}))
    assert load_config(str(cfg)).sigma == 0.5
    out = tmp_path / "t"
    assert main(["eigs", "--config", str(cfg), "--lmax", "3", "--out", str(out)]) == 0
    head, rows = _csv_rows(tmp_path / "t.csv")
    assert head["config"]["sigma"] == 0.5 and head["config"]["lmax"] == 3
    assert len(rows) == 3 * 2


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"sigma": 0.5, "colour": "red"}))
    with pytest.raises(ConfigurationError, match="colour"):
        load_config(str(cfg))
    assert main(["eigs", "--config", str(cfg)]) == 2


def test_config_parse_error_location(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text('{\n  "sigma": 0.5,\n  "lmax": 2,,\n}\n')
    with pytest.raises(ParseError) as info:
        load_config(str(cfg))
    assert info.value.line == 3
    assert info.value.offset == cfg.read_text().index(",,") + 1
    assert main(["eigs", "--config", str(cfg)]) == 4


def test_config_validation():
    with pytest.raises(ConfigurationError):
        JobConfig(nr=0).validate()
    with pytest.raises(ConfigurationError):
        JobConfig(tol=-1).validate()


def test_thread_env(monkeypatch):
    monkeypatch.delenv("STOKESPEC_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("STOKESPEC_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("STOKESPEC_THREADS", "many")
    with pytest.raises(ConfigurationError):
        worker_count()
    assert main(["eigs", "--lmax", "2", "--per-l", "1"]) == 2


# --- mode and decompose -----------------------------------------------------------

def test_mode_then_decompose(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert main(["mode", "toroidal", "1", "0", "1", "--nr", "32", "--out", str(path)]) == 0
    u, meta = fileio.read_field(str(path))
    assert np.all(u.r == 0)
    assert meta["header"]["mode"]["lambda"] == pytest.approx(20.190728556426629, rel=1e-12)
    assert main(["decompose", str(path), "--out", str(tmp_path / "parts")]) == 0
    rep = json.loads((tmp_path / "parts.report.json").read_text())
    assert rep["residual"] < 1e-8
    assert rep["energy_fraction"]["poloidal"] < 1e-12
    for suffix in ("psi", "chi", "toroidal", "poloidal"):
        assert (tmp_path / f"parts.{suffix}.json").exists()
    psi, doc = fileio.read_coefficients(str(tmp_path / "parts.psi.json"))
    assert psi.shape == (32, (doc["lmax"] + 1) ** 2)


def test_annulus_poloidal_mode_decompose(tmp_path):
    path = tmp_path / "p.json"
    assert main(["mode", "poloidal", "2", "-1", "1", "--sigma", "0.5", "--nr", "32", "--out", str(path)]) == 0
    assert main(["decompose", str(path), "--out", str(tmp_path / "q")]) == 0
    rep = json.loads((tmp_path / "q.report.json").read_text())
    assert rep["residual"] < 1e-8
    assert rep["energy_fraction"]["toroidal"] < 1e-12


def test_mode_default_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["mode", "poloidal", "1", "1", "2", "--nr", "16", "--ntheta", "4", "--nphi", "8"]) == 0
    assert (tmp_path / "mode_poloidal_l1_k1_j2.json").exists()


def test_mode_l0_rejected(capsys):
    assert main(["mode", "toroidal", "0", "0", "1"]) == 2
    assert "mean-value gauge" in capsys.readouterr().err


def test_decompose_constant_field(tmp_path):
    g = build_shell_grid(0.25, 16, 8, 16)
    u = VectorShellField.from_cartesian(g, lambda x, y, z: (0 * x, 0 * x, 1 + 0 * x))
    path = tmp_path / "const.json"
    fileio.write_field(str(path), u, 6, fileio.header("test"))
    assert main(["decompose", str(path)]) == 0
    rep = json.loads((tmp_path / "const.report.json").read_text())
    assert rep["energy_fraction"]["toroidal"] < 1e-12
    assert rep["residual"] < 1e-9


def test_decompose_rejects_divergent_field(tmp_path, capsys):
    g = build_shell_grid(0.0, 16, 8, 16)
    u = VectorShellField.from_cartesian(g, lambda x, y, z: (x, y, z))
    path = tmp_path / "src.json"
    fileio.write_field(str(path), u, 6, fileio.header("test"))
    assert main(["decompose", str(path)]) == 4
    assert "divergence" in capsys.readouterr().err


def test_decompose_rejects_flux(tmp_path, capsys):
    g = build_shell_grid(0.5, 16, 8, 16)
    r = g.radial.nodes[:, None, None]
    vals = np.zeros((3,) + g.shape)
    vals[0] = 1 / (r * r)
    path = tmp_path / "flux.json"
    fileio.write_field(str(path), VectorShellField(g, vals), 6, fileio.header("test"))
    assert main(["decompose", str(path)]) == 4
    assert "gauge" in capsys.readouterr().err


def test_corrupted_field_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert main(["mode", "toroidal", "1", "0", "1", "--nr", "8", "--ntheta", "4", "--nphi", "8",
                 "--out", str(path)]) == 0
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ParseError) as info:
        fileio.read_field(str(path))
    assert info.value.line is not None and info.value.offset is not None
    assert main(["decompose", str(path)]) == 4
    assert "line" in capsys.readouterr().err


def test_field_payload_validation(tmp_path):
    path = tmp_path / "m.json"
    main(["mode", "toroidal", "1", "0", "1", "--nr", "8", "--ntheta", "4", "--nphi", "8", "--out", str(path)])
    doc = json.loads(path.read_text())
    doc["grid"]["nr"] = 9
    path.write_text(json.dumps(doc))
    with pytest.raises(ParseError, match="bytes"):
        fileio.read_field(str(path))
    doc["grid"]["nr"] = 8
    doc["data"] = "@@@"
    path.write_text(json.dumps(doc))
    with pytest.raises(ParseError, match="base64"):
        fileio.read_field(str(path))
    doc["format"] = "other"
    path.write_text(json.dumps(doc))
    with pytest.raises(ParseError):
        fileio.read_field(str(path))


def test_field_file_round_trip(tmp_path):
    g = build_shell_grid(0.3, 6, 4, 8)
    vals = np.random.default_rng(0).standard_normal((3,) + g.shape)
    path = tmp_path / "f.json"
    fileio.write_field(str(path), VectorShellField(g, vals), 2, fileio.header("test"))
    u, meta = fileio.read_field(str(path))
    assert np.array_equal(u.values, vals)
    assert meta["shape"] == [6, 4, 8, 3] and meta["frame"] == "spherical"


# --- verify -------------------------------------------------------------------------

def test_verify_identities(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "identities", "--seed", "7", "--trials", "5", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["status"] == "pass" and len(rep["checks"]) == 14
    assert rep["header"]["config"]["seed"] == 7
    assert "overall: pass" in capsys.readouterr().out


def test_verify_orthogonality(tmp_path):
    out = tmp_path / "o.json"
    assert main(["verify", "--suite", "orthogonality", "--count", "20", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert len(rep["details"]["orthogonality"]["gram"]) == 20


def test_verify_unknown_suite(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "bogus"])
    assert info.value.code == 2
    err = capsys.readouterr().err
    assert "identities" in err and "completeness" in err


@pytest.mark.slow
def test_verify_all(tmp_path):
    out = tmp_path / "all.json"
    assert main(["verify", "--suite", "all", "--lmax", "2", "--per-l", "2", "--trials", "3",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    suites = {name.split(".")[0] for name in rep["checks"]}
    assert suites == {"identities", "orthogonality", "completeness", "residuals"}
