import numpy as np
import pytest

from chgeom import cli
from chgeom.errors import ConfigError

SUBCOMMANDS = ["spaces-selftest", "transport-holonomy", "curve-tau", "chord-fit", "two-point",
               "majorize", "schur-suite", "chern-lashof", "parallel-flow", "kleiner-chain",
               "gauss-map", "develop", "hull-aperture"]

PUBLIC_OPS = [
    "spaces.sectional_curvature", "spaces.exp_map",
    "transport.parallel_transport", "transport.holonomy_defect", "transport.propagate_frame",
    "curves.total_curvature", "curves.geodesic_curvature", "curves.two_point_defect",
    "curves.chord_curvature_fit", "curves.uniform_chord_bound_check",
    "majorize.majorize", "majorize.schur_verify", "majorize.curvature_nonincrease_check",
    "surfaces.shape_operator", "surfaces.curvature_report", "surfaces.parallel_surface",
    "surfaces.gauss_map_area", "surfaces.flatness_scan",
    "hull.convex_hull", "hull.certify_convex", "hull.hull_boundary_curvature",
    "hull.kleiner_chain", "hull.tangent_cone_aperture",
    "develop.surface_frame", "develop.develop_map", "develop.verify_isometry",
    "develop.verify_tau_preservation", "develop.verify_normal_correspondence",
]


def _write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return str(p)


def test_registry_and_manifest():
    assert sorted(cli.REGISTRY) == sorted(SUBCOMMANDS)
    covered = {op for e in cli.REGISTRY.values() for op in e.ops}
    assert set(PUBLIC_OPS) <= covered
    assert all(e.anchors for e in cli.REGISTRY.values())
    text = cli.manifest_text()
    assert all(name in text for name in SUBCOMMANDS)


def test_list_flag(capsys):
    assert cli.main(["--list"]) == 0
    assert "schur-suite" in capsys.readouterr().out


# -- configuration ----------------------------------------------------------------------

def test_config_file_and_overrides(tmp_path):
    path = _write(tmp_path, "[run]\nseed = 7\njobs = 2\n[params]\nn_instances = 30\nm = 129\n")
    cfg = cli.load_config("schur-suite", path, ["m=65"], out=str(tmp_path))
    assert (cfg.seed, cfg.jobs) == (7, 2)
    assert cfg.params == {"n_instances": 30, "m": 65}
    assert cli.load_config("schur-suite", path, seed=9).seed == 9


@pytest.mark.parametrize("text", [
    "[params]\nbogus = 1\n",
    "[run]\ncolour = red\n",
    "[extra]\nx = 1\n",
    "[params]\nn_instances = many\n",
    "[params]\nn_instances = 0\n",
    "[run]\nexperiment = majorize\n",
])
def test_bad_config_rejected(tmp_path, text):
    with pytest.raises(ConfigError):
        cli.load_config("schur-suite", _write(tmp_path, text))


def test_bad_config_exit_code(tmp_path, capsys):
    assert cli.main(["chord-fit", "--config", _write(tmp_path, "[params]\nx = 1\n")]) == 2
    assert "unknown parameter" in capsys.readouterr().err


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("CHGEOM_OUT", str(tmp_path / "env"))
    assert cli.load_config("chord-fit").out == str(tmp_path / "env")
    assert cli.load_config("chord-fit", out="explicit").out == "explicit"


# -- streams and output ----------------------------------------------------------------

def test_instance_streams_are_independent_and_stable():
    cfg = cli.ExperimentConfig("x", seed=5)
    a, b = cfg.stream(0).random(4), cfg.stream(1).random(4)
    assert not np.allclose(a, b)
    assert np.array_equal(a, cli.ExperimentConfig("y", seed=5).stream(0).random(4))


def test_csv_format():
    text = cli.csv_text([{"index": 0, "x": 0.1, "ok": True}, {"index": 1, "y": "a,b"}])
    assert text == 'index,x,ok,y\n0,0.1,true,\n1,,,"a,b"\n'


def test_run_writes_artifacts(tmp_path):
    assert cli.main(["two-point", "--out", str(tmp_path)]) == 0
    d = tmp_path / "two-point"
    assert (d / "results.csv").read_text().startswith("index,")
    assert (d / "defects.csv").read_text() == "index,error\n"
    rows = (d / "plotdata" / "two_point_residual.dat").read_text().splitlines()
    assert len(rows) == 10 and all(len(r.split()) == 2 for r in rows)


def test_chord_fit_reports_coth(tmp_path):
    cli.main(["chord-fit", "--out", str(tmp_path)])
    lines = (tmp_path / "chord-fit" / "results.csv").read_text().splitlines()
    row = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert float(row["kappa_hat"]) == pytest.approx(1.3130, abs=5e-4)


def test_results_independent_of_worker_count(tmp_path):
    outs = []
    for jobs in (1, 2):
        d = tmp_path / f"j{jobs}"
        cli.main(["schur-suite", "--set", "n_instances=6", "--set", "m=65",
                  "--jobs", str(jobs), "--out", str(d)])
        outs.append((d / "schur-suite" / "results.csv").read_bytes())
    assert outs[0] == outs[1]


def test_failures_are_recorded(tmp_path, monkeypatch):
    from chgeom.errors import DegenerateInput

    def broken(cfg):
        raise DegenerateInput("nope")

    monkeypatch.setitem(cli.REGISTRY, "two-point",
                        cli.Experiment("two-point", broken, {"eps": 0.1, "n_rho": 10}, ("x",), ()))
    assert cli.main(["two-point", "--out", str(tmp_path)]) == 1
    assert "DegenerateInput" in (tmp_path / "two-point" / "defects.csv").read_text()
