import json

import pytest

from gridprod import __version__, cli


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    return tmp_path / "cache"


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def field_file(tmp_path):
    path = tmp_path / "cache.json"
    assert cli.main(["field", "--poly", "-1,-3,0,1", "--unit-height", "10", "--output", str(path)]) == 0
    return path


def test_field_command(field_file, cache_dir):
    data = json.loads(field_file.read_text())
    assert data["rank"] == 2
    assert len(data["independent"]) >= 2
    assert data["norm_theta"] == "1"
    assert data["version"] == __version__
    assert len(data["config_hash"]) == 64
    assert all(float(r["radius"]) < 1e-30 for r in data["roots"])
    assert len(list(cache_dir.iterdir())) == 1


def test_field_cache_reuse_is_byte_identical(field_file, tmp_path):
    again = tmp_path / "again.json"
    assert cli.main(["field", "--poly", "-1,-3,0,1", "--unit-height", "10", "--output", str(again)]) == 0
    assert again.read_bytes() == field_file.read_bytes()


def test_mu_sample(capsys):
    code, out, _ = run(["mu", "--lattice", "Z3", "--mode", "sample", "--k", "8", "--R", "5"], capsys)
    assert code == 0
    assert json.loads(out)["value"] == "1/8"


def test_scan_ledger_deterministic_across_workers(field_file, tmp_path):
    outs = []
    for w in (1, 8):
        path = tmp_path / f"scan{w}.csv"
        args = ["scan", "--kind", "pair", "--field", str(field_file), "--alphas", "theta,theta2",
                "--gammas", "1/3,1/7", "--N", "100000", "--workers", str(w), "--output", str(path)]
        assert cli.main(args) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().splitlines()
    assert "config_hash=" in lines[0] and f"version={__version__}" in lines[0]
    assert lines[1] == "N,running_min,witness_n,certified"
    mins = [float(l.split(",")[1]) for l in lines[2:] if not l.startswith("#")]
    assert all(b <= a for a, b in zip(mins, mins[1:]))


def test_config_file_overridden_by_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# mu run\nlattice = Z2\nk = 2\nR = 1\n")
    code, out, _ = run(["mu", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["value"] == "1/4"
    code, out, _ = run(["mu", "--config", str(cfg), "--lattice", "Z3"], capsys)
    assert code == 0 and json.loads(out)["value"] == "1/8"


def test_config_hash_ignores_workers_and_output():
    base = cli.resolve("mu", {}, None)
    other = cli.resolve("mu", {"workers": 4, "output": "x.json"}, None)
    assert cli.config_hash(base) == cli.config_hash(other)
    assert cli.config_hash(base) != cli.config_hash(cli.resolve("mu", {"k": 4}, None))


def test_floor_command(capsys):
    code, out, _ = run(["floor", "--N", "10000"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["scan"]["consistent"] is True
    assert data["certificate"]["floor_float"] > 0


def test_factor_and_check(capsys):
    code, out, _ = run(["factor", "--matrix", "2,0,0;1,1,1;3,1,3/2"], capsys)
    assert code == 0 and json.loads(out)["t0"] == "2/3"
    code, out, _ = run(["check"], capsys)
    assert code == 0 and json.loads(out)["passed"] is True


def test_orbit_command(capsys):
    code, out, _ = run(["orbit", "--poly", "-1,-1,1", "--basis", "1,theta"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["checks"][0]["exact"] == [["1", "1"], ["1", "2"]]


def test_products_csv(capsys):
    code, out, _ = run(["products", "--lattice", "Z2", "--shift", "1/2,1/2", "--R", "1"], capsys)
    assert code == 0
    assert out.splitlines()[1] == "w1,w2,value"
    assert len(out.splitlines()) == 6


@pytest.mark.parametrize(
    "args, code",
    [
        (["scan", "--alphas", "theta", "--gammas", "1/3"], 2),
        (["mu", "--lattice", "Q7"], 2),
        (["field", "--poly", "1,0,1"], 2),
        (["scan", "--alphas", "1/3", "--gammas", "0.5"], 2),
        (["mu", "--mode", "certified_rational"], 4),
        (["factor", "--matrix", "1,1,0;0,1,0;0,0,1"], 2),
    ],
)
def test_exit_codes(args, code, capsys):
    assert run(args, capsys)[0] == code


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    assert run(["mu", "--config", str(cfg)], capsys)[0] == 2


def test_precision_exit_code(monkeypatch, capsys):
    from gridprod.errors import PrecisionError

    def boom(cfg):
        raise PrecisionError("too wide")

    monkeypatch.setitem(cli.COMMANDS, "check", boom)
    code, _, err = run(["check"], capsys)
    assert code == 3 and "precision" in err


def test_mp_real_enclosure():
    from fractions import Fraction

    iv = cli.MpReal("sqrt(2)").enclosure(Fraction(1, 10 ** 30))
    assert iv.lo ** 2 < 2 < iv.hi ** 2
    assert iv.width < Fraction(1, 10 ** 30)
