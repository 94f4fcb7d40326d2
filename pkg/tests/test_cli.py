import json

import pytest

from splcmarket.cli import main
from splcmarket.equilibrium import parse_equilibrium
from splcmarket.model import parse_market

from conftest import ISOLATED_TEXT, M1_TEXT, RAY_TOY_TEXT


@pytest.fixture
def m1_file(tmp_path):
    path = tmp_path / "m1.json"
    path.write_text(M1_TEXT)
    return str(path)


def test_check_pass(m1_file, capsys):
    assert main(["check", m1_file]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["all_pass"]
    assert {c["condition"] for c in doc["checks"]} == {
        "no-production-out-of-nothing",
        "strong-connectivity",
        "enough-demand",
    }


def test_check_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "isolated.json"
    path.write_text(ISOLATED_TEXT)
    assert main(["check", str(path)]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert not doc["all_pass"]


def test_solve_writes_equilibrium(m1_file, tmp_path, capsys):
    out = tmp_path / "eq.json"
    assert main(["solve", m1_file, "--out", str(out)]) == 0
    e = parse_equilibrium(out.read_text())
    assert str(e.prices["g1"]) == "27/4"
    stats = json.loads(capsys.readouterr().out)
    assert stats["iterations"] > 0


def test_solve_stdout_and_trace(m1_file, capsys):
    assert main(["solve", m1_file, "--trace"]) == 0
    captured = capsys.readouterr()
    e = parse_equilibrium(captured.out)
    assert str(e.prices["g2"]) == "27/8"
    assert "enter" in captured.err and "leave" in captured.err


def test_solve_precheck_failure_exit_2(tmp_path):
    path = tmp_path / "isolated.json"
    path.write_text(ISOLATED_TEXT)
    assert main(["solve", str(path)]) == 2


def test_solve_demand_failure_vs_waiver(tmp_path, capsys):
    path = tmp_path / "toy.json"
    path.write_text(RAY_TOY_TEXT)
    assert main(["solve", str(path)]) == 2
    capsys.readouterr()
    assert main(["solve", str(path), "--waive-demand"]) == 0
    e = parse_equilibrium(capsys.readouterr().out)
    assert str(e.prices["g3"]) == "0"


def test_solve_iteration_limit_exit_4(m1_file):
    assert main(["solve", m1_file, "--max-iters", "1"]) == 4


def test_solve_dump_lcp(m1_file, tmp_path, capsys):
    dump = tmp_path / "lcp.txt"
    assert main(["solve", m1_file, "--dump-lcp", str(dump)]) == 0
    assert dump.read_text().startswith("nhad-lcp n=12")


def test_verify_round_trip(m1_file, tmp_path, capsys):
    out = tmp_path / "eq.json"
    main(["solve", m1_file, "--out", str(out)])
    capsys.readouterr()
    assert main(["verify", m1_file, str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["pass"]


def test_verify_rejects_tampered_document(m1_file, tmp_path, capsys):
    out = tmp_path / "eq.json"
    main(["solve", m1_file, "--out", str(out)])
    capsys.readouterr()
    out.write_text(out.read_text().replace("27/16", "29/16"))
    assert main(["verify", m1_file, str(out)]) == 1


def test_gen_check_solve_pipeline(tmp_path, capsys):
    market_file = tmp_path / "gen.json"
    assert (
        main(
            ["gen", "--agents", "2", "--goods", "2", "--firms", "2", "--segs", "2",
             "--seed", "5", "--out", str(market_file)]
        )
        == 0
    )
    assert main(["check", str(market_file)]) == 0
    capsys.readouterr()
    assert main(["solve", str(market_file)]) == 0


def test_reduce_emits_market_and_map(tmp_path, capsys):
    exchange = tmp_path / "exchange.json"
    main(["gen", "--agents", "2", "--goods", "2", "--firms", "0", "--segs", "2",
          "--seed", "8", "--out", str(exchange)])
    reduced = tmp_path / "reduced.json"
    assert main(["reduce", str(exchange), "--out", str(reduced)]) == 0
    market = parse_market(reduced.read_text())
    assert len(market.goods) == 4
    sidecar = json.loads((tmp_path / "reduced.json.map.json").read_text())
    assert set(sidecar) == {"original_goods", "utility_good", "utility_firm"}


def test_bench_with_csv(tmp_path, capsys):
    csv_file = tmp_path / "bench.csv"
    assert (
        main(
            ["bench", "--agents", "2", "--goods", "2", "--firms", "2", "--segs", "2",
             "--count", "3", "--seed", "4", "--csv", str(csv_file), "--workers", "1"]
        )
        == 0
    )
    stats = json.loads(capsys.readouterr().out)
    assert stats["instances"] == 3
    assert stats["failures"] == 0
    assert csv_file.read_text().startswith("instance,totalSegments,iterations,outcome")


def test_enumerate_cli(tmp_path, capsys):
    market_file = tmp_path / "m.json"
    main(["gen", "--agents", "2", "--goods", "2", "--firms", "1", "--segs", "1",
          "--seed", "12", "--out", str(market_file)])
    capsys.readouterr()
    assert main(["enumerate", str(market_file)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["count"] == len(doc["equilibria"])
    assert doc["count"] >= 1
