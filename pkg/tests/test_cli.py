import json
import subprocess
import sys

import pytest

from garidec.cli import main
from garidec.gf2model import Syndrome
from garidec.msdecoder import write_syndromes


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_transform(capsys, surface_path):
    code, out, _ = run(capsys, "transform", "--dem", surface_path)
    assert code == 0
    doc = json.loads(out)
    assert {"dx", "dz", "u", "v", "llr0"} <= set(doc)
    code, out, _ = run(capsys, "transform", "--dem", surface_path, "--format", "csv")
    assert out.splitlines()[0] == "group,size"
    assert "e_y,2" in out.splitlines()


def test_map(capsys, surface_path, tmp_path):
    out_file = tmp_path / "tm.json"
    code, _, _ = run(capsys, "map", "--dem", surface_path, "--out", out_file)
    assert code == 0
    tm = json.loads(out_file.read_text())
    assert tm["n_uv_tiles"] == 18
    code, _, err = run(capsys, "map", "--dem", surface_path, "--tile-degrees", "2")
    assert code == 2 and "infeasible" in err


def test_order(capsys, surface_path):
    code, _, err = run(capsys, "order", "--dem", surface_path, "--depth", "8")
    assert code == 2 and "infeasible" in err
    code, out, _ = run(capsys, "order", "--dem", surface_path, "--depth", "8", "--allow-stalls", "--which", "DX")
    assert code == 0
    doc = json.loads(out)
    assert doc["which"] == "DX" and sorted(doc["order"]) == [0, 1, 2, 3] and not doc["accepted"]
    code, out, _ = run(capsys, "order", "--dem", surface_path, "--depth", "1")
    assert code == 0 and [d["which"] for d in json.loads(out)] == ["DX", "DZ"]


def test_decode_zero_syndrome(capsys, surface_path):
    code, out, _ = run(capsys, "decode", "--dem", surface_path)
    assert code == 0
    doc = json.loads(out)
    assert doc["converged"] and doc["iterations"] == 1
    assert doc["correction"] == [0] * 16
    assert "trace" not in doc


def test_decode_syndrome_files(capsys, surface_path, tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"s_x": [1, 1, 0, 0], "s_z": [0, 0, 0, 0]}))
    code, out, _ = run(capsys, "decode", "--dem", surface_path, "--syndrome", tmp_path / "s.json",
                       "--basis", "XZ", "--trace")
    assert code == 0
    doc = json.loads(out)
    assert doc["converged"] and doc["trace"][0]["step"] == "1"
    write_syndromes(tmp_path / "s.bin", [Syndrome([1, 1, 0, 0], [0] * 4), Syndrome([0] * 4, [0] * 4)])
    code, out, _ = run(capsys, "decode", "--dem", surface_path, "--syndrome", tmp_path / "s.bin",
                       "--basis", "XZ", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "shot,converged,iterations,correction" and len(lines) == 3
    assert lines[2] == "1,True,1," + "0" * 16


def test_simulate_gross(capsys, gross_path):
    code, out, _ = run(capsys, "simulate", "--dem", gross_path, "--clock-ns", "3.647", "--iters", "1,2.28")
    assert code == 0
    doc = json.loads(out)
    assert doc["total_cycles"]["1"] == 1738
    assert doc["latency_ns"]["1"] == pytest.approx(6338.486)
    assert doc["overlap_ok"] is True
    code, out, _ = run(capsys, "simulate", "--dem", gross_path, "--table", "--iters", "2")
    assert code == 0 and "overlap ok" in out and out.count("\n") >= 6


def test_simulate_with_tilemap_and_csv(capsys, surface_path, tmp_path):
    tm = tmp_path / "tm.json"
    assert run(capsys, "map", "--dem", surface_path, "--out", tm)[0] == 0
    code, out, _ = run(capsys, "simulate", "--dem", surface_path, "--tilemap", tm, "--format", "csv", "--order")
    assert code == 0
    assert out.splitlines()[0] == "step,serial,cycles,uv,chain,start,end"


def test_bench_byte_identical(capsys, surface_path, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["bench", "--dem", surface_path, "--shots", "1000", "--seed", "7", "--basis", "XZ", "--max-iters", "16"]
    assert run(capsys, *args, "--out", a)[0] == 0
    assert run(capsys, *args, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["shots"] == 1000 and doc["config"]["seed"] == 7
    code, out, _ = run(capsys, "bench", "--dem", surface_path, "--shots", "20", "--format", "csv")
    assert code == 0 and out.startswith("iterations,count\n")


def test_route_test(capsys):
    code, out, _ = run(capsys, "route-test", "--ports", "8", "--messages", "50", "--seeds", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["stages"] == 3 and doc["all_delivered"] and len(doc["runs"]) == 3
    code, out, _ = run(capsys, "route-test", "--j-in", "5", "--j-out", "3", "--messages", "10", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "seed,cycles,collisions,overhead,delivered_ok"
    code, _, err = run(capsys, "route-test", "--ports", "8", "--messages", "50", "--fifo-depth", "1")
    assert code == 1 and "FIFO" in err


def test_usage_errors(capsys, surface_path, tmp_path):
    assert run(capsys, "decode", "--dem", surface_path, "--bogus")[0] == 1
    assert run(capsys, "decode")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "decode", "--dem", tmp_path / "missing.json")[0] == 1
    (tmp_path / "bad.json").write_text("{}")
    assert run(capsys, "transform", "--dem", tmp_path / "bad.json")[0] == 1
    assert run(capsys, "bench", "--dem", surface_path, "--shots", "0")[0] == 1


def test_module_entry_point(surface_path):
    p = subprocess.run([sys.executable, "-m", "garidec", "decode", "--dem", str(surface_path)],
                       capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["converged"]
