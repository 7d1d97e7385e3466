import csv
import json
import re

import pytest

from cubiclam.angles import Angle, Arc
from cubiclam.cli import main, parse_lambda
from cubiclam.cubic import root_of_unity

from _oracles import brute_force_gap


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def frac(pair):
    return Angle(*pair)


class TestGap:
    def test_pqpg_period_one(self, tmp_path, capsys):
        out = tmp_path / "q.svg"
        code, _, _ = run(capsys, "gap", "--pqpg", "--max-period", "1", "--out", str(out))
        assert code == 0
        svg = out.read_text()
        holes = re.findall(r'class="hole"[^>]*data-a="([^"]+)" data-b="([^"]+)"', svg)
        assert sorted(holes) == [("1/6", "1/3"), ("2/3", "5/6")]
        data = json.loads(out.with_suffix(".json").read_text())
        assert data["count"] == 2

    def test_hole(self, tmp_path, capsys):
        out = tmp_path / "g.svg"
        code, _, _ = run(capsys, "gap", "--hole", "1/6,1/3", "--depth", "5", "--out", str(out))
        assert code == 0
        data = json.loads(out.with_suffix(".json").read_text())
        verts = {frac(v) for v in data["vertices"]}
        hole = Arc(*(frac(p) for p in data["spec"]["major_hole"]))
        assert verts == brute_force_gap(hole, 5)

    def test_tag(self, tmp_path, capsys):
        out = tmp_path / "t.svg"
        assert run(capsys, "gap", "--tag", "0", "--depth", "3", "--out", str(out))[0] == 0
        assert re.search(r'class="major"[^>]*data-a="1/3" data-b="2/3"', out.read_text())

    def test_rejections(self, tmp_path, capsys):
        out = str(tmp_path / "x.svg")
        code, _, err = run(capsys, "gap", "--hole", "1/6,1/2", "--out", out)
        assert code == 1 and "periodic" in err
        code, _, err = run(capsys, "gap", "--hole", "11/12,17/24", "--out", out)
        assert code == 1 and "1/3" in err
        assert run(capsys, "gap", "--out", out)[0] == 1


class TestSlice:
    def test_determinism(self, tmp_path, capsys):
        a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
        args = ["slice", "--lambda", "1/3turn", "--res", "60x40", "--max-iter", "60"]
        assert run(capsys, *args, "--out", str(a))[0] == 0
        assert run(capsys, *args, "--workers", "3", "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes().startswith(b"P6\n60 40\n255\n")

    def test_lambda_zero_center(self, tmp_path, capsys):
        out = tmp_path / "z.ppm"
        code, _, _ = run(capsys, "slice", "--lambda", "0", "--res", "64x64", "--window", "-2,-2,2,2",
                         "--out", str(out))
        assert code == 0
        data = out.read_bytes()
        body = data[len(b"P6\n64 64\n255\n"):]
        px = 3 * (32 * 64 + 32)
        assert body[px:px + 3] == b"\x00\x00\x00"

    def test_ray_overlay(self, tmp_path, capsys):
        plain, rays = tmp_path / "p.ppm", tmp_path / "r.ppm"
        args = ["slice", "--res", "80x80", "--max-iter", "40", "--window", "-1,1,3,5"]
        assert run(capsys, *args, "--out", str(plain))[0] == 0
        assert run(capsys, *args, "--rays", "1", "--out", str(rays))[0] == 0
        assert plain.read_bytes() != rays.read_bytes()

    def test_bad_window(self, tmp_path, capsys):
        assert run(capsys, "slice", "--window", "1,1,0,0", "--out", str(tmp_path / "w.ppm"))[0] == 1

    def test_unwritable(self, tmp_path, capsys):
        code, _, err = run(capsys, "slice", "--res", "4x4", "--out", str(tmp_path / "no" / "x.ppm"))
        assert code == 1 and "no" in err

    def test_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# small\nres = 8x6\nmax_iter = 20\nlambda = 0\n")
        out = tmp_path / "c.ppm"
        assert run(capsys, "--config", str(cfg), "slice", "--out", str(out))[0] == 0
        assert out.read_bytes().startswith(b"P6\n8 6\n255\n")
        cfg.write_text("max_iter = -3\n")
        assert run(capsys, "--config", str(cfg), "slice", "--out", str(out))[0] == 1


class TestRay:
    def test_radial(self, capsys):
        code, out, _ = run(capsys, "ray", "--angle", "1/4", "--t-lo", "1e-3")
        assert code == 0
        rows = list(csv.reader(out.splitlines()))
        assert rows[0] == ["t", "re", "im"]
        for t, re_, im in rows[1:]:
            assert abs(float(re_)) < 1e-8

    def test_parameter_pair(self, tmp_path, capsys):
        ends = []
        for theta in ("1/6", "1/3"):
            out = tmp_path / f"{theta.replace('/', '_')}.csv"
            code, _, _ = run(capsys, "ray", "--kind", "parameter", "--lambda", "1/3turn",
                             "--angle", theta, "--t-lo", "1e-2", "--out", str(out))
            assert code == 0
            last = list(csv.reader(out.read_text().splitlines()))[-1]
            ends.append(complex(float(last[1]), float(last[2])))
        assert abs(ends[0] - ends[1]) < 1

    def test_malformed_angle(self, capsys):
        code, _, err = run(capsys, "ray", "--angle", "abc")
        assert code == 1 and err
        assert run(capsys, "ray", "--angle", "0.25")[0] == 1

    def test_numeric_failure_is_flagged(self, capsys):
        code, out, err = run(capsys, "ray", "--lambda", "0", "--b", "3", "--angle", "1/3")
        assert code == 2
        assert out.splitlines()[-1].startswith("# partial:")
        assert len(out.splitlines()) > 3

    def test_negative_b(self, capsys):
        assert run(capsys, "ray", "--b", "-0.5", "--angle", "0", "--t-lo", "0.5")[0] == 0


class TestThreads:
    def test_period_two(self, capsys):
        code, out, _ = run(capsys, "threads", "--period", "2")
        assert code == 0
        data = json.loads(out)
        assert data["count"] == 2
        assert sorted(p["minimal_period"] for p in data["patterns"]) == [1, 2]

    def test_period_one(self, capsys):
        data = json.loads(run(capsys, "threads", "--period", "1")[1])
        assert [p["pattern"] for p in data["patterns"]] == [[1]]

    def test_bad_period(self, capsys):
        assert run(capsys, "threads", "--period", "0")[0] == 1


class TestSn:
    def test_linear(self, capsys):
        code, out, _ = run(capsys, "sn", "--q", "0.4", "--b", "2", "--gaps", "linear", "--n", "10000")
        assert code == 0
        rows = list(csv.reader(out.splitlines()))
        assert rows[0] == ["n", "s_n", "is_bad_index"]
        assert len(rows) == 10_002
        assert float(rows[-1][1]) < 1e-3

    def test_bad_q(self, capsys):
        assert run(capsys, "sn", "--q", "1.5")[0] == 1


class TestParsing:
    def test_lambda(self):
        assert parse_lambda("1/3turn") == root_of_unity(1, 3)
        assert parse_lambda("1/4") == 1j
        assert parse_lambda("0.5-0.25i") == 0.5 - 0.25j
        with pytest.raises(ValueError):
            parse_lambda("1/0turn")

    def test_no_command(self, capsys):
        assert run(capsys)[0] == 1
