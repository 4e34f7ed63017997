import json

import numpy as np
import pytest

from crowdmaps.cli import main
from crowdmaps.io import read_map, write_map


@pytest.fixture
def annotation_file(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps({
        "width": 128,
        "height": 96,
        "points": [[20, 30], [60, 40], [100, 70], [40, 80], [90, 20]],
    }))
    return path


def run(*argv):
    return main([str(a) for a in argv])


class TestDensmap:
    def test_geo_map_mass_equals_count(self, tmp_path, annotation_file):
        out = tmp_path / "geo.dmap"
        assert run("densmap", "--annotations", annotation_file,
                   "--method", "geo", "--out", out) == 0
        m = read_map(out)
        assert m.shape == (96, 128)
        assert float(m.sum()) == pytest.approx(5.0, abs=1e-3)  # float32 storage

    def test_blend_lambda_zero_bit_equals_geo(self, tmp_path, annotation_file):
        geo_out = tmp_path / "geo.dmap"
        blend_out = tmp_path / "blend.dmap"
        run("densmap", "--annotations", annotation_file, "--method", "geo",
            "--out", geo_out)
        run("densmap", "--annotations", annotation_file, "--method", "blend",
            "--lambda", "0", "--out", blend_out)
        assert geo_out.read_bytes() == blend_out.read_bytes()

    def test_blend_lambda_one_bit_equals_voronoi(self, tmp_path, annotation_file):
        vor_out = tmp_path / "vor.dmap"
        blend_out = tmp_path / "blend.dmap"
        run("densmap", "--annotations", annotation_file, "--method", "voronoi",
            "--out", vor_out)
        run("densmap", "--annotations", annotation_file, "--method", "blend",
            "--lambda", "1", "--out", blend_out)
        assert vor_out.read_bytes() == blend_out.read_bytes()

    def test_reproducible_bytes(self, tmp_path, annotation_file):
        a, b = tmp_path / "a.dmap", tmp_path / "b.dmap"
        for out in (a, b):
            run("densmap", "--annotations", annotation_file, "--out", out,
                "--png", str(out) + ".png")
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.dmap.png").read_bytes() == (tmp_path / "b.dmap.png").read_bytes()

    def test_empty_annotation_gives_zero_map(self, tmp_path):
        ann = tmp_path / "empty.json"
        ann.write_text('{"width":32,"height":16,"points":[]}')
        out = tmp_path / "zero.dmap"
        assert run("densmap", "--annotations", ann, "--out", out) == 0
        assert not read_map(out).any()

    def test_csv_ingestion(self, tmp_path):
        ann = tmp_path / "pts.csv"
        ann.write_text("10,10\n50,40\n")
        out = tmp_path / "csv.dmap"
        assert run("densmap", "--annotations", ann, "--width", "64",
                   "--height", "64", "--out", out) == 0
        assert read_map(out).sum() == pytest.approx(2.0, abs=1e-4)

    def test_merge_duplicates_flag(self, tmp_path):
        ann = tmp_path / "dup.csv"
        ann.write_text("10,10\n10,10\n30,30\n")
        out = tmp_path / "m.dmap"
        assert run("densmap", "--annotations", ann, "--width", "64",
                   "--height", "64", "--out", out) == 1  # rejected without the flag
        assert run("densmap", "--annotations", ann, "--width", "64",
                   "--height", "64", "--merge-duplicates", "--out", out) == 0
        assert read_map(out).sum() == pytest.approx(2.0, abs=1e-4)

    def test_out_of_bounds_point_is_validation_error(self, tmp_path, capsys):
        ann = tmp_path / "bad.json"
        ann.write_text('{"width":10,"height":10,"points":[[10,5]]}')
        code = run("densmap", "--annotations", ann, "--out", tmp_path / "x.dmap")
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_missing_annotation_file_is_io_error(self, tmp_path, capsys):
        code = run("densmap", "--annotations", tmp_path / "nope.json",
                   "--out", tmp_path / "x.dmap")
        assert code == 2
        assert capsys.readouterr().err.startswith("error:")


class TestAnchormapAndPostprocess:
    def test_pipeline_recovers_all_heads(self, tmp_path, annotation_file):
        anchor = tmp_path / "anchor.dmap"
        dets = tmp_path / "det.json"
        assert run("anchormap", "--annotations", annotation_file, "--out", anchor) == 0
        assert read_map(anchor).sum() == pytest.approx(5.0, abs=1e-4)
        assert run("postprocess", "--map", anchor, "--out", dets) == 0
        rows = json.loads(dets.read_text())
        assert len(rows) == 5
        for row in rows:
            x, y, w, h = row["box"]
            assert w > 0 and h > 0
            assert x <= row["x"] <= x + w

    def test_postprocess_flags(self, tmp_path, annotation_file):
        anchor = tmp_path / "anchor.dmap"
        run("anchormap", "--annotations", annotation_file, "--out", anchor)
        dets = tmp_path / "det.json"
        assert run("postprocess", "--map", anchor, "--threshold-frac", "0.9",
                   "--out", dets) == 0
        # a high threshold keeps only peaks close to the global max
        assert len(json.loads(dets.read_text())) <= 5


class TestEval:
    def make_pair(self, tmp_path, name, pred, gt):
        (tmp_path / "pred").mkdir(exist_ok=True)
        (tmp_path / "gt").mkdir(exist_ok=True)
        write_map(tmp_path / "pred" / name, pred)
        write_map(tmp_path / "gt" / name, gt)

    def test_report_fields(self, tmp_path):
        rng = np.random.default_rng(181)
        gt = rng.uniform(0.1, 1, size=(32, 32)).astype(np.float32)
        self.make_pair(tmp_path, "a.dmap", gt, gt)
        self.make_pair(tmp_path, "b.dmap", (gt * 0.5).astype(np.float32), gt)
        report_path = tmp_path / "report.json"
        assert run("eval", "--pred-dir", tmp_path / "pred", "--gt-dir", tmp_path / "gt",
                   "--out", report_path) == 0
        report = json.loads(report_path.read_text())
        assert report["n"] == 2
        assert report["mae"] >= 0 and report["mse"] >= report["mae"]
        assert report["psnr"] == "inf"  # pair a is identical
        assert 0 <= report["ssim"] <= 1

    def test_metric_subset(self, tmp_path):
        gt = np.full((16, 16), 0.5, dtype=np.float32)
        self.make_pair(tmp_path, "a.dmap", gt, gt)
        report_path = tmp_path / "r.json"
        assert run("eval", "--pred-dir", tmp_path / "pred", "--gt-dir", tmp_path / "gt",
                   "--metrics", "mae,mse", "--out", report_path) == 0
        report = json.loads(report_path.read_text())
        assert "psnr" not in report and "ssim" not in report

    def test_unmatched_files_are_a_hard_error(self, tmp_path, capsys):
        gt = np.ones((8, 8), dtype=np.float32)
        self.make_pair(tmp_path, "a.dmap", gt, gt)
        write_map(tmp_path / "pred" / "only_pred.dmap", gt)
        code = run("eval", "--pred-dir", tmp_path / "pred", "--gt-dir", tmp_path / "gt",
                   "--out", tmp_path / "r.json")
        assert code == 1
        assert "only_pred.dmap" in capsys.readouterr().err


class TestVoronoiDump:
    def test_cells_json(self, tmp_path, annotation_file):
        out = tmp_path / "cells.json"
        png = tmp_path / "cells.png"
        assert run("voronoi", "--annotations", annotation_file, "--out", out,
                   "--png", png) == 0
        doc = json.loads(out.read_text())
        assert doc["width"] == 128 and doc["height"] == 96
        assert len(doc["cells"]) == 5
        for cell in doc["cells"]:
            assert len(cell["vertices"]) >= 3
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestConfigPrecedence:
    def test_config_overrides_default_flag_overrides_config(self, tmp_path, annotation_file):
        config = tmp_path / "cfg.json"
        config.write_text('{"sigma_anc": 4.0}')
        default_out = tmp_path / "d.dmap"
        config_out = tmp_path / "c.dmap"
        flag_out = tmp_path / "f.dmap"
        run("anchormap", "--annotations", annotation_file, "--out", default_out)
        run("anchormap", "--annotations", annotation_file, "--out", config_out,
            "--config", config)
        run("anchormap", "--annotations", annotation_file, "--out", flag_out,
            "--config", config, "--sigma-anc", "2.0")
        default_map = read_map(default_out)
        config_map = read_map(config_out)
        flag_map = read_map(flag_out)
        assert not np.array_equal(default_map, config_map)  # config took effect
        assert np.array_equal(default_map, flag_map)        # flag wins over config

    def test_bad_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("densmap", "--bogus")
        assert exc.value.code == 1
        assert "error:" in capsys.readouterr().err
