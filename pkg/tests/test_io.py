"""File formats: image loading, detection JSON, dumps, ground truth,
manifests, and the atomic-write guarantee."""

import json
import os

import numpy as np
import pytest
from PIL import Image

from symkde import InputError
from symkde.density import DensityGrid, GridSpec, KernelParams
from symkde.io import (
    atomic_write_text,
    detections_from_dicts,
    load_gray,
    load_rgb,
    read_density_dump,
    read_detections,
    read_gt,
    read_manifest,
    write_density_dump,
    write_detections,
    write_gt,
    write_manifest,
)

RECORD = {
    "x1": 10.0, "y1": 20.0, "x2": 30.0, "y2": 40.0,
    "theta": 0.5, "rho": 0.1, "score": 2.5, "support_count": 7,
}


class TestLoadImages:
    def test_grayscale_png_scales_to_unit_range(self, tmp_path):
        path = tmp_path / "g.png"
        arr = np.arange(256, dtype=np.uint8).reshape(16, 16)
        Image.fromarray(arr, mode="L").save(path)
        img = load_gray(str(path))
        assert img.intensities.shape == (16, 16)
        assert img.intensities.min() == 0.0
        assert img.intensities.max() == pytest.approx(1.0)

    def test_rgb_png_uses_luma_weights(self, tmp_path):
        path = tmp_path / "c.png"
        rgb = np.zeros((8, 8, 3), dtype=np.uint8)
        rgb[..., 0] = 255  # pure red
        Image.fromarray(rgb, mode="RGB").save(path)
        img = load_gray(str(path))
        np.testing.assert_allclose(img.intensities, 0.299, atol=1e-9)

    def test_sixteen_bit_png(self, tmp_path):
        path = tmp_path / "d.png"
        arr = np.full((8, 8), 65535, dtype=np.uint16)
        Image.fromarray(arr).save(path)
        img = load_gray(str(path))
        np.testing.assert_allclose(img.intensities, 1.0)

    def test_missing_and_corrupt_files(self, tmp_path):
        with pytest.raises(InputError):
            load_gray(str(tmp_path / "absent.png"))
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"this is not an image")
        with pytest.raises(InputError):
            load_gray(str(bad))

    def test_load_rgb_mode(self, tmp_path):
        path = tmp_path / "g.png"
        Image.fromarray(np.zeros((8, 8), dtype=np.uint8), mode="L").save(path)
        assert load_rgb(str(path)).mode == "RGB"


class TestDetectionFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "det.json"
        write_detections([RECORD], str(path))
        back = read_detections(str(path))
        assert back == [RECORD]
        dets = detections_from_dicts(back)
        assert dets[0].score == 2.5
        np.testing.assert_allclose(dets[0].endpoints, [[10, 20], [30, 40]])

    def test_empty_list_round_trips(self, tmp_path):
        path = tmp_path / "det.json"
        write_detections([], str(path))
        assert read_detections(str(path)) == []

    def test_rejects_missing_keys(self, tmp_path):
        path = tmp_path / "det.json"
        partial = {k: RECORD[k] for k in ("x1", "y1", "x2", "y2")}
        path.write_text(json.dumps([partial]))
        with pytest.raises(InputError):
            read_detections(str(path))

    def test_rejects_non_numeric_and_non_finite(self, tmp_path):
        path = tmp_path / "det.json"
        path.write_text(json.dumps([{**RECORD, "score": "high"}]))
        with pytest.raises(InputError):
            read_detections(str(path))
        path.write_text(json.dumps([{**RECORD, "rho": None}]))
        with pytest.raises(InputError):
            read_detections(str(path))

    def test_rejects_non_array_documents(self, tmp_path):
        path = tmp_path / "det.json"
        path.write_text(json.dumps({"detections": []}))
        with pytest.raises(InputError):
            read_detections(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_detections(str(tmp_path / "absent.json"))


class TestDensityDump:
    def test_round_trip_preserves_every_bit(self, tmp_path):
        rng = np.random.default_rng(5)
        spec = GridSpec(n_rho=40, n_theta=18)
        grid = DensityGrid(
            values=rng.random((40, 18)),
            spec=spec,
            params=KernelParams(g=0.05, k=12.0),
        )
        base = str(tmp_path / "density")
        write_density_dump(grid, base)
        back = read_density_dump(base)
        np.testing.assert_array_equal(back.values, grid.values)
        assert back.spec == spec
        assert back.params == grid.params

    def test_shape_mismatch_rejected(self, tmp_path):
        base = str(tmp_path / "density")
        grid = DensityGrid(
            values=np.ones((4, 3)),
            spec=GridSpec(n_rho=4, n_theta=3),
            params=KernelParams(),
        )
        write_density_dump(grid, base)
        header = json.loads((tmp_path / "density.json").read_text())
        header["n_rho"] = 5
        (tmp_path / "density.json").write_text(json.dumps(header))
        with pytest.raises(InputError):
            read_density_dump(base)


class TestGroundTruth:
    def test_round_trip_and_comments(self, tmp_path):
        path = tmp_path / "a.gt.txt"
        path.write_text(
            "# header comment\n"
            "10 20 30 40\n"
            "\n"
            "1.5, 2.5, 3.5, 4.5  # trailing comment\n"
        )
        axes = read_gt(str(path))
        assert len(axes) == 2
        np.testing.assert_allclose(axes[0].endpoints, [[10, 20], [30, 40]])
        np.testing.assert_allclose(axes[1].endpoints, [[1.5, 2.5], [3.5, 4.5]])
        out = tmp_path / "b.gt.txt"
        write_gt(axes, str(out))
        again = read_gt(str(out))
        np.testing.assert_array_equal(again[0].endpoints, axes[0].endpoints)
        np.testing.assert_array_equal(again[1].endpoints, axes[1].endpoints)

    def test_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.gt.txt"
        path.write_text("10 20 30 40\n1 2 3\n")
        with pytest.raises(InputError, match=":2"):
            read_gt(str(path))
        path.write_text("10 20 30 forty\n")
        with pytest.raises(InputError, match=":1"):
            read_gt(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_gt(str(tmp_path / "absent.gt.txt"))

    def test_empty_file_is_zero_axes(self, tmp_path):
        path = tmp_path / "empty.gt.txt"
        path.write_text("# only a comment\n")
        assert read_gt(str(path)) == []


class TestManifest:
    def test_paths_resolve_relative_to_manifest(self, tmp_path):
        sub = tmp_path / "data"
        sub.mkdir()
        manifest = sub / "manifest.json"
        manifest.write_text(json.dumps({
            "images": [{"image": "imgs/a.png", "ground_truth": "gt/a.gt.txt"}]
        }))
        entries = read_manifest(str(manifest))
        assert entries[0]["image"] == str(sub / "imgs" / "a.png")
        assert entries[0]["ground_truth"] == str(sub / "gt" / "a.gt.txt")
        assert entries[0]["stem"] == "a"

    def test_write_read_round_trip(self, tmp_path):
        entries = [{
            "image": str(tmp_path / "x" / "img.png"),
            "ground_truth": str(tmp_path / "x" / "img.gt.txt"),
        }]
        path = tmp_path / "manifest.json"
        write_manifest(entries, str(path))
        back = read_manifest(str(path))
        assert back[0]["image"] == entries[0]["image"]
        assert back[0]["ground_truth"] == entries[0]["ground_truth"]
        assert back[0]["stem"] == "img"

    def test_malformed_manifests(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"images": []}))
        with pytest.raises(InputError):
            read_manifest(str(path))
        path.write_text(json.dumps({"images": [{"image": "a.png"}]}))
        with pytest.raises(InputError):
            read_manifest(str(path))
        path.write_text(json.dumps([1, 2]))
        with pytest.raises(InputError):
            read_manifest(str(path))
        with pytest.raises(InputError):
            read_manifest(str(tmp_path / "absent.json"))


class TestAtomicWrites:
    def test_overwrite_is_all_or_nothing(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write_text(str(path), "first")
        atomic_write_text(str(path), "second")
        assert path.read_text() == "second"

    def test_no_temp_droppings_after_success(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write_text(str(path), "payload")
        assert os.listdir(tmp_path) == ["out.txt"]

    def test_creates_missing_directories(self, tmp_path):
        path = tmp_path / "deep" / "er" / "out.txt"
        atomic_write_text(str(path), "payload")
        assert path.read_text() == "payload"
