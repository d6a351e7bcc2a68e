"""Container validation and bit-exact file I/O."""

import struct
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

GOLDEN = Path(__file__).parent / "golden"

from phasespeckle.imgcore import (
    DisparityMap,
    GrayImage,
    PfmFormatError,
    PngDecodeError,
    RgbImage,
    ValidityMask,
    read_pfm,
    read_png,
    write_pfm,
    write_ply,
    write_png,
)


class TestContainers:
    def test_rgb_rejects_mismatched_planes(self):
        with pytest.raises(ValueError):
            RgbImage(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 3)))

    def test_rejects_empty_plane(self):
        with pytest.raises(ValueError):
            GrayImage(np.zeros((0, 4)))

    def test_disparity_rejects_negative(self):
        with pytest.raises(ValueError):
            DisparityMap(np.array([[-1.0, 2.0]]))

    def test_disparity_nan_is_invalid_not_negative(self):
        d = DisparityMap(np.array([[np.nan, 2.0]]))
        assert d.valid().tolist() == [[False, True]]

    def test_disparity_rejects_inf(self):
        with pytest.raises(ValueError):
            DisparityMap(np.array([[np.inf]]))

    def test_mask_shape(self):
        with pytest.raises(ValueError):
            ValidityMask(np.zeros(4, dtype=bool))


class TestPng:
    def test_single_pixel_values(self, tmp_path):
        # independent encoder (Pillow) so the scaling oracle does not share
        # a codec with read_png
        p = tmp_path / "px.png"
        Image.fromarray(np.array([[[255, 0, 128]]], dtype=np.uint8), "RGB").save(p)
        img = read_png(str(p))
        assert img.r[0, 0] == 1.0
        assert img.g[0, 0] == 0.0
        assert img.b[0, 0] == pytest.approx(128 / 255)

    def test_grayscale_replicates(self, tmp_path):
        p = tmp_path / "g.png"
        Image.fromarray(np.array([[0]], dtype=np.uint8), "L").save(p)
        img = read_png(str(p))
        assert img.r[0, 0] == 0.0 and img.g[0, 0] == 0.0 and img.b[0, 0] == 0.0

    def test_16bit_grayscale_scaling(self, tmp_path):
        p = tmp_path / "g16.png"
        Image.fromarray(np.array([[65535, 0], [32768, 1]], dtype=np.uint16)).save(p)
        img = read_png(str(p))
        assert img.g[0, 0] == 1.0
        assert img.g[0, 1] == 0.0
        assert img.g[1, 0] == pytest.approx(32768 / 65535)

    def test_16bit_rgb_scaling(self, tmp_path):
        import cv2

        p = tmp_path / "rgb16.png"
        bgr = np.array([[[1000, 2000, 65535]]], dtype=np.uint16)  # b, g, r
        cv2.imwrite(str(p), bgr)
        img = read_png(str(p))
        assert img.r[0, 0] == 1.0
        assert img.g[0, 0] == pytest.approx(2000 / 65535)
        assert img.b[0, 0] == pytest.approx(1000 / 65535)

    def test_roundtrip_bytes_identical(self, tmp_path):
        rng = np.random.default_rng(11)
        raw = rng.integers(0, 256, size=(13, 17, 3), dtype=np.uint8)
        img = RgbImage(raw[..., 0] / 255.0, raw[..., 1] / 255.0, raw[..., 2] / 255.0)
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        write_png(img, str(a))
        write_png(read_png(str(a)), str(b))
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize(
        "value,expected", [(1.0, 255), (0.5, 128), (-0.2, 0), (1.7, 255), (0.0, 0)]
    )
    def test_write_quantization(self, tmp_path, value, expected):
        # 0.5 * 255 = 127.5 rounds half-up to 128
        p = tmp_path / "q.png"
        write_png(RgbImage.from_gray(np.full((1, 1), value)), str(p))
        assert np.asarray(Image.open(p))[0, 0, 0] == expected

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_png(str(tmp_path / "nope.png"))

    def test_rgba_rejected_names_color_type(self, tmp_path):
        p = tmp_path / "rgba.png"
        Image.fromarray(np.zeros((2, 2, 4), dtype=np.uint8), "RGBA").save(p)
        with pytest.raises(PngDecodeError, match="rgba"):
            read_png(str(p))

    def test_palette_rejected(self, tmp_path):
        p = tmp_path / "pal.png"
        Image.fromarray(np.zeros((2, 2), dtype=np.uint8), "L").convert("P").save(p)
        with pytest.raises(PngDecodeError, match="palette"):
            read_png(str(p))

    def test_1bit_rejected_names_depth(self, tmp_path):
        p = tmp_path / "b1.png"
        Image.fromarray(np.zeros((2, 2), dtype=bool)).save(p)
        with pytest.raises(PngDecodeError, match="bit depth 1"):
            read_png(str(p))

    def test_nonfinite_write_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_png(RgbImage.from_gray(np.full((1, 1), np.nan)), str(tmp_path / "n.png"))


class TestPfm:
    def test_scalar_roundtrip_exact(self, tmp_path):
        p = tmp_path / "m.pfm"
        write_pfm(DisparityMap(np.array([[2.5]])), str(p))
        assert read_pfm(str(p)).data[0, 0] == 2.5

    def test_nan_roundtrip(self, tmp_path):
        p = tmp_path / "n.pfm"
        write_pfm(DisparityMap(np.array([[np.nan]])), str(p))
        assert np.isnan(read_pfm(str(p)).data[0, 0])

    def test_golden_bytes_bottom_up(self, tmp_path):
        # hand-built expected file: header, then rows written bottom-up
        p = tmp_path / "g.pfm"
        write_pfm(DisparityMap(np.array([[1.0, 2.0], [3.0, 4.0]])), str(p))
        expected = b"Pf\n2 2\n-1.0\n" + struct.pack("<4f", 3.0, 4.0, 1.0, 2.0)
        assert p.read_bytes() == expected

    def test_file_bytes_stable_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        data = rng.random((7, 9)).astype(np.float32).astype(np.float64)
        data[0, 0] = np.nan
        a, b = tmp_path / "a.pfm", tmp_path / "b.pfm"
        write_pfm(DisparityMap(data), str(a))
        write_pfm(read_pfm(str(a)), str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "bad.pfm"
        p.write_bytes(b"PF\n2 2\n-1.0\n" + b"\x00" * 16)
        with pytest.raises(PfmFormatError):
            read_pfm(str(p))

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "short.pfm"
        p.write_bytes(b"Pf\n2 2\n-1.0\n" + b"\x00" * 8)
        with pytest.raises(PfmFormatError, match="bytes"):
            read_pfm(str(p))


class TestGoldenFiles:
    """Committed one-per-format fixtures; formats documented in the README."""

    def test_pfm_golden_bytes(self, tmp_path):
        out = tmp_path / "g.pfm"
        write_pfm(DisparityMap(np.array([[1.0, 2.0], [3.0, np.nan]])), str(out))
        golden = GOLDEN / "disp_2x2.pfm"
        assert out.read_bytes() == golden.read_bytes()
        back = read_pfm(str(golden))
        assert back.data[0, 0] == 1.0 and np.isnan(back.data[1, 1])

    def test_ply_golden_bytes(self, tmp_path):
        out = tmp_path / "p.ply"
        write_ply([(0.0, 0.0, 1.0, 255, 0, 0)], str(out))
        assert out.read_bytes() == (GOLDEN / "point.ply").read_bytes()

    def test_png_golden_decodes(self):
        img = read_png(str(GOLDEN / "pixels_2x1.png"))
        assert img.r[0, 0] == 1.0 and img.b[0, 0] == pytest.approx(128 / 255)
        assert img.g[0, 1] == pytest.approx(64 / 255) and img.b[0, 1] == 1.0


def _parse_ply(path):
    lines = path.read_text().splitlines()
    count = next(int(l.split()[-1]) for l in lines if l.startswith("element vertex"))
    body = lines[lines.index("end_header") + 1 :]
    return count, body


class TestPly:
    def test_empty_cloud(self, tmp_path):
        p = tmp_path / "e.ply"
        write_ply([], str(p))
        count, body = _parse_ply(p)
        assert count == 0 and body == []

    def test_single_point(self, tmp_path):
        p = tmp_path / "one.ply"
        write_ply([(0.0, 0.0, 1.0, 255, 0, 0)], str(p))
        count, body = _parse_ply(p)
        assert count == 1 and len(body) == 1
        assert body[0].split()[3:] == ["255", "0", "0"]

    def test_header_count_matches_lines(self, tmp_path):
        rng = np.random.default_rng(2)
        pts = [tuple(row) + (10, 20, 30) for row in rng.random((37, 3)) + 0.5]
        p = tmp_path / "n.ply"
        write_ply(pts, str(p))
        count, body = _parse_ply(p)
        assert count == 37 and len(body) == 37

    def test_nonfinite_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_ply([(np.nan, 0, 1, 0, 0, 0)], str(tmp_path / "x.ply"))
