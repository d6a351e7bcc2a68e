"""Gray-code encode/decode, stack decoding, and stereo ground truth."""

import numpy as np
import pytest

from phasespeckle.graycode import (
    CoordMap,
    GraycodeStack,
    capture_to_gray,
    decode_stack,
    gen_stack,
    gray_decode,
    gray_encode,
    gt_from_stereo,
)
from phasespeckle.imgcore import GrayImage, RgbImage, ValidityMask
from phasespeckle.pattern import PatternParams, gen_speckle_pattern
from phasespeckle.simulate import Layer, RigSpec, SceneSpec, render


class TestCode:
    def test_known_values(self):
        assert gray_encode(0) == 0
        assert gray_encode(5) == 7  # 101 ^ 010 = 111
        assert gray_decode(0) == 0
        assert gray_decode(7) == 5

    def test_exhaustive_roundtrip_14_bits(self):
        for v in range(2**14):
            assert gray_decode(gray_encode(v)) == v

    def test_adjacent_codes_differ_in_one_bit(self):
        codes = [gray_encode(v) for v in range(1024)]
        for a, b in zip(codes, codes[1:]):
            assert bin(a ^ b).count("1") == 1

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            gray_encode(-1)


class TestGenStack:
    def test_frame_count(self):
        stack = gen_stack(8, 3)
        assert len(stack.frames) == 2 * 3 + 2

    def test_column_zero_dark_in_all_code_frames(self):
        stack = gen_stack(8, 3)
        for i in range(3):
            assert stack.code_frame(i).data[0, 0] == 0.0
            assert stack.inverse_frame(i).data[0, 0] == 1.0

    def test_frame_xor_inverse_is_ones(self):
        stack = gen_stack(16, 4, proj_height=2)
        for i in range(4):
            combined = stack.code_frame(i).data + stack.inverse_frame(i).data
            assert np.array_equal(combined, np.ones_like(combined))

    def test_insufficient_bits(self):
        with pytest.raises(ValueError):
            gen_stack(9, 3)

    def test_stack_validates_frame_count(self):
        with pytest.raises(ValueError):
            GraycodeStack(n_bits=2, frames=[GrayImage(np.zeros((1, 4)))] * 3)


class TestDecodeStack:
    def test_identity_view_recovers_column_index(self):
        # camera == projector: decoded coordinate is exactly the column index
        stack = gen_stack(64, 6, proj_height=4)
        coords = decode_stack(stack)
        assert coords.valid.data.all()
        np.testing.assert_array_equal(coords.data, np.tile(np.arange(64.0), (4, 1)))

    def test_zero_contrast_all_invalid(self):
        stack = gen_stack(16, 4)
        gray = [GrayImage(np.full((1, 16), 0.5)) for _ in stack.frames]
        flat = GraycodeStack(n_bits=4, frames=gray)
        assert not decode_stack(flat).valid.data.any()

    def test_monotone_along_rows_where_valid(self):
        stack = gen_stack(128, 7, proj_height=2)
        coords = decode_stack(stack)
        rows = coords.data
        assert np.all(np.diff(rows, axis=1) >= 0)


def render_coord_maps(scene, rig, proj_width=512, n_bits=9):
    stack = gen_stack(proj_width, n_bits)
    lf, rf = [], []
    last = None
    for frame in stack.frames:
        res = render(scene, rig, RgbImage.from_gray(frame.data), seed=0)
        lf.append(capture_to_gray(res.left))
        rf.append(capture_to_gray(res.right))
        last = res
    lc = decode_stack(GraycodeStack(n_bits=n_bits, frames=lf))
    rc = decode_stack(GraycodeStack(n_bits=n_bits, frames=rf))
    return lc, rc, last


class TestThroughSimulator:
    rig = RigSpec(width=320, height=60, focal=600.0, baseline=100.0, proj_baseline=50.0)

    def test_flat_scene_coords_match_analytic(self):
        scene = SceneSpec(layers=[Layer(None, (16.0, 0.0, 0.0))])
        lc, rc, res = render_coord_maps(scene, self.rig)
        both = lc.valid.data & res.occlusion.data
        err = np.abs(lc.data - res.proj_coord.data)[both]
        assert (err <= 0.5).mean() >= 0.99

    def test_flat_scene_gt_within_quarter_pixel(self):
        scene = SceneSpec(layers=[Layer(None, (16.0, 0.0, 0.0))])
        lc, rc, res = render_coord_maps(scene, self.rig)
        disp, valid = gt_from_stereo(lc, rc)
        joint = valid.data & res.occlusion.data
        err = np.abs(disp.data - res.gt_disparity.data)[joint]
        assert (err <= 0.25).mean() >= 0.99

    def test_occluded_pixels_invalidated(self):
        scene = SceneSpec(
            layers=[Layer((120, 10, 200, 50), (40.0, 0.0, 0.0)), Layer(None, (10.0, 0.0, 0.0))]
        )
        lc, rc, res = render_coord_maps(scene, self.rig)
        disp, valid = gt_from_stereo(lc, rc)
        occluded = ~res.occlusion.data & lc.valid.data
        assert (~valid.data[occluded]).mean() >= 0.95


class TestGtFromStereo:
    def test_zero_disparity(self):
        vals = np.tile(np.arange(32.0), (3, 1))
        cm = CoordMap(vals, ValidityMask(np.ones((3, 32), dtype=bool)))
        disp, valid = gt_from_stereo(cm, cm)
        assert np.all(disp.data[valid.data] == 0.0)
        assert valid.data[:, :-1].all()

    def test_constant_shift(self):
        left = np.tile(np.arange(40.0), (2, 1))
        right = left + 6.0  # right pixel x sees coord x+6 -> crossing at x-6
        lc = CoordMap(left, ValidityMask(np.ones((2, 40), dtype=bool)))
        rc = CoordMap(right, ValidityMask(np.ones((2, 40), dtype=bool)))
        disp, valid = gt_from_stereo(lc, rc)
        assert np.allclose(disp.data[valid.data], 6.0)

    def test_no_bracket_is_invalid(self):
        left = np.tile(np.arange(8.0) + 100.0, (1, 1))
        right = np.tile(np.arange(8.0), (1, 1))
        lc = CoordMap(left, ValidityMask(np.ones((1, 8), dtype=bool)))
        rc = CoordMap(right, ValidityMask(np.ones((1, 8), dtype=bool)))
        disp, valid = gt_from_stereo(lc, rc)
        assert not valid.data.any()

    def test_multiple_crossings_invalidated(self):
        # a non-monotone right sweep covers the value 5.5 twice
        right = np.array([[4.0, 5.0, 6.0, 3.0, 5.0, 6.0, 7.0]])
        left = np.full((1, 3), 5.5)
        lc = CoordMap(left, ValidityMask(np.ones((1, 3), dtype=bool)))
        rc = CoordMap(right, ValidityMask(np.ones((1, 7), dtype=bool)))
        disp, valid = gt_from_stereo(lc, rc)
        assert not valid.data.any()

    def test_height_mismatch(self):
        a = CoordMap(np.zeros((2, 4)), ValidityMask(np.ones((2, 4), dtype=bool)))
        b = CoordMap(np.zeros((3, 4)), ValidityMask(np.ones((3, 4), dtype=bool)))
        with pytest.raises(ValueError):
            gt_from_stereo(a, b)
