"""Phase pre-normalization: decode correctness and illumination invariance."""

import numpy as np
import pytest

from phasespeckle.imgcore import RgbImage
from phasespeckle.pattern import PhaseField, compose_rgb, gen_base_phase
from phasespeckle.ppn import (
    CHANNEL_ORDERS,
    channel_permute_decode,
    decode,
    decode_pair,
    permute_channels,
)
from phasespeckle.simulate import Layer, RigSpec, SceneSpec, render
from phasespeckle.pattern import PatternParams, gen_speckle_pattern


def wrapped_diff(a, b):
    return np.angle(np.exp(1j * (a - b)))


def speckle_capture():
    return gen_speckle_pattern(PatternParams(lo_width=60, lo_height=40, upsample=2, seed=5))


class TestDecode:
    def test_ideal_encoding_example(self):
        # channels of an a=0.2, b=0.3, phi=0 encoding: (0.05, 0.5, 0.05);
        # num = 2*0.5 - 0.1 = 0.9, den = 0 -> atan2(0.9, 0) = pi/2
        one = np.ones((1, 1))
        img = RgbImage(0.05 * one, 0.5 * one, 0.05 * one)
        res = decode(img)
        assert res.phase.data[0, 0] == pytest.approx(np.pi / 2)
        assert res.modulation.data[0, 0] == pytest.approx(0.9)
        assert res.valid.data[0, 0]

    def test_flat_gray_invalid_phase_zero(self):
        img = RgbImage.from_gray(np.full((3, 3), 0.4))
        res = decode(img)
        assert not res.valid.data.any()
        assert np.all(res.phase.data == 0.0)

    def test_affine_example_scale_two_offset(self):
        img = speckle_capture()
        base = decode(img)
        shifted = RgbImage(2 * img.r + 0.05, 2 * img.g + 0.05, 2 * img.b + 0.05)
        res = decode(shifted)
        both = base.valid.data & res.valid.data
        assert np.abs(wrapped_diff(res.phase.data, base.phase.data))[both].max() < 1e-6
        np.testing.assert_allclose(
            res.modulation.data[both], 2 * base.modulation.data[both], rtol=1e-9
        )

    def test_affine_invariance_grid(self):
        img = speckle_capture()
        base = decode(img)
        for alpha in (0.5, 2.0):
            for beta in (-0.1, 0.2):
                res = decode(
                    RgbImage(alpha * img.r + beta, alpha * img.g + beta, alpha * img.b + beta)
                )
                both = base.valid.data & res.valid.data
                err = np.abs(wrapped_diff(res.phase.data, base.phase.data))[both]
                assert err.max() < 1e-6

    def test_output_ranges(self):
        res = decode(speckle_capture())
        assert np.all(res.phase.data > -np.pi) and np.all(res.phase.data <= np.pi)
        assert np.all(res.modulation.data >= 0)

    def test_decode_is_local(self):
        img = speckle_capture()
        whole = decode(img)
        crop = RgbImage(img.r[10:30, 5:45], img.g[10:30, 5:45], img.b[10:30, 5:45])
        part = decode(crop)
        assert np.array_equal(part.phase.data, whole.phase.data[10:30, 5:45])
        assert np.array_equal(part.valid.data, whole.valid.data[10:30, 5:45])

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            decode(speckle_capture(), -1.0)


class TestDecodePair:
    def test_identical_views(self):
        img = speckle_capture()
        a, b = decode_pair(img, img)
        assert np.array_equal(a.phase.data, b.phase.data)

    def test_left_only_gain_keeps_phase_equal(self):
        img = speckle_capture()
        boosted = RgbImage(1.7 * img.r, 1.7 * img.g, 1.7 * img.b)
        a, b = decode_pair(boosted, img)
        both = a.valid.data & b.valid.data
        assert np.abs(wrapped_diff(a.phase.data, b.phase.data))[both].max() < 1e-6

    def test_infinite_threshold_all_invalid(self):
        a, b = decode_pair(speckle_capture(), speckle_capture(), np.inf)
        assert not a.valid.data.any() and not b.valid.data.any()


class TestChannelPermutation:
    def _grid_image(self):
        phi = np.linspace(-np.pi, np.pi, 4097)[1:].reshape(64, 64)
        return compose_rgb(PhaseField(phi), 0.5, 0.45), phi

    def test_identity_equals_decode(self):
        img, _ = self._grid_image()
        assert np.array_equal(
            channel_permute_decode(img, "rgb").phase.data, decode(img).phase.data
        )

    def test_cyclic_shift_rotates_encoded_phase(self):
        # relabeling channels cyclically is exactly a 2*pi/3 rotation of the
        # encoded phase: decode(permute(img)) == decode(encode(phi +- 2*pi/3))
        img, phi = self._grid_image()

        def quotient_form(p):
            return np.arctan2(3 * 0.45 * np.cos(p), -np.sqrt(3) * 0.45 * np.sin(p))

        for order, shift in (("brg", 2 * np.pi / 3), ("gbr", -2 * np.pi / 3)):
            res = channel_permute_decode(img, order)
            want = quotient_form(phi + shift)
            assert np.abs(wrapped_diff(res.phase.data, want)).max() < 1e-9

    def test_cyclic_shift_constant_offset_under_normalized_decoder(self):
        # with the sqrt(3)-normalized three-step quotient the same relabeling
        # shows up as one constant wrapped offset at every pixel
        img, _ = self._grid_image()

        def ref_decode(im):
            return np.arctan2(-np.sqrt(3) * (im.r - im.b), 2 * im.g - im.r - im.b)

        base = ref_decode(img)
        for order, shift in (("brg", 2 * np.pi / 3), ("gbr", -2 * np.pi / 3)):
            res = ref_decode(permute_channels(img, order))
            diff = wrapped_diff(res, base)
            assert np.abs(diff - shift).max() < 1e-9

    def test_all_orders_injective(self):
        # each reordering distorts the decoded value but never merges two
        # distinct phases
        img, _ = self._grid_image()
        for order in CHANNEL_ORDERS:
            out = channel_permute_decode(img, order).phase.data.ravel()
            assert np.unique(out).size == out.size

    def test_bad_order_rejected(self):
        img, _ = self._grid_image()
        with pytest.raises(ValueError):
            permute_channels(img, "rgr")


class TestEqualAlbedoResidual:
    def test_gray_albedo_matches_unit_albedo(self):
        # with r=g=b the albedo scales num and den together and the ambient
        # contribution cancels, so the decode is unchanged
        pattern = speckle_capture()
        rig = RigSpec(width=100, height=60)
        def scene(rho):
            return SceneSpec(
                layers=[Layer(None, (8.0, 0.0, 0.0), (rho, rho, rho))],
                ambient=(0.07, 0.07, 0.07),
            )
        full = decode(render(scene(1.0), rig, pattern).left)
        dim = decode(render(scene(0.35), rig, pattern).left)
        both = full.valid.data & dim.valid.data
        assert np.abs(wrapped_diff(dim.phase.data, full.phase.data))[both].max() < 1e-12
