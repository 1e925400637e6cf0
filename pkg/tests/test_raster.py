from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from inscribe.errors import CorruptImage, UnsupportedFormat
from inscribe.raster import (
    BinaryRaster,
    GrayRaster,
    RgbRaster,
    decode_pnm,
    encode_pnm,
    load_image,
    save_binary,
    save_gray,
    save_rgb,
    to_grayscale,
)

dims = st.tuples(st.integers(1, 12), st.integers(1, 12))
gray_arrays = dims.flatmap(lambda s: arrays(np.uint8, s))
rgb_arrays = dims.flatmap(lambda s: arrays(np.uint8, s + (3,)))
bit_arrays = dims.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


def luma_oracle(r, g, b):
    v = Fraction(299, 1000) * r + Fraction(587, 1000) * g + Fraction(114, 1000) * b
    return min(255, int(v + Fraction(1, 2)))


class TestDecode:
    def test_p5(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 64, 128, 255]))
        img = load_image(p)
        assert isinstance(img, GrayRaster)
        assert (img.width, img.height) == (2, 2)
        assert img.data.ravel().tolist() == [0, 64, 128, 255]

    def test_p6(self, tmp_path):
        p = tmp_path / "a.ppm"
        p.write_bytes(b"P6 1 1 255\n" + bytes([255, 0, 0]))
        img = load_image(p)
        assert isinstance(img, RgbRaster)
        assert img.data.reshape(-1, 3).tolist() == [[255, 0, 0]]

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 64, 128]))
        with pytest.raises(CorruptImage):
            load_image(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.pgm")

    @pytest.mark.parametrize("blob", [b"GIF89a....", b"P7\n1 1\n255\n\x00", b""])
    def test_unknown_magic(self, blob):
        with pytest.raises(UnsupportedFormat):
            decode_pnm(blob)

    def test_16bit_rejected(self):
        with pytest.raises(UnsupportedFormat):
            decode_pnm(b"P5\n1 1\n65535\n\x00\x01")

    def test_header_comments(self):
        img = decode_pnm(b"P2\n# made by hand\n3 1 # width height\n255\n1 2\n3\n")
        assert img.data.tolist() == [[1, 2, 3]]

    def test_plain_sample_over_maxval(self):
        with pytest.raises(CorruptImage):
            decode_pnm(b"P2\n1 1\n255\n256\n")

    def test_plain_too_few_samples(self):
        with pytest.raises(CorruptImage):
            decode_pnm(b"P3\n1 1\n255\n1 2\n")

    def test_pbm_bits(self):
        # P4 packs rows MSB first, padded to whole bytes
        img = decode_pnm(b"P4\n10 1\n" + bytes([0b10100000, 0b01000000]))
        assert img.data.tolist() == [[1, 0, 1, 0, 0, 0, 0, 0, 0, 1]]


class TestEncode:
    def test_gray_round_trip_file(self, tmp_path):
        g = GrayRaster(np.array([[0, 64], [128, 255]], dtype=np.uint8))
        save_gray(g, tmp_path / "g.pgm")
        assert load_image(tmp_path / "g.pgm") == g

    def test_binary_as_pgm_payload(self, tmp_path):
        b = BinaryRaster(np.array([[1, 0]], dtype=np.uint8))
        save_binary(b, tmp_path / "b.pgm")
        raw = (tmp_path / "b.pgm").read_bytes()
        assert raw.endswith(bytes([255, 0]))
        assert load_image(tmp_path / "b.pgm").data.tolist() == [[255, 0]]

    def test_binary_as_pbm_is_black_for_one(self, tmp_path):
        b = BinaryRaster(np.array([[1, 0]], dtype=np.uint8))
        save_binary(b, tmp_path / "b.pbm")
        raw = (tmp_path / "b.pbm").read_bytes()
        assert raw == b"P4\n2 1\n" + bytes([0b10000000])
        assert load_image(tmp_path / "b.pbm") == b

    def test_save_into_missing_directory(self, tmp_path):
        g = GrayRaster(np.zeros((1, 1), dtype=np.uint8))
        with pytest.raises(OSError):
            save_gray(g, tmp_path / "missing" / "g.pgm")

    def test_rasters_are_read_only(self):
        src = np.zeros((2, 2), dtype=np.uint8)
        g = GrayRaster(src)
        src[0, 0] = 9
        assert g.data[0, 0] == 0
        with pytest.raises(ValueError):
            g.data[0, 0] = 1

    def test_binary_rejects_other_values(self):
        with pytest.raises(ValueError):
            BinaryRaster(np.array([[0, 2]], dtype=np.uint8))

    def test_rgb_file_round_trip(self, tmp_path):
        c = RgbRaster(np.arange(24, dtype=np.uint8).reshape(2, 4, 3))
        save_rgb(c, tmp_path / "c.ppm", plain=True)
        assert load_image(tmp_path / "c.ppm") == c


@settings(max_examples=60, deadline=None)
@given(gray_arrays, st.booleans())
def test_gray_codec_identity(a, plain):
    g = GrayRaster(a)
    assert decode_pnm(encode_pnm(g, plain=plain)) == g


@settings(max_examples=60, deadline=None)
@given(rgb_arrays, st.booleans())
def test_rgb_codec_identity(a, plain):
    c = RgbRaster(a)
    assert decode_pnm(encode_pnm(c, plain=plain)) == c


@settings(max_examples=60, deadline=None)
@given(bit_arrays, st.booleans())
def test_binary_codec_identity(a, plain):
    b = BinaryRaster(a)
    assert decode_pnm(encode_pnm(b, plain=plain)) == b


class TestGrayscale:
    @pytest.mark.parametrize("rgb, expected", [((128, 128, 128), 128), ((255, 0, 0), 76), ((0, 0, 255), 29),
                                               ((0, 255, 0), 150), ((255, 255, 255), 255), ((0, 0, 0), 0)])
    def test_known_values(self, rgb, expected):
        img = RgbRaster(np.array([[rgb]], dtype=np.uint8))
        assert to_grayscale(img).data[0, 0] == expected

    def test_matches_exact_rounding_everywhere(self, rng):
        px = rng.integers(0, 256, size=(1, 4000, 3)).astype(np.uint8)
        got = to_grayscale(RgbRaster(px)).data[0]
        want = [luma_oracle(*map(int, p)) for p in px[0]]
        assert got.tolist() == want

    @settings(max_examples=50, deadline=None)
    @given(rgb_arrays)
    def test_within_channel_range(self, a):
        g = to_grayscale(RgbRaster(a)).data
        assert np.all(g >= a.min(axis=2)) and np.all(g <= a.max(axis=2))

    @settings(max_examples=50, deadline=None)
    @given(gray_arrays)
    def test_replicated_gray_is_fixed_point(self, a):
        rgb = RgbRaster(np.repeat(a[..., None], 3, axis=2))
        assert to_grayscale(rgb) == GrayRaster(a)


def test_png_through_pillow(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    a = np.arange(12, dtype=np.uint8).reshape(2, 2, 3) * 20
    Image.fromarray(a, "RGB").save(tmp_path / "c.png")
    Image.fromarray(a[..., 0], "L").save(tmp_path / "g.png")
    assert load_image(tmp_path / "c.png") == RgbRaster(a)
    assert load_image(tmp_path / "g.png") == GrayRaster(a[..., 0])
