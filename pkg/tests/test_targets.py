import math

import numpy as np
import pytest

from qumodeprep.targets import (
    NON_GAUSSIAN_PRESET,
    TargetSpec,
    load_explicit_target,
    make_gaussian_target,
    make_non_gaussian_preset,
    read_amplitude_file,
)


def plain_gaussian(mean, std, n):
    raw = [math.exp(-((k - mean) ** 2) / (2 * std**2)) for k in range(n)]
    norm = math.sqrt(sum(r * r for r in raw))
    return [r / norm for r in raw]


# frozen from plain_gaussian(0, 0.75, 10)
LOCAL_GAUSSIAN_GOLDEN = [
    0.9245677297844217, 0.38010115712070397, 0.02641074021052686, 0.0003101579203073416,
    6.156106148270043e-07, 2.0651435461454785e-10, 1.1708878791340085e-14, 1.1220218055879225e-19,
    1.8172229172350119e-25, 4.974346503788309e-32,
]


class TestGaussian:
    def test_golden(self):
        np.testing.assert_allclose(plain_gaussian(0, 0.75, 10), LOCAL_GAUSSIAN_GOLDEN, rtol=1e-14)
        np.testing.assert_allclose(make_gaussian_target(0, 0.75, 10), LOCAL_GAUSSIAN_GOLDEN, rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("mean,std", [(5, 1), (2.5, 0.4), (9, 3), (40, 2)])
    def test_plain_math(self, mean, std):
        expected = plain_gaussian(mean, std, 10) if mean < 20 else None
        got = make_gaussian_target(mean, std, 10)
        assert abs(np.linalg.norm(got) - 1) <= 1e-12
        if expected is not None:
            np.testing.assert_allclose(got, expected, atol=1e-12)
        assert np.all(np.isfinite(got))

    def test_symmetric_about_mean(self):
        v = make_gaussian_target(4.5, 1.3, 10)
        np.testing.assert_allclose(v, v[::-1], atol=1e-14)

    @pytest.mark.parametrize("std", [0, -1])
    def test_bad_std(self, std):
        with pytest.raises(ValueError):
            make_gaussian_target(0, std, 10)

    def test_deterministic(self):
        assert np.array_equal(make_gaussian_target(5, 1, 10), make_gaussian_target(5, 1, 10))


class TestPreset:
    def test_values(self):
        v = make_non_gaussian_preset(10)
        raw = np.array(NON_GAUSSIAN_PRESET)
        np.testing.assert_allclose(v, raw / np.linalg.norm(raw), atol=1e-15)
        assert abs(np.linalg.norm(v) - 1) <= 1e-12

    def test_wrong_cutoff(self):
        with pytest.raises(ValueError):
            make_non_gaussian_preset(12)


class TestExplicit:
    def test_normalizes(self):
        np.testing.assert_allclose(load_explicit_target([3, 4j], 2), [0.6, 0.8j])

    def test_length(self):
        with pytest.raises(ValueError):
            load_explicit_target([1, 0, 0], 2)

    def test_zero(self):
        with pytest.raises(ValueError):
            load_explicit_target([0, 0], 2)

    def test_file(self, tmp_path):
        path = tmp_path / "amps.txt"
        path.write_text("# two levels\n1 0\n0 1  # imaginary\n")
        np.testing.assert_allclose(read_amplitude_file(path), [1, 1j])
        spec = TargetSpec("explicit", cutoff=2, path=str(path))
        np.testing.assert_allclose(spec.resolve(), np.array([1, 1j]) / np.sqrt(2))

    def test_bad_file(self, tmp_path):
        path = tmp_path / "amps.txt"
        path.write_text("1 2 3\n")
        with pytest.raises(ValueError):
            read_amplitude_file(path)


class TestSpec:
    def test_defaults(self):
        s = TargetSpec("local-gaussian")
        assert (s.family, s.mean, s.std) == ("local_gaussian", 0.0, 0.75)
        assert TargetSpec("gaussian").label == "gaussian(mean=5,std=1)"
        assert TargetSpec("non-gaussian").family == "non_gaussian_preset"

    def test_unknown(self):
        with pytest.raises(ValueError):
            TargetSpec("squeezed")

    def test_roundtrip(self):
        for s in (TargetSpec("gaussian", mean=3, std=0.5), TargetSpec("explicit", cutoff=2, amplitudes=[1, 1j]),
                  TargetSpec("vacuum")):
            assert TargetSpec.from_dict(s.to_dict()) == s
        assert TargetSpec.from_dict("vacuum") == TargetSpec("vacuum")

    def test_vacuum(self):
        np.testing.assert_array_equal(TargetSpec("vacuum", cutoff=4).resolve(), [1, 0, 0, 0])
