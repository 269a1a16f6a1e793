"""Target qumode states in the truncated Fock basis."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fock import FockCutoff

__all__ = [
    "FAMILIES",
    "NON_GAUSSIAN_PRESET",
    "TargetSpec",
    "make_gaussian_target",
    "make_non_gaussian_preset",
    "load_explicit_target",
    "read_amplitude_file",
    "resolve_target",
]

FAMILIES = ("local_gaussian", "gaussian", "non_gaussian_preset", "explicit", "vacuum")

# Printed to three significant figures; renormalized on use.
NON_GAUSSIAN_PRESET = (0.0, 0.209, 0.417, 0.209, 0.0, 0.417, 0.626, 0.417, 0.0, 0.0)

_FAMILY_DEFAULTS = {
    "local_gaussian": (0.0, 0.75),
    "gaussian": (5.0, 1.0),
}


def _cut(cutoff) -> FockCutoff:
    return cutoff if isinstance(cutoff, FockCutoff) else FockCutoff(cutoff)


def _normalized(values) -> np.ndarray:
    v = np.asarray(values, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("target amplitudes must have a finite nonzero norm")
    return v / norm


def make_gaussian_target(mean: float, std: float, cutoff) -> np.ndarray:
    """Amplitudes ``exp(-(n - mean)^2 / (2 std^2))`` over ``n = 0..N-1``, L2-normalized."""
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    n = np.arange(_cut(cutoff).n_levels, dtype=float)
    # shift the exponent so the largest entry is exp(0); avoids underflow for far-off means
    expo = -((n - mean) ** 2) / (2.0 * std**2)
    return _normalized(np.exp(expo - expo.max()))


def make_non_gaussian_preset(cutoff) -> np.ndarray:
    cutoff = _cut(cutoff)
    if cutoff.n_levels != len(NON_GAUSSIAN_PRESET):
        raise ValueError(
            f"the non-Gaussian preset is defined for {len(NON_GAUSSIAN_PRESET)} levels, "
            f"got cutoff {cutoff.n_levels}"
        )
    return _normalized(NON_GAUSSIAN_PRESET)


def load_explicit_target(values, cutoff) -> np.ndarray:
    cutoff = _cut(cutoff)
    values = np.asarray(values, dtype=complex).ravel()
    if values.size != cutoff.n_levels:
        raise ValueError(f"expected {cutoff.n_levels} amplitudes, got {values.size}")
    return _normalized(values)


def read_amplitude_file(path) -> np.ndarray:
    """Read one complex amplitude per line as ``re im`` (``im`` optional); ``#`` starts a comment."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (1, 2):
            raise ValueError(f"{path}:{lineno}: expected 're im', got {line!r}")
        re_, im_ = float(parts[0]), float(parts[1]) if len(parts) == 2 else 0.0
        out.append(complex(re_, im_))
    return np.asarray(out, dtype=complex)


@dataclass(frozen=True)
class TargetSpec:
    """Declarative target description.

    ``mean``/``std`` are in Fock-index units and only used by the Gaussian
    families; when omitted the family defaults apply (0/0.75 for
    ``local_gaussian``, 5/1 for ``gaussian``). ``amplitudes`` feeds the
    ``explicit`` family, ``path`` may point at an amplitude file instead.
    """

    family: str
    cutoff: int = 10
    mean: float | None = None
    std: float | None = None
    amplitudes: tuple | None = field(default=None)
    path: str | None = None

    def __post_init__(self):
        family = self.family.replace("-", "_")
        if family == "non_gaussian":
            family = "non_gaussian_preset"
        if family not in FAMILIES:
            raise ValueError(f"unknown target family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", family)
        if isinstance(self.cutoff, FockCutoff):
            object.__setattr__(self, "cutoff", self.cutoff.n_levels)
        if family in _FAMILY_DEFAULTS:
            m, s = _FAMILY_DEFAULTS[family]
            object.__setattr__(self, "mean", float(m if self.mean is None else self.mean))
            object.__setattr__(self, "std", float(s if self.std is None else self.std))
        if self.amplitudes is not None:
            object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))

    def resolve(self) -> np.ndarray:
        return resolve_target(self)

    @property
    def label(self) -> str:
        if self.family in _FAMILY_DEFAULTS:
            return f"{self.family}(mean={self.mean:g},std={self.std:g})"
        return self.family

    def to_dict(self) -> dict:
        d = {"family": self.family, "cutoff": self.cutoff}
        if self.mean is not None:
            d["mean"] = self.mean
            d["std"] = self.std
        if self.amplitudes is not None:
            d["amplitudes"] = [[a.real, a.imag] for a in self.amplitudes]
        if self.path is not None:
            d["path"] = self.path
        return d

    @classmethod
    def from_dict(cls, d) -> "TargetSpec":
        if isinstance(d, str):
            return cls(family=d)
        d = dict(d)
        amps = d.pop("amplitudes", None)
        if amps is not None:
            amps = tuple(complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in amps)
        return cls(amplitudes=amps, **d)


def resolve_target(spec: TargetSpec) -> np.ndarray:
    cutoff = FockCutoff(spec.cutoff)
    if spec.family in ("local_gaussian", "gaussian"):
        return make_gaussian_target(spec.mean, spec.std, cutoff)
    if spec.family == "non_gaussian_preset":
        return make_non_gaussian_preset(cutoff)
    if spec.family == "vacuum":
        return load_explicit_target(np.eye(cutoff.n_levels)[0], cutoff)
    if spec.amplitudes is not None:
        return load_explicit_target(spec.amplitudes, cutoff)
    if spec.path is not None:
        return load_explicit_target(read_amplitude_file(spec.path), cutoff)
    raise ValueError("explicit target needs amplitudes or a path")
