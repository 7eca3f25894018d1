"""Random-phase vacuum ensemble and its correlator statistics.

The vacuum of the deterministic formulation is the uniform distribution over
the beable configurations: every mode carries a pure phase, independently
uniform on the circle.  Under that measure ``<conj(b(x)) b(y)>`` is exactly
the lattice Kronecker delta (phase averages kill every cross term, unitarity
of the transform does the rest), which makes the ensemble a sharp statistical
target: Monte-Carlo estimates must hit the delta within standard errors, and
must keep hitting it after spectral evolution, since per-mode rotation leaves
the uniform phase measure invariant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ontofield.lattice import (
    ComplexField,
    MomentumLattice,
    spectral_evolve,
    to_position,
)

__all__ = [
    "CorrelatorEstimate",
    "EnsembleSpec",
    "ensemble_correlator",
    "sample_vacuum",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class EnsembleSpec:
    """Lattice, sample count, and seed of one vacuum ensemble.

    Samples are keyed by ``(seed, sample index)`` through a counter-based
    generator, so sample ``i`` is the same array no matter how many samples
    are drawn, in what order, or on how many workers.
    """

    lattice: MomentumLattice
    count: int
    seed: int

    def __post_init__(self) -> None:
        if not isinstance(self.count, (int, np.integer)) or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")


def sample_vacuum(spec: EnsembleSpec, sample_index: int = 0) -> ComplexField:
    """Draw one vacuum configuration: unit-modulus phases per mode.

    The per-sample stream comes from a Philox counter keyed by
    ``(seed, sample_index)``; within the stream, modes are filled in fixed
    C order, so the draw is deterministic and schedule-independent.
    """
    if sample_index < 0:
        raise ValueError(f"sample_index must be nonnegative, got {sample_index!r}")
    key = np.array([spec.seed & _MASK64, sample_index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=spec.lattice.grid_points)
    return ComplexField(space="momentum", values=np.exp(1j * theta), time=0.0)


@dataclass(frozen=True)
class CorrelatorEstimate:
    """Monte-Carlo two-point estimates ``<conj(b(x)) b(y)>`` with errors.

    ``mean`` and ``stderr`` are indexed by flattened (row-major) site pairs.
    ``stderr`` combines the real and imaginary sample variances; entries
    whose variance estimate vanished are flagged in ``zero_variance`` (their
    bars carry no information).
    """

    mean: np.ndarray
    stderr: np.ndarray
    count: int
    zero_variance: np.ndarray

    def write_csv(self, path: str | Path) -> None:
        """Columns x_index, y_index, re, im, stderr; 17 significant digits."""
        fmt = "%.17g"
        n = self.mean.shape[0]
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x_index", "y_index", "re", "im", "stderr"])
            for x in range(n):
                for y in range(n):
                    writer.writerow(
                        [
                            str(x),
                            str(y),
                            fmt % self.mean[x, y].real,
                            fmt % self.mean[x, y].imag,
                            fmt % self.stderr[x, y],
                        ]
                    )


def ensemble_correlator(
    spec: EnsembleSpec,
    samples: int | None = None,
    *,
    evolve_time: float = 0.0,
    batch_size: int = 256,
) -> CorrelatorEstimate:
    """Average ``conj(b(x)) b(y)`` over independently drawn vacua.

    Under the uniform-phase measure the prediction is the identity matrix.
    Each sample is optionally pushed through spectral evolution by
    ``evolve_time`` before transforming to position space; the estimate's
    distribution must not depend on that time.  Accumulation order is fixed
    (ascending sample index) so results are bitwise reproducible.
    """
    n_samples = spec.count if samples is None else int(samples)
    if n_samples < 100:
        raise ValueError(f"correlator estimation needs >= 100 samples, got {n_samples}")
    n_sites = int(np.prod(spec.lattice.grid_points))
    sum_w = np.zeros((n_sites, n_sites), dtype=complex)
    sum_sq = np.zeros((n_sites, n_sites), dtype=float)
    for start in range(0, n_samples, batch_size):
        stop = min(start + batch_size, n_samples)
        block = np.empty((stop - start, n_sites), dtype=complex)
        for row, index in enumerate(range(start, stop)):
            field = sample_vacuum(spec, index)
            if evolve_time != 0.0:
                field = spectral_evolve(field, spec.lattice, evolve_time)
            block[row] = to_position(field, spec.lattice).values.ravel(order="C")
        sum_w += np.einsum("sx,sy->xy", block.conj(), block)
        abs_sq = np.abs(block) ** 2
        sum_sq += np.einsum("sx,sy->xy", abs_sq, abs_sq)
    mean = sum_w / n_samples
    # E|w|^2 - |E w|^2 estimates Var(Re w) + Var(Im w) in one shot.
    variance = (sum_sq - n_samples * np.abs(mean) ** 2) / (n_samples - 1)
    variance = np.maximum(variance, 0.0)
    stderr = np.sqrt(variance / n_samples)
    return CorrelatorEstimate(
        mean=mean,
        stderr=stderr,
        count=n_samples,
        zero_variance=variance == 0.0,
    )
