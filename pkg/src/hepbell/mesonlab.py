"""Experimental scheme for the charmonium -> two-vector-meson test.

Covers the transverse entangled state, the azimuthal-angle density between
the two decay planes, reproducible Monte Carlo event generation with a
detector model, the histogram probability estimator, the event-based CH
evaluation, the detection-efficiency threshold, and two-body kinematics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .qcore import Projector, StateVector, born_probability
from .reports import InequalityReport, make_report
from .spin1 import maximize_ch_vv

TWO_PI = 2.0 * math.pi

# Speed (units of c) each vector meson needs for a usable fraction of
# space-like separated decay events.
SPACE_LIKE_BETA_MIN = 0.59

DEFAULT_BIN_COUNT = 64

# ch_from_events reads windows centered on the setting differences; half the
# default bin width keeps the window-average bias an order below the
# statistical error even at 1e7 events.
DEFAULT_CH_WINDOW = TWO_PI / 128


class NoData(ValueError):
    """No detected coincidences to estimate from."""


class InsufficientStatistics(ValueError):
    """A histogram bin required by the evaluation is empty."""

    def __init__(self, message: str, bin_phi: float, bin_width: float):
        super().__init__(message)
        self.bin_phi = bin_phi
        self.bin_width = bin_width


class BelowThreshold(ValueError):
    """Parent mass does not allow the two-body decay."""


def transverse_state() -> StateVector:
    """Antisymmetric transverse-polarization state of the two vector mesons."""
    amps = np.array([0.0, 1.0, -1.0, 0.0], dtype=np.complex128) / np.sqrt(2.0)
    return StateVector((2, 2), amps, (("x", "y"), ("x", "y")))


def _transverse_projector(theta: float) -> Projector:
    return Projector.onto(np.array([math.cos(theta), math.sin(theta)]))


def joint_direction_probability(theta_1: float, theta_2: float) -> float:
    """Born probability that the two sides project onto the given directions."""
    return born_probability(
        transverse_state(), [_transverse_projector(theta_1), _transverse_projector(theta_2)]
    )


def angular_density(phi):
    """Normalized density of the angle between decay planes: sin^2(phi)/pi."""
    return np.sin(phi) ** 2 / math.pi


@lru_cache(maxsize=1)
def derive_kappa(n_points: int = 2048) -> float:
    """Normalization constant relating the joint probability to the density.

    kappa = integral over [0, 2*pi) of the joint direction probability at
    relative angle phi, computed by periodic quadrature on the transverse
    state rather than hard-coded; evaluates to pi/2.
    """
    grid = np.arange(n_points) * (TWO_PI / n_points)
    values = [joint_direction_probability(0.0, float(phi)) for phi in grid]
    return float(np.sum(values) * (TWO_PI / n_points))


def _signal_cdf(phi: np.ndarray) -> np.ndarray:
    return (2.0 * phi - np.sin(2.0 * phi)) / (4.0 * math.pi)


def _core_inverse_knot(m: float) -> float:
    """Scalar bisection for x - sin(x) = m on [0, pi] (table construction)."""
    lo, hi = 0.0, math.pi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid - math.sin(mid) < m:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_CORE_KNOTS_M = np.linspace(0.0, math.pi, 257)
_CORE_KNOTS_X = np.array([_core_inverse_knot(m) for m in _CORE_KNOTS_M])


def _core_inverse(m: np.ndarray) -> np.ndarray:
    """Solve x - sin(x) = m on [0, pi] by seeded, clipped Newton iterations.

    The seed is a table interpolation, switched to the cube-root expansion
    where the inverse has a vertical tangent at m = 0.  Four Newton steps
    bring the residual in m to machine precision everywhere.
    """
    x = np.interp(m, _CORE_KNOTS_M, _CORE_KNOTS_X)
    x = np.where(m < _CORE_KNOTS_M[1], np.cbrt(6.0 * m), x)
    for _ in range(4):
        g = x - np.sin(x) - m
        dg = 1.0 - np.cos(x)
        step = np.where(dg > 1e-30, g / np.maximum(dg, 1e-300), 0.0)
        x = np.clip(x - step, 0.0, math.pi)
    return x


def _invert_signal_cdf(u: np.ndarray) -> np.ndarray:
    """Deterministic inverse of the signal CDF.

    In terms of x = 2*phi the CDF equation reads x - sin(x) = 4*pi*u, solved
    on the core interval via :func:`_core_inverse` and extended by the exact
    symmetries x(m + 2*pi) = x(m) + 2*pi and x(2*pi - m) = 2*pi - x(m).
    """
    m_total = 4.0 * math.pi * np.asarray(u, dtype=np.float64)
    k = np.floor(m_total / TWO_PI)
    t = m_total - TWO_PI * k
    upper = t > math.pi
    x_core = _core_inverse(np.where(upper, TWO_PI - t, t))
    x = np.where(upper, TWO_PI - x_core, x_core) + TWO_PI * k
    return np.minimum(0.5 * x, np.nextafter(TWO_PI, 0.0))


@dataclass(frozen=True)
class DetectorModel:
    """Per-side efficiencies, uniform background fraction and the product of
    the two reconstructed branching fractions."""

    eta_1: float = 1.0
    eta_2: float = 1.0
    background_fraction: float = 0.0
    br_weight: float = 1.0

    def __post_init__(self):
        for name in ("eta_1", "eta_2", "background_fraction", "br_weight"):
            value = float(getattr(self, name))
            if not (0.0 <= value <= 1.0) or not math.isfinite(value):
                raise ValueError(f"{name} must be in [0, 1], got {value}")
            object.__setattr__(self, name, value)

    def side_detection_probability(self, side: int) -> float:
        """Bernoulli probability that one side is reconstructed.

        br_weight is the product of both branching fractions, so each side
        carries sqrt(br_weight); coincidences then scale with br_weight once.
        """
        eta = self.eta_1 if side == 1 else self.eta_2
        return eta * math.sqrt(self.br_weight)


@dataclass(frozen=True)
class KinematicsConfig:
    """Masses (GeV) of the parent and of each vector meson."""

    m_parent: float = 2.980
    m_vector: float = 1.019461

    def __post_init__(self):
        for name in ("m_parent", "m_vector"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be positive and finite")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class TwoBodyBeta:
    beta: float
    space_like_ok: bool


def two_body_beta(kin: KinematicsConfig) -> TwoBodyBeta:
    """Vector-meson speed beta = sqrt(1 - 4 m_V^2 / m_parent^2) and whether it
    clears the space-like-separation lower bound 0.59."""
    if kin.m_parent <= 2.0 * kin.m_vector:
        raise BelowThreshold(
            f"m_parent {kin.m_parent} GeV is not above 2*m_vector {2 * kin.m_vector} GeV"
        )
    beta = math.sqrt(1.0 - 4.0 * kin.m_vector**2 / kin.m_parent**2)
    return TwoBodyBeta(beta=beta, space_like_ok=beta > SPACE_LIKE_BETA_MIN)


def effective_statistics(n_produced: int, det: DetectorModel) -> float:
    """Expected fully reconstructed coincidences: n * br_weight * eta1 * eta2."""
    return float(n_produced) * det.br_weight * det.eta_1 * det.eta_2


@dataclass(frozen=True)
class EventRecord:
    """One simulated decay: plane angle, per-side detection, truth tag."""

    phi: float
    detected_1: bool
    detected_2: bool
    is_background: bool


class EventSample(Sequence):
    """Immutable column-oriented event collection.

    Behaves as a sequence of :class:`EventRecord` while keeping numpy arrays
    underneath so million-event estimators stay fast.
    """

    def __init__(
        self,
        phi: np.ndarray,
        detected_1: np.ndarray,
        detected_2: np.ndarray,
        is_background: np.ndarray,
    ):
        self.phi = np.asarray(phi, dtype=np.float64)
        self.detected_1 = np.asarray(detected_1, dtype=bool)
        self.detected_2 = np.asarray(detected_2, dtype=bool)
        self.is_background = np.asarray(is_background, dtype=bool)
        sizes = {a.size for a in (self.phi, self.detected_1, self.detected_2, self.is_background)}
        if len(sizes) != 1:
            raise ValueError("event columns have mismatched lengths")
        if self.phi.size and (self.phi.min() < 0.0 or self.phi.max() >= TWO_PI):
            raise ValueError("phi must lie in [0, 2*pi)")
        for arr in (self.phi, self.detected_1, self.detected_2, self.is_background):
            arr.setflags(write=False)

    @classmethod
    def from_records(cls, records: Iterable[EventRecord]) -> "EventSample":
        records = list(records)
        return cls(
            np.array([r.phi for r in records], dtype=np.float64),
            np.array([r.detected_1 for r in records], dtype=bool),
            np.array([r.detected_2 for r in records], dtype=bool),
            np.array([r.is_background for r in records], dtype=bool),
        )

    def __len__(self) -> int:
        return int(self.phi.size)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return EventSample(
                self.phi[index],
                self.detected_1[index],
                self.detected_2[index],
                self.is_background[index],
            )
        return EventRecord(
            phi=float(self.phi[index]),
            detected_1=bool(self.detected_1[index]),
            detected_2=bool(self.detected_2[index]),
            is_background=bool(self.is_background[index]),
        )

    @property
    def coincidence_mask(self) -> np.ndarray:
        return self.detected_1 & self.detected_2


def _as_sample(events) -> EventSample:
    if isinstance(events, EventSample):
        return events
    return EventSample.from_records(events)


def generate_events(
    n: int, det: DetectorModel | None = None, seed: int = 0, workers: int = 1
) -> EventSample:
    """Simulate ``n`` decays with the given detector model.

    Signal angles follow sin^2(phi)/pi (drawn by CDF inversion), background
    angles are uniform, and each side is reconstructed independently.
    Randomness comes from numpy's Philox (4x64, 10 rounds) counter-based
    generator; worker ``w`` of ``workers`` handles a contiguous index range
    with its own stream keyed by (seed, w) and draws, in order, the
    background flags, the angles, then the two detection flags.  Identical
    (seed, n, workers) therefore reproduce bit-identical samples.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a non-negative 64-bit integer")
    det = det or DetectorModel()

    base = n // workers
    remainder = n % workers
    chunks = [base + (1 if w < remainder else 0) for w in range(workers)]

    phi_parts, d1_parts, d2_parts, bg_parts = [], [], [], []
    for w, count in enumerate(chunks):
        if count == 0:
            continue
        rng = np.random.Generator(
            np.random.Philox(key=np.array([seed, w], dtype=np.uint64))
        )
        u_bg = rng.random(count)
        u_phi = rng.random(count)
        u_d1 = rng.random(count)
        u_d2 = rng.random(count)

        is_bg = u_bg < det.background_fraction
        phi = np.where(is_bg, TWO_PI * u_phi, _invert_signal_cdf(u_phi))
        phi_parts.append(phi)
        bg_parts.append(is_bg)
        d1_parts.append(u_d1 < det.side_detection_probability(1))
        d2_parts.append(u_d2 < det.side_detection_probability(2))

    return EventSample(
        np.concatenate(phi_parts),
        np.concatenate(d1_parts),
        np.concatenate(d2_parts),
        np.concatenate(bg_parts),
    )


@dataclass(frozen=True)
class HistogramEstimate:
    """Density-normalized histogram of the plane angle for detected events.

    p_hat = kappa * count / (N * bin_width) per half-open bin, with Poisson
    errors; N is the number of detected coincidences, so the p_hat values
    integrate to kappa exactly.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    p_hat: np.ndarray
    stat_err: np.ndarray
    kappa: float

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def bin_index(self, phi: float) -> int:
        return int(math.floor((phi % TWO_PI) / self.bin_width))

    def value_at(self, phi: float) -> tuple[float, float]:
        idx = self.bin_index(phi)
        return float(self.p_hat[idx]), float(self.stat_err[idx])

    def to_dict(self) -> dict:
        return {
            "bin_edges": [float(v) for v in self.bin_edges],
            "counts": [int(v) for v in self.counts],
            "p_hat": [float(v) for v in self.p_hat],
            "stat_err": [float(v) for v in self.stat_err],
            "kappa": self.kappa,
        }


def estimate_probability(events, bin_width: float = TWO_PI / DEFAULT_BIN_COUNT) -> HistogramEstimate:
    """Histogram estimator of the joint probability versus plane angle."""
    sample = _as_sample(events)
    n_bins_float = TWO_PI / bin_width
    n_bins = round(n_bins_float)
    if n_bins < 1 or abs(TWO_PI - n_bins * bin_width) > 1e-9:
        raise ValueError(f"bin_width {bin_width} does not divide 2*pi within 1e-9")
    phis = sample.phi[sample.coincidence_mask]
    if phis.size == 0:
        raise NoData("no detected coincidences in the event sample")
    edges = np.linspace(0.0, TWO_PI, n_bins + 1)
    counts, _ = np.histogram(phis, bins=edges)
    n_detected = int(phis.size)
    kappa = derive_kappa()
    scale = kappa / (n_detected * bin_width)
    p_hat = counts * scale
    stat_err = np.sqrt(counts) * scale
    return HistogramEstimate(
        bin_edges=edges, counts=counts, p_hat=p_hat, stat_err=stat_err, kappa=kappa
    )


def _window_count(phis: np.ndarray, center: float, width: float) -> int:
    lo = (center - 0.5 * width) % TWO_PI
    hi = (lo + width) % TWO_PI
    if lo < hi:
        return int(np.count_nonzero((phis >= lo) & (phis < hi)))
    return int(np.count_nonzero((phis >= lo) | (phis < hi)))


def ch_from_events(
    events,
    settings: tuple[float, float, float, float],
    det: DetectorModel | None = None,
    window: float = DEFAULT_CH_WINDOW,
) -> InequalityReport:
    """Event-based CH evaluation at passive (relative-angle) settings.

    The four joint terms are read from the angle histogram in windows
    centered on the setting differences; the singles are the analytic 1/2
    per side.  Because decay directions cannot be chosen, only this
    restricted class of local models is being tested.  The reported value is
    efficiency-scaled,

        S = eta1*eta2*(joint combination) - (eta1 + eta2)/2,

    so branching fractions thin the sample but do not change S.
    """
    det = det or DetectorModel()
    t1, t1p, t2, t2p = (float(v) for v in settings)
    diffs = [
        ("P(n1,n2)", t2 - t1, 1.0),
        ("P(n1,n2')", t2p - t1, -1.0),
        ("P(n1',n2)", t2 - t1p, 1.0),
        ("P(n1',n2')", t2p - t1p, 1.0),
    ]
    # The four joints must come from disjoint histogram windows so their
    # Poisson errors are independent.
    reduced = [d % TWO_PI for _, d, _ in diffs]
    for a in range(len(reduced)):
        for b in range(a + 1, len(reduced)):
            gap = abs(reduced[a] - reduced[b])
            if min(gap, TWO_PI - gap) < window - 1e-12:
                raise ValueError(
                    "settings must give four distinct angle differences "
                    "(mod 2*pi), separated by at least one window width"
                )

    sample = _as_sample(events)
    phis = sample.phi[sample.coincidence_mask]
    if phis.size == 0:
        raise NoData("no detected coincidences in the event sample")
    n_detected = int(phis.size)
    kappa = derive_kappa()
    scale = kappa / (n_detected * window)

    terms, errors, signs = [], [], []
    for label, diff, sign in diffs:
        center = diff % TWO_PI
        count = _window_count(phis, center, window)
        if count == 0:
            raise InsufficientStatistics(
                f"empty histogram window for {label} at phi={center:.6f} "
                f"(width {window:.6f})",
                bin_phi=center,
                bin_width=window,
            )
        terms.append((label, count * scale))
        errors.append(math.sqrt(count) * scale)
        signs.append(sign)

    joint = sum(sign * value for sign, (_, value) in zip(signs, terms))
    joint_err = math.sqrt(sum(e * e for e in errors))
    singles_1 = 0.5 * det.eta_1
    singles_2 = 0.5 * det.eta_2
    value = det.eta_1 * det.eta_2 * joint - (singles_1 + singles_2)
    stat_err = det.eta_1 * det.eta_2 * joint_err

    terms += [("P(n1')", singles_1), ("P(n2)", singles_2)]
    errors += [0.0, 0.0]
    return make_report(terms, value, term_errors=errors, stat_err=stat_err)


@lru_cache(maxsize=1)
def _max_joint_combination() -> float:
    """Maximum of the signed joint combination over settings: 1 + max CH value."""
    _, best = maximize_ch_vv(refine_tol=1e-10)
    return best + 1.0


def max_s_of_eta(eta: float, joint_max: float | None = None) -> float:
    """Largest reachable efficiency-scaled CH value at symmetric efficiency."""
    c = _max_joint_combination() if joint_max is None else float(joint_max)
    return eta * eta * c - eta


def efficiency_threshold(search_tol: float = 1e-9, joint_max: float | None = None) -> float:
    """Smallest symmetric efficiency at which the CH test can still violate.

    Bisection on eta of max_S(eta) = eta^2 * C - eta with C the
    setting-optimized joint combination; analytically 2(sqrt(2)-1) for the
    transverse state.  Capping the joints at the classical bound (C <= 1)
    makes violation impossible, reported as threshold 1.0.
    """
    if search_tol < 1e-9:
        raise ValueError("search_tol must be >= 1e-9")
    c = _max_joint_combination() if joint_max is None else float(joint_max)
    if c <= 1.0:
        return 1.0
    lo, hi = 1e-6, 1.0  # S(lo) < 0 and S(1) = C - 1 > 0
    while hi - lo > search_tol:
        mid = 0.5 * (lo + hi)
        if max_s_of_eta(mid, c) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


CSV_HEADER = ["event_id", "phi", "detected_1", "detected_2", "is_background"]


def write_events_csv(events, path) -> None:
    """Write the append-only, order-significant event file."""
    sample = _as_sample(events)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i in range(len(sample)):
            writer.writerow(
                [
                    i,
                    f"{sample.phi[i]:.9g}",
                    int(sample.detected_1[i]),
                    int(sample.detected_2[i]),
                    int(sample.is_background[i]),
                ]
            )


def read_events_csv(path) -> EventSample:
    """Read an event file, enforcing the header and strictly increasing ids."""
    path = Path(path)
    phis, d1, d2, bg = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected event file header {header} in {path}")
        expected_id = 0
        for row in reader:
            if int(row[0]) != expected_id:
                raise ValueError(
                    f"event_id {row[0]} out of order in {path} (expected {expected_id})"
                )
            expected_id += 1
            phis.append(float(row[1]))
            d1.append(bool(int(row[2])))
            d2.append(bool(int(row[3])))
            bg.append(bool(int(row[4])))
    return EventSample(
        np.array(phis, dtype=np.float64),
        np.array(d1, dtype=bool),
        np.array(d2, dtype=bool),
        np.array(bg, dtype=bool),
    )
