"""Two-level control schedules and their lift to d-level drive specifications.

A schedule is a continuous-time description of the effective two-level
control vector (Omega_half(t), chi(t), delta_half(t)); no sample grid is
baked in, the integrator picks its own.  Physical three-level field values
follow the dressing convention: per-field Rabi frequency
Omega(t) = sqrt(2) * Omega_half(t), field phases +/- chi(t), and the
field-detuning bookkeeping value delta(t) = 2 * delta_half(t).

All frequencies are angular (rad/s) in memory; the JSON serialization uses
plain Hz (value / 2 pi) and seconds, converted at the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .spin import DimensionError, angular_momentum_ops

__all__ = [
    "ScheduleError",
    "blackman_detuning",
    "blackman_rabi",
    "lab_frame_chirp",
    "lab_frame_chirp_initial",
    "RotationSegment",
    "HoldSegment",
    "ConstantSegment",
    "BlackmanTransferSegment",
    "GainWrappedSegment",
    "with_gain_curve",
    "ControlSchedule",
    "AdiabaticParams",
    "CompositeSequence",
    "bb1_sequence",
    "adiabatic_method",
    "composite_method",
    "square_pulse",
    "TransitionDrive",
    "MultiLevelDrive",
    "lift_schedule",
    "schedule_to_json",
    "schedule_from_json",
    "save_schedule",
    "load_schedule",
]

TWO_PI = 2.0 * np.pi


class ScheduleError(ValueError):
    """Raised for invalid schedule parameters or out-of-domain sampling."""


# ---------------------------------------------------------------------------
# Blackman amplitude / chirp profiles
# ---------------------------------------------------------------------------

def blackman_detuning(t, delta0: float, t_delta: float):
    """Blackman detuning chirp from delta0 down to 0 over the chirp time t_delta.

    delta(t) = (delta0/50) * (21 + 25 cos(pi t / t_delta) + 4 cos(2 pi t / t_delta))
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > t_delta):
        raise ScheduleError(f"detuning chirp sampled outside [0, {t_delta}]")
    x = np.pi * t / t_delta
    out = delta0 / 50.0 * (21.0 + 25.0 * np.cos(x) + 4.0 * np.cos(2 * x))
    return out if out.ndim else float(out)


def blackman_rabi(t, omega0: float, t_omega: float):
    """Blackman amplitude ramp from 0 up to omega0, then constant at omega0.

    Omega(t) = (omega0/50) * (29 - 25 cos(pi t / t_omega) - 4 cos(2 pi t / t_omega))
    for t <= t_omega; Omega = omega0 afterwards.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ScheduleError("amplitude ramp sampled at negative time")
    tc = np.minimum(t, t_omega)
    x = np.pi * tc / t_omega
    out = omega0 / 50.0 * (29.0 - 25.0 * np.cos(x) - 4.0 * np.cos(2 * x))
    return out if out.ndim else float(out)


def lab_frame_chirp(t, delta0: float, t_delta: float):
    """Lab-frame frequency offset profile whose instantaneous detuning is the
    Blackman chirp: Delta(t) = (1/t) * integral_0^t delta(tau) dtau.

    Defined for 0 < t <= t_delta; the t -> 0+ limit is delta0 (see
    lab_frame_chirp_initial).  Satisfies d(Delta(t) * t)/dt = delta(t).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t > t_delta):
        raise ScheduleError(f"lab-frame chirp defined on (0, {t_delta}]")
    x = np.pi * t / t_delta
    out = delta0 / (50.0 * t) * (
        21.0 * t + (t_delta / np.pi) * (25.0 * np.sin(x) + 2.0 * np.sin(2 * x))
    )
    return out if out.ndim else float(out)


def lab_frame_chirp_initial(delta0: float) -> float:
    """The t -> 0+ limit of lab_frame_chirp, equal to delta0."""
    return float(delta0)


# ---------------------------------------------------------------------------
# Schedule segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RotationSegment:
    """Resonant constant-phase pulse driving a rotation R(theta, phi).

    omega0 is the per-field three-level Rabi frequency, so the effective
    two-level amplitude is omega0/sqrt(2) and the duration satisfies
    omega0 * duration / sqrt(2) = theta.
    """

    theta: float
    phi: float
    omega0: float
    amplitude_scale: float = 1.0

    kind = "rotation"
    is_constant = True

    def __post_init__(self):
        if self.theta < 0:
            raise ScheduleError(f"rotation angle must be >= 0, got {self.theta}")
        if self.omega0 <= 0:
            raise ScheduleError(f"omega0 must be > 0, got {self.omega0}")

    @property
    def duration(self) -> float:
        return np.sqrt(2.0) * self.theta / self.omega0

    def controls(self, t):
        t = np.asarray(t, dtype=float)
        omega_half = np.full(t.shape, self.amplitude_scale * self.omega0 / np.sqrt(2.0))
        chi = np.full(t.shape, self.phi)
        delta_half = np.zeros(t.shape)
        return omega_half, chi, delta_half

    def params(self) -> dict:
        return {
            "theta_rad": self.theta,
            "phi_rad": self.phi,
            "omega0_hz": self.omega0 / TWO_PI,
            "amplitude_scale": self.amplitude_scale,
        }

    @classmethod
    def from_params(cls, p: dict) -> "RotationSegment":
        return cls(p["theta_rad"], p["phi_rad"], p["omega0_hz"] * TWO_PI,
                   p.get("amplitude_scale", 1.0))


@dataclass(frozen=True)
class HoldSegment:
    """Resonant constant field left on to protect the dark state (chi = 0 by default)."""

    duration: float
    omega0: float
    chi: float = 0.0
    amplitude_scale: float = 1.0

    kind = "hold"
    is_constant = True

    def __post_init__(self):
        if self.duration < 0:
            raise ScheduleError(f"hold duration must be >= 0, got {self.duration}")

    def controls(self, t):
        t = np.asarray(t, dtype=float)
        omega_half = np.full(t.shape, self.amplitude_scale * self.omega0 / np.sqrt(2.0))
        chi = np.full(t.shape, self.chi)
        delta_half = np.zeros(t.shape)
        return omega_half, chi, delta_half

    def params(self) -> dict:
        return {
            "duration_s": self.duration,
            "omega0_hz": self.omega0 / TWO_PI,
            "chi_rad": self.chi,
            "amplitude_scale": self.amplitude_scale,
        }

    @classmethod
    def from_params(cls, p: dict) -> "HoldSegment":
        return cls(p["duration_s"], p["omega0_hz"] * TWO_PI, p.get("chi_rad", 0.0),
                   p.get("amplitude_scale", 1.0))


@dataclass(frozen=True)
class ConstantSegment:
    """Generic constant-control segment (Omega_half, chi, delta_half fixed)."""

    duration: float
    omega_half: float
    chi: float = 0.0
    delta_half: float = 0.0
    amplitude_scale: float = 1.0

    kind = "constant"
    is_constant = True

    def __post_init__(self):
        if self.duration < 0:
            raise ScheduleError(f"duration must be >= 0, got {self.duration}")
        if self.omega_half < 0:
            raise ScheduleError(f"omega_half must be >= 0, got {self.omega_half}")

    def controls(self, t):
        t = np.asarray(t, dtype=float)
        return (np.full(t.shape, self.amplitude_scale * self.omega_half),
                np.full(t.shape, self.chi),
                np.full(t.shape, self.delta_half))

    def params(self) -> dict:
        return {
            "duration_s": self.duration,
            "omega_half_hz": self.omega_half / TWO_PI,
            "chi_rad": self.chi,
            "delta_half_hz": self.delta_half / TWO_PI,
            "amplitude_scale": self.amplitude_scale,
        }

    @classmethod
    def from_params(cls, p: dict) -> "ConstantSegment":
        return cls(p["duration_s"], p["omega_half_hz"] * TWO_PI, p.get("chi_rad", 0.0),
                   p.get("delta_half_hz", 0.0) * TWO_PI, p.get("amplitude_scale", 1.0))


@dataclass(frozen=True)
class BlackmanTransferSegment:
    """One leg of the adiabatic transfer: Blackman amplitude ramp inside a
    Blackman detuning chirp (chi = 0).  reverse=True time-mirrors the leg."""

    omega0: float
    delta0: float
    t_omega: float
    t_delta: float
    reverse: bool = False
    amplitude_scale: float = 1.0

    kind = "blackman_transfer"
    is_constant = False

    def __post_init__(self):
        if not (0 < self.t_omega <= self.t_delta):
            raise ScheduleError(
                f"need 0 < t_omega <= t_delta, got t_omega={self.t_omega}, t_delta={self.t_delta}")
        if self.omega0 <= 0 or self.delta0 <= 0:
            raise ScheduleError("omega0 and delta0 must be > 0")

    @property
    def duration(self) -> float:
        return self.t_delta

    def controls(self, t):
        t = np.asarray(t, dtype=float)
        tt = self.t_delta - t if self.reverse else t
        tt = np.clip(tt, 0.0, self.t_delta)  # guard rounding at the edges
        omega_half = self.amplitude_scale * blackman_rabi(tt, self.omega0, self.t_omega) / np.sqrt(2.0)
        chi = np.zeros(t.shape)
        delta_half = blackman_detuning(tt, self.delta0, self.t_delta) / 2.0
        return omega_half, chi, delta_half

    def params(self) -> dict:
        return {
            "omega0_hz": self.omega0 / TWO_PI,
            "delta0_hz": self.delta0 / TWO_PI,
            "t_omega_s": self.t_omega,
            "t_delta_s": self.t_delta,
            "reverse": self.reverse,
            "amplitude_scale": self.amplitude_scale,
        }

    @classmethod
    def from_params(cls, p: dict) -> "BlackmanTransferSegment":
        return cls(p["omega0_hz"] * TWO_PI, p["delta0_hz"] * TWO_PI,
                   p["t_omega_s"], p["t_delta_s"], p["reverse"],
                   p.get("amplitude_scale", 1.0))


@dataclass(frozen=True)
class GainWrappedSegment:
    """Segment with a monotone gain curve applied to its Rabi amplitude.

    Models amplifier compression as an optional transform on Omega(t)
    (off by default everywhere); the curve maps the per-field amplitude
    sqrt(2) * Omega_half to the delivered amplitude.  In-memory only: gain
    curves are arbitrary callables and are not serialized.
    """

    segment: object
    gain_curve: Callable

    @property
    def kind(self):
        return f"gain_wrapped({self.segment.kind})"

    @property
    def is_constant(self):
        return self.segment.is_constant

    @property
    def duration(self) -> float:
        return self.segment.duration

    def controls(self, t):
        omega_half, chi, delta_half = self.segment.controls(t)
        omega = np.asarray(self.gain_curve(np.sqrt(2.0) * np.asarray(omega_half)))
        return omega / np.sqrt(2.0), chi, delta_half

    def params(self):
        raise ScheduleError("gain-wrapped schedules are not serializable")


def with_gain_curve(s: ControlSchedule, gain_curve: Callable) -> ControlSchedule:
    """Apply a monotone amplifier gain curve to every segment's amplitude."""
    return ControlSchedule([GainWrappedSegment(seg, gain_curve) for seg in s.segments])


_SEGMENT_KINDS = {
    "rotation": RotationSegment,
    "hold": HoldSegment,
    "constant": ConstantSegment,
    "blackman_transfer": BlackmanTransferSegment,
}


# ---------------------------------------------------------------------------
# ControlSchedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControlSchedule:
    """Ordered list of segments; the first segment is applied first in time.

    controls(t) samples (Omega_half, chi, delta_half) for any t in
    [0, total_duration]; a time exactly on a boundary belongs to the later
    segment (the final boundary belongs to the last segment).
    """

    segments: tuple

    def __init__(self, segments: Sequence):
        object.__setattr__(self, "segments", tuple(segments))

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def boundaries(self) -> np.ndarray:
        """Cumulative segment boundaries including 0 and total_duration."""
        durs = np.array([s.duration for s in self.segments], dtype=float)
        return np.concatenate([[0.0], np.cumsum(durs)])

    def controls(self, t):
        """Sample (Omega_half(t), chi(t), delta_half(t)) at scalar or array t."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        total = self.total_duration
        if t_arr.size and (t_arr.min() < -1e-15 or t_arr.max() > total * (1 + 1e-12) + 1e-15):
            raise ScheduleError(
                f"sample time outside [0, {total}]: range [{t_arr.min()}, {t_arr.max()}]")
        if not self.segments:
            zeros = np.zeros(t_arr.shape)
            out = (zeros, zeros.copy(), zeros.copy())
        else:
            bounds = self.boundaries
            idx = np.searchsorted(bounds, t_arr, side="right") - 1
            idx = np.clip(idx, 0, len(self.segments) - 1)
            omega = np.empty(t_arr.shape)
            chi = np.empty(t_arr.shape)
            delta = np.empty(t_arr.shape)
            for k in range(len(self.segments)):
                sel = idx == k
                if not np.any(sel):
                    continue
                local = np.clip(t_arr[sel] - bounds[k], 0.0, self.segments[k].duration)
                o, c, dl = self.segments[k].controls(local)
                omega[sel], chi[sel], delta[sel] = o, c, dl
            out = (omega, chi, delta)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return tuple(float(x[0]) for x in out)
        return out

    def scaled_amplitude(self, factor: float) -> "ControlSchedule":
        """Same schedule with every Rabi amplitude multiplied by factor."""
        from dataclasses import replace
        return ControlSchedule(
            [replace(s, amplitude_scale=s.amplitude_scale * factor) for s in self.segments])

    def __eq__(self, other):
        return isinstance(other, ControlSchedule) and self.segments == other.segments


# ---------------------------------------------------------------------------
# Adiabatic method
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdiabaticParams:
    """Parameters for the Blackman chirped transfer.

    omega0: peak per-field three-level Rabi frequency (rad/s)
    delta0: initial three-level detuning (rad/s)
    t_omega / t_delta: amplitude ramp and detuning chirp times (s)
    t_hold: time spent holding the dark state between legs (s)
    direction: "forward" | "reverse" | "round-trip"
    """

    omega0: float
    delta0: float
    t_omega: float
    t_delta: float
    t_hold: float = 0.0
    direction: str = "round-trip"

    def __post_init__(self):
        if not (0 < self.t_omega <= self.t_delta):
            raise ScheduleError(
                f"need 0 < t_omega <= t_delta, got {self.t_omega}, {self.t_delta}")
        if self.omega0 <= 0 or self.delta0 <= 0:
            raise ScheduleError("omega0 and delta0 must be > 0")
        if self.t_hold < 0:
            raise ScheduleError(f"t_hold must be >= 0, got {self.t_hold}")
        if self.direction not in ("forward", "reverse", "round-trip"):
            raise ScheduleError(f"unknown direction {self.direction!r}")


def adiabatic_method(p: AdiabaticParams) -> ControlSchedule:
    """Chirped-Blackman transfer schedule: forward leg ramps the field on
    while chirping the detuning to zero (|0> -> |D>); the reverse leg is the
    time mirror; round-trip is forward + hold + reverse."""
    fwd = BlackmanTransferSegment(p.omega0, p.delta0, p.t_omega, p.t_delta)
    rev = BlackmanTransferSegment(p.omega0, p.delta0, p.t_omega, p.t_delta, reverse=True)
    hold = HoldSegment(p.t_hold, p.omega0)
    if p.direction == "forward":
        segs = [fwd] if p.t_hold == 0 else [fwd, hold]
    elif p.direction == "reverse":
        segs = [rev]
    else:
        segs = [fwd, hold, rev] if p.t_hold > 0 else [fwd, rev]
    return ControlSchedule(segs)


# ---------------------------------------------------------------------------
# Composite method
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompositeSequence:
    """Ordered resonant rotations (theta_R, phi_R); first entry is applied
    first in time (note: written as an operator product they compose
    right-to-left)."""

    rotations: tuple

    def __init__(self, rotations: Sequence):
        rots = tuple((float(th), float(ph)) for th, ph in rotations)
        for th, _ in rots:
            if th < 0:
                raise ScheduleError(f"rotation angle must be >= 0, got {th}")
        object.__setattr__(self, "rotations", rots)

    def inverse(self) -> "CompositeSequence":
        """The exact inverse sequence: reversed order, phases shifted by pi."""
        return CompositeSequence([(th, ph + np.pi) for th, ph in reversed(self.rotations)])


def bb1_sequence(theta: float = np.pi / 2, phi: float = np.pi / 2) -> CompositeSequence:
    """Wimperis broadband (BB1) sequence for a target rotation R(theta, phi):
    correction triplet first, nominal pulse last (time order)."""
    phi_w = np.arccos(-theta / (4 * np.pi))
    return CompositeSequence([
        (np.pi, phi + phi_w),
        (2 * np.pi, phi + 3 * phi_w),
        (np.pi, phi + phi_w),
        (theta, phi),
    ])


DEFAULT_PROTECT_DURATION = 20e-6


def composite_method(seq: CompositeSequence, omega0: float, protect: bool = False,
                     protect_duration: float = DEFAULT_PROTECT_DURATION) -> ControlSchedule:
    """One resonant segment per rotation: duration sqrt(2) * theta / omega0,
    chi = phi_R, delta = 0.  With protect=True a chi = 0 hold (the R(*, 0)
    protection field) is appended."""
    if omega0 <= 0:
        raise ScheduleError(f"omega0 must be > 0, got {omega0}")
    segs = [RotationSegment(th, ph, omega0) for th, ph in seq.rotations]
    if protect:
        segs.append(HoldSegment(protect_duration, omega0))
    return ControlSchedule(segs)


def square_pulse(theta: float, phi: float, omega0: float) -> ControlSchedule:
    """Single resonant pulse driving R(theta, phi)."""
    return composite_method(CompositeSequence([(theta, phi)]), omega0)


# ---------------------------------------------------------------------------
# Lift to d levels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionDrive:
    """Per-transition field record for one adjacent-m coupling."""

    lower_index: int
    upper_index: int
    rabi: Callable
    phase: Callable
    detuning: Callable


@dataclass(frozen=True)
class MultiLevelDrive:
    """A schedule lifted to d levels.

    hamiltonian(t) returns the rotating-frame Hamiltonian
    Omega_half cos(chi) Jx + Omega_half sin(chi) Jy + delta_half Jz
    (vectorized over t: shape (..., d, d)).

    The transitions list reports the physical per-field values.  For d = 3
    it follows the two-field dressing convention: both fields have Rabi
    frequency sqrt(2) * Omega_half, phases +/- chi and detunings
    +/- 2 * delta_half.  For other d the report is the generic ladder one
    derived from the Jx matrix elements: rabi_k = 2 (Jx)_{k,k+1} Omega_half,
    phase_k = chi, detuning_k = delta_half (for d = 2 this is exactly the
    single-field two-level record).
    """

    dim: int
    schedule: ControlSchedule
    transitions: tuple = field(init=False)

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise DimensionError(f"dimension must be an integer >= 2, got {self.dim!r}")
        ops = angular_momentum_ops(self.dim)
        sched = self.schedule
        trans = []
        for k in range(self.dim - 1):
            coupling = 2.0 * float(np.real(ops.jx[k, k + 1]))
            if self.dim == 3:
                sign = +1.0 if k == 0 else -1.0
                trans.append(TransitionDrive(
                    lower_index=k, upper_index=k + 1,
                    rabi=_scaled(sched, "omega", coupling),
                    phase=_scaled(sched, "chi", sign),
                    detuning=_scaled(sched, "delta", 2.0 * sign),
                ))
            else:
                trans.append(TransitionDrive(
                    lower_index=k, upper_index=k + 1,
                    rabi=_scaled(sched, "omega", coupling),
                    phase=_scaled(sched, "chi", 1.0),
                    detuning=_scaled(sched, "delta", 1.0),
                ))
        object.__setattr__(self, "transitions", tuple(trans))

    @property
    def total_duration(self) -> float:
        return self.schedule.total_duration

    @property
    def boundaries(self) -> np.ndarray:
        return self.schedule.boundaries

    @property
    def constant_segments(self) -> tuple:
        return tuple(s.is_constant for s in self.schedule.segments)

    def hamiltonian(self, t):
        ops = angular_momentum_ops(self.dim)
        omega, chi, delta = self.schedule.controls(np.asarray(t, dtype=float))
        omega = np.asarray(omega)[..., None, None]
        chi_a = np.asarray(chi)[..., None, None]
        delta = np.asarray(delta)[..., None, None]
        h = (omega * np.cos(chi_a) * ops.jx
             + omega * np.sin(chi_a) * ops.jy
             + delta * ops.jz)
        return h

    def control_peaks(self, n_probe: int = 512) -> float:
        """max over t of max(Omega, |delta|) (three-level field units), used
        for the default integrator step."""
        total = self.total_duration
        if total == 0:
            return 0.0
        probes = np.linspace(0.0, total, n_probe)
        probes = np.unique(np.concatenate([probes, self.boundaries,
                                           np.clip(self.boundaries - 1e-15, 0, total)]))
        omega, _, delta = self.schedule.controls(probes)
        return float(max(np.max(np.sqrt(2.0) * np.abs(omega)),
                         np.max(2.0 * np.abs(delta)), 0.0))


def _scaled(schedule: ControlSchedule, which: str, factor: float) -> Callable:
    idx = {"omega": 0, "chi": 1, "delta": 2}[which]
    def f(t):
        vals = schedule.controls(t)
        return factor * np.asarray(vals[idx])
    return f


def lift_schedule(s: ControlSchedule, d: int) -> MultiLevelDrive:
    """Lift a two-level control schedule to a d-level drive (same control vector)."""
    return MultiLevelDrive(dim=int(d), schedule=s)


# ---------------------------------------------------------------------------
# JSON serialization (Hz / seconds at the boundary)
# ---------------------------------------------------------------------------

def schedule_to_json(s: ControlSchedule) -> str:
    records = [{"kind": seg.kind, "duration_s": seg.duration, **seg.params()}
               for seg in s.segments]
    return json.dumps({"segments": records}, indent=2, sort_keys=True)


def schedule_from_json(text: str) -> ControlSchedule:
    doc = json.loads(text)
    segs = []
    for rec in doc["segments"]:
        kind = rec.get("kind")
        if kind not in _SEGMENT_KINDS:
            raise ScheduleError(f"unknown segment kind {kind!r}")
        segs.append(_SEGMENT_KINDS[kind].from_params(rec))
    return ControlSchedule(segs)


def save_schedule(s: ControlSchedule, path) -> None:
    with open(path, "w") as f:
        f.write(schedule_to_json(s))


def load_schedule(path) -> ControlSchedule:
    with open(path) as f:
        return schedule_from_json(f.read())
