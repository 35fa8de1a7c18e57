"""The TBB1 composite transfer and its robustness to pulse-area errors.

The broadband Wimperis sequence, lifted to the three-level system, performs
|0> -> |D> with four resonant pulses.  A deliberate 25% amplitude error
barely dents the transfer, while a bare pi/2 pulse loses 1.5% fidelity at
an 8% area error.
"""

import numpy as np

from spinlift import (
    IntegratorConfig,
    NOMINAL_ADIABATIC,
    bb1_sequence,
    composite_method,
    lift_schedule,
    named_state,
    propagate,
    run_tbb1,
    sweep_pulse_area,
)

omega0 = NOMINAL_ADIABATIC.omega0
seq = bb1_sequence()
print("TBB1 rotations (theta, phi), applied first to last:")
for theta, phi in seq.rotations:
    print(f"  theta = {theta / np.pi:4.2f} pi   phi = {phi % (2 * np.pi):.3f} rad")
sched = composite_method(seq, omega0)
print("pulse lengths (us):",
      [f"{s.duration * 1e6:.1f}" for s in sched.segments])

# --- transfer with and without a deliberate amplitude error -----------------
for delta_omega in (0.0, -2 * np.pi * 10e3):
    rep = run_tbb1(delta_omega)
    frac = delta_omega / omega0
    print(f"\namplitude error {100 * frac:+.0f}%:"
          f"  final |<D|psi>|^2 = {rep.outputs['final_fidelity_to_dark']:.6f}")

# --- pulse-area sweep: composite vs bare pulse -------------------------------
areas = np.linspace(0.7, 1.3, 61)
single = sweep_pulse_area("single", areas)
tbb1 = sweep_pulse_area("tbb1", areas)
band = (areas >= 0.92) & (areas <= 1.08)
print(f"\nworst infidelity over areas 0.92..1.08:")
print(f"  single pulse: {np.max(1 - single['fidelity_to_dark'][band]):.3e}")
print(f"  TBB1:         {np.max(1 - tbb1['fidelity_to_dark'][band]):.3e}")

# --- time-resolved population transfer for the mis-set case -----------------
noise_sched = composite_method(seq, omega0, protect=True)
drive = lift_schedule(noise_sched, 3)
times = np.linspace(0, noise_sched.total_duration, 301)
traj = propagate(drive, named_state(3, "0"), IntegratorConfig(), times)

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(traj.times * 1e6, traj.p_f1)
    axes[0].set_xlabel("time (us)")
    axes[0].set_ylabel("P(F=1)")
    axes[0].set_title("TBB1 transfer")
    axes[1].plot(areas, single["p_f1"], label="single pulse")
    axes[1].plot(areas, tbb1["p_f1"], label="TBB1")
    axes[1].set_xlabel("normalized pulse area")
    axes[1].set_ylabel("final P(F=1)")
    axes[1].legend()
    fig.tight_layout()
    fig.savefig("demo_composite_robustness.png", dpi=120)
    print("\nwrote demo_composite_robustness.png")
except ImportError:
    print("\nmatplotlib not available; skipped plots")
