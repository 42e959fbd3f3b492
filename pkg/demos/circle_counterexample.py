"""Why not just run consensus on angles?  Because it can stall.

Twenty all-to-all coupled oscillators started evenly around the circle
never synchronize: every pull is canceled by a symmetric partner.
Start the same network inside an open semicircle and it snaps together
exponentially.  This is the failure mode that motivates estimating
orientations through auxiliary vectors instead of averaging them
directly.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from oriform import DiGraph, OscillatorState, evenly_spaced_angles, run_circle

n = 20
g = DiGraph(n, [(i, j, 1.0) for i in range(n) for j in range(n) if i != j])

even = OscillatorState(evenly_spaced_angles(n))
traj_even, rep_even = run_circle(even, g, horizon=20.0, dt=0.001,
                                 record_every=100)

rng = np.random.default_rng(5)
semi = OscillatorState(rng.uniform(0.2, 2.9, n))
traj_semi, rep_semi = run_circle(semi, g, horizon=20.0, dt=0.001,
                                 record_every=100)

print(f"evenly spaced : synchronized={rep_even['synchronized']}, "
      f"min spread {rep_even['min_spread']:.3f} (>= pi/2)")
print(f"semicircle    : synchronized={rep_semi['synchronized']}, "
      f"final spread {rep_semi['final_spread']:.2e}")

fig, axes = plt.subplots(1, 2, figsize=(11, 4), sharey=True)
axes[0].plot(traj_even.times, rep_even["spreads"])
axes[0].axhline(np.pi / 2, ls="--", color="r", label=r"$\pi/2$")
axes[0].set_title("evenly spaced: stuck")
axes[0].set_xlabel("time")
axes[0].set_ylabel("max pairwise angular distance")
axes[0].legend()

axes[1].plot(traj_semi.times, rep_semi["spreads"])
axes[1].set_title("semicircle start: synchronizes")
axes[1].set_xlabel("time")

fig.tight_layout()
plt.savefig("circle_counterexample.png", dpi=120)
print("wrote circle_counterexample.png")
