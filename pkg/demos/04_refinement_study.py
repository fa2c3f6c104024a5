# Refinement studies: observed rates, written as CSV (plus a plot if matplotlib is around).
import sys

from gdm_obstacle.study import run_study, write_csv, write_metadata

runs = [
    ("fd1d", "no-contact-1d", [16, 32, 64, 128, 256]),
    ("hermite1d", "no-contact-1d", [8, 16, 32, 64]),
    ("fd2d", "no-contact-2d", [8, 16, 32]),
    ("fd1d", "contact-1d", [16, 32, 64, 128]),
]
results = {}
for scheme, pid, levels in runs:
    res = run_study(scheme, pid, levels)
    results[scheme, pid] = res
    print(f"\n{scheme} / {pid}  ({res.metadata['reference']})")
    print(f"{'n':>5s} {'e_pi':>10s} {'e_grad':>10s} {'e_lap':>10s} {'rate_pi':>8s} {'rate_lap':>8s}")
    for r in res.rows:
        print(f"{r['n']:5d} {r['e_pi']:10.3e} {r['e_grad']:10.3e} {r['e_lap']:10.3e}"
              f" {r['rate_pi']:8.3f} {r['rate_lap']:8.3f}")

if len(sys.argv) > 1:
    out = sys.argv[1]
    res = results["hermite1d", "no-contact-1d"]
    write_csv(res, out)
    write_metadata(res, out + ".meta.json")
    print("wrote", out)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit(0)

fig, ax = plt.subplots()
for (scheme, pid), res in results.items():
    if pid.startswith("no-contact"):
        ax.loglog(res.column("h"), res.column("e_lap"), "o-", label=f"{scheme} Lap error")
        ax.loglog(res.column("h"), res.column("e_pi"), "s--", label=f"{scheme} L2 error")
ax.set_xlabel("h")
ax.legend()
fig.savefig("refinement.png", dpi=120)
print("saved refinement.png")
