"""Two-soliton collision: coarse GN and DVDM runs against a finer GN reference."""
import argparse

from zakharov.harness import ExperimentConfig, collision_comparison, emit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--reference-dt", type=float, default=0.025)
    ap.add_argument("--variant", type=int, choices=[0, 1], default=0)
    ap.add_argument("--out", default="results/collision")
    ap.add_argument("--format", choices=["csv", "json"], default="csv")
    args = ap.parse_args()
    ref = ExperimentConfig(scheme="GN", dt=args.reference_dt, collision=True, collision_variant=args.variant)
    reports = []
    for scheme in ("GN", "DVDM"):
        cfg = ExperimentConfig(scheme=scheme, dt=args.dt, collision=True, collision_variant=args.variant)
        rep = collision_comparison(cfg, ref)
        print(f"{scheme:4s} E0={rep.E0_energy:.3f} epsE={rep.epsE:.3f} epsN={rep.epsN:.3f} dE={rep.dE:.2e} "
              f"wall={rep.wall_time:.2f}s")
        reports.append(rep)
    for path in emit(reports, args.out, args.format, "collision"):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
