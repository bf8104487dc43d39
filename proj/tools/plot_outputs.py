#!/usr/bin/env python3
"""Quick-look plots of a blochcav output directory (needs matplotlib)."""

import argparse
import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


def plot_run(run: Path, out: Path):
    trace = run / "trace.csv"
    if not trace.exists():
        return
    t = read(trace)
    fig, ax = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    ax[0].plot(t["t"], [z / math.pi for z in t["centroid"]], lw=0.8)
    ax[0].set_ylabel("<z> (sites)")
    ax[1].plot(t["t"], t["depth"], lw=0.8)
    ax[1].set_ylabel("depth (E_r)")
    ax[2].plot(t["t"], t["C"], lw=0.8)
    ax[2].set_ylabel("C")
    ax[2].set_xlabel("t (1/omega_r)")
    fig.tight_layout()
    fig.savefig(out / f"{run.name}_trace.png", dpi=120)
    plt.close(fig)

    if (run / "spectrum.csv").exists():
        s = read(run / "spectrum.csv")
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogy(s["freq"], [max(p, 1e-30) for p in s["psd"]], lw=0.8)
        ax.set_xlabel("omega (omega_r)")
        ax.set_ylabel("PSD of alpha")
        fig.tight_layout()
        fig.savefig(out / f"{run.name}_spectrum.png", dpi=120)
        plt.close(fig)

    if (run / "loop.csv").exists():
        lp = read(run / "loop.csv")
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.plot([z / math.pi for z in lp["centroid"]], lp["force"], lw=0.6)
        ax.set_xlabel("<z> (sites)")
        ax.set_ylabel("<F_lattice>")
        fig.tight_layout()
        fig.savefig(out / f"{run.name}_loop.png", dpi=120)
        plt.close(fig)


def plot_velocity(root: Path, out: Path):
    v = read(root / "velocity.csv")
    if len(v.get("delta0", [])) < 2:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(v["delta0"], v["v_numeric"], "o", label="full model")
    ax.plot(v["delta0"], v["v_analytic"], "-", label="closed form")
    if any(not math.isnan(x) for x in v["v_ladder"]):
        ax.plot(v["delta0"], v["v_ladder"], "x", label="ladder")
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_xlabel("delta0 / kappa")
    ax.set_ylabel("drift (sites / period)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "velocity.png", dpi=120)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("dir", type=Path, help="output directory of `blochcav run`")
    parser.add_argument("--out", type=Path, help="where to put the PNGs (default: dir)")
    args = parser.parse_args()
    out = args.out or args.dir
    out.mkdir(parents=True, exist_ok=True)
    plot_velocity(args.dir, out)
    plot_run(args.dir, out)
    for sub in sorted(p for p in args.dir.iterdir() if p.is_dir()):
        plot_run(sub, out)


if __name__ == "__main__":
    main()
