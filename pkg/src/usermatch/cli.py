"""Command line entry point: ``usermatch <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path


from . import generators as gen
from . import io
from .evaluate import degree_breakdown, evaluate, write_breakdown_csv
from .experiment import REPORT_COLUMNS, BenchError, ConfigError, ExperimentConfig, run_bench, run_experiment
from .graph import GraphError
from .links import LinkError
from .matching import run_matching
from .perturb import CopyPair, add_sybils, affiliation_pair, cascade_pair, copy_independent, sample_seeds

log = logging.getLogger("usermatch")


def _scales(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def cmd_generate(a) -> int:
    if a.model == "er":
        g = gen.gen_er(a.n, a.p, a.seed)
    elif a.model == "pa":
        g = gen.gen_pa(a.n, a.m, a.seed)
    elif a.model == "rmat":
        g = gen.gen_rmat(a.scale, a.edge_factor, *a.probs, seed=a.seed)
    else:
        b = gen.gen_affiliation(a.users, a.interests, a.memberships, a.seed)
        io.write_memberships(a.memberships_out or Path(a.out).with_suffix(".members"), b)
        g = gen.affiliation_to_graph(b)
    io.write_edge_list(a.out, g)
    print(f"nodes={g.n}\nedges={g.num_edges}\nmax_degree={g.max_degree}")
    return 0


def cmd_perturb(a) -> int:
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    if a.model == "affiliation":
        cp = affiliation_pair(io.read_memberships(a.input), a.q, a.seed, a.permute)
    else:
        g = io.read_edge_list(a.input)
        if a.model == "independent":
            s2 = a.s2 if a.s2 is not None else a.s1
            cp = copy_independent(g, a.s1, s2, a.permute, a.seed)
        else:
            cp = cascade_pair(g, a.p, a.seed, start1=a.start1, start2=a.start2, min_active=a.min_active)
    if a.sybil_prob is not None:
        cp = add_sybils(cp, a.sybil_prob, a.seed ^ 0x5EED)
    _write_pair(out, cp)
    print(f"g1_nodes={cp.g1.n}\ng1_edges={cp.g1.num_edges}\ng2_nodes={cp.g2.n}\n"
          f"g2_edges={cp.g2.num_edges}\ntruth_pairs={len(cp.truth)}")
    return 0


def _write_pair(out: Path, cp: CopyPair) -> None:
    io.write_edge_list(out / "g1.edges", cp.g1)
    io.write_edge_list(out / "g2.edges", cp.g2)
    io.write_pairs(out / "truth.pairs", cp.truth)
    if cp.sybils1 is not None:
        io.write_sybils(out / "sybils.ids", cp.sybils1, cp.sybils2)


def cmd_seed_links(a) -> int:
    g1 = io.read_edge_list(a.g1)
    g2 = io.read_edge_list(a.g2)
    truth = io.read_pairs(a.truth)
    cp = CopyPair(g1, g2, truth)
    seeds = sample_seeds(cp, a.l, a.seed)
    io.write_pairs(a.out, seeds)
    print(f"seeds={len(seeds)}")
    return 0


def cmd_reconcile(a) -> int:
    g1 = io.read_edge_list(a.g1)
    g2 = io.read_edge_list(a.g2)
    seeds = io.read_links(a.seeds)
    res = run_matching(
        g1, g2, seeds, a.T, a.k, D=a.D, bucketing=not a.no_bucketing,
        strict=a.strict_threshold, freeze=a.freeze_linked, workers=a.workers,
    )
    io.write_pairs(a.out, res.links)
    out = Path(a.out)
    lines = res.report_lines()
    Path(str(out) + ".report").write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = {
        "T": a.T, "k": a.k, "D": res.D, "bucketing": res.bucketing,
        "threshold_rule": res.threshold_rule, "seeds": len(seeds), "links": len(res.links),
        "passes": [vars(p) for p in res.passes],
    }
    Path(str(out) + ".json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_evaluate(a) -> int:
    g1 = io.read_edge_list(a.g1)
    g2 = io.read_edge_list(a.g2)
    output = io.read_links(a.output)
    truth = io.read_pairs(a.truth)
    seeds = io.read_links(a.seeds)
    sybils = None
    if a.sybils:
        sybils = io.read_sybils(a.sybils, g1.n, g2.n)
    m = evaluate(output, truth, seeds, g1, g2, sybils)
    write_breakdown_csv(a.breakdown, degree_breakdown(output, truth, g1, g2))
    print("\n".join(m.lines()))
    return 0


def cmd_experiment(a) -> int:
    cfg = ExperimentConfig.load(a.config)
    if a.jobs is not None:
        cfg.jobs = a.jobs
    rep = run_experiment(cfg, a.out)
    w = csv.DictWriter(sys.stdout, fieldnames=REPORT_COLUMNS[:15], extrasaction="ignore")
    w.writeheader()
    for r in rep.rows:
        w.writerow(r)
    return 1 if rep.failed else 0


def cmd_bench(a) -> int:
    rows = run_bench(
        a.scales, edge_factor=a.edge_factor, s=a.s, l=a.l, T=a.T, k=a.k,
        seed=a.seed, workers=a.workers, freeze=a.freeze_linked, repeat=a.repeat,
    )
    cols = ["scale", "nodes", "edges", "links", "bad", "seconds_generate", "seconds_pipeline", "relative"]
    w = csv.DictWriter(sys.stdout, fieldnames=cols, extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.3f}" if isinstance(v, float) else v) for k, v in r.items()})
    if a.out:
        Path(a.out).write_text(json.dumps(rows, indent=2), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="usermatch", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample an underlying network")
    p.add_argument("--model", choices=["er", "pa", "rmat", "affiliation"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--scale", type=int, default=14)
    p.add_argument("--edge-factor", type=int, default=16)
    p.add_argument("--probs", type=float, nargs=4, default=list(gen.RMAT_DEFAULTS), metavar=("A", "B", "C", "D"))
    p.add_argument("--users", type=int, default=10_000)
    p.add_argument("--interests", type=int, default=1000)
    p.add_argument("--memberships", type=int, default=4, help="interests per user")
    p.add_argument("--memberships-out", help="membership file (default: <out>.members)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("perturb", help="make two copies plus ground truth")
    p.add_argument("--model", choices=["independent", "cascade", "affiliation"], required=True)
    p.add_argument("--input", required=True, help="edge list, or membership file for affiliation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s1", type=float, default=0.5)
    p.add_argument("--s2", type=float)
    p.add_argument("--p", type=float, default=0.05, help="cascade activation probability")
    p.add_argument("--start1", type=int)
    p.add_argument("--start2", type=int)
    p.add_argument("--min-active", type=int, default=0)
    p.add_argument("--q", type=float, default=0.25, help="interest deletion probability")
    p.add_argument("--permute", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--sybil-prob", type=float, help="inject sybils with this attach probability")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("seed-links", help="sample seed links from the ground truth")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="seeds.pairs")
    p.set_defaults(func=cmd_seed_links)

    p = sub.add_parser("reconcile", help="expand seed links")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--T", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--D", type=int, default=0, help="top degree bound (default: max degree)")
    p.add_argument("--no-bucketing", action="store_true")
    p.add_argument("--strict-threshold", action="store_true", help="require score > T")
    p.add_argument("--freeze-linked", action="store_true",
                   help="drop linked nodes from the row/column maxima")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconcile)

    p = sub.add_parser("evaluate", help="score output links")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--sybils")
    p.add_argument("--breakdown", default="breakdown.csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a JSON experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, help="concurrent repetitions")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="RMAT scaling benchmark")
    p.add_argument("--model", choices=["rmat"], default="rmat")
    p.add_argument("--scales", type=_scales, default=[16, 18, 20])
    p.add_argument("--edge-factor", type=int, default=16)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--l", type=float, default=0.10)
    p.add_argument("--T", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--freeze-linked", action="store_true")
    p.add_argument("--repeat", type=int, default=1, help="best of this many pipeline runs")
    p.add_argument("--out", help="write the timing table as JSON")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except (GraphError, LinkError, ConfigError, BenchError, gen.ParameterError, ValueError, OSError) as exc:
        print(f"usermatch {a.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
