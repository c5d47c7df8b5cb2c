"""End-to-end experiment driver: generate, perturb, seed, match, evaluate."""

from __future__ import annotations

import csv
import json
import logging
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import generators as gen
from . import io
from .evaluate import Metrics, degree_breakdown, evaluate, write_breakdown_csv
from .matching import bucket_thresholds, run_matching
from .perturb import CopyPair, add_sybils, affiliation_pair, cascade_pair, copy_independent, sample_seeds
from .rng import derive_seeds

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

REPORT_COLUMNS = [
    "repetition", "T", "k", "variant", "status", "error",
    "output", "seeds", "seeds_echoed", "good", "bad", "sybil_links",
    "truth_pairs", "eligible", "precision", "recall_all", "recall_new", "recall_gt5",
    "seconds_generate", "seconds_perturb", "seconds_seeds", "seconds_match", "seconds_evaluate",
    "peak_candidates", "breakdown_file",
]


class ConfigError(ValueError):
    pass


def _prob(name, value):
    if value is None or not 0.0 <= float(value) <= 1.0:
        raise ConfigError(f"{name} must be a probability in [0, 1], got {value!r}")


@dataclass
class ExperimentConfig:
    generator: dict
    perturbation: dict
    seed_link_prob: float
    T: list[int] = field(default_factory=lambda: [2])
    k: int = 2
    D: int = 0
    strict: bool = False
    freeze: bool = False
    ablation: bool = False
    baseline_k: int | str | None = None
    repetitions: int = 1
    master_seed: int = 0
    workers: int = 1
    jobs: int = 1
    write_graphs: bool = True
    schema: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d.get("config", d))  # a manifest embeds its config
        if d.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {d.get('schema')}")
        match = d.pop("match", {})
        for key in ("T", "k", "D", "strict", "freeze"):
            if key in match:
                d[key] = match[key]
        if isinstance(d.get("T"), int):
            d["T"] = [d["T"]]
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.T or min(self.T) < 1 or self.k < 1:
            raise ConfigError("T values and k must be >= 1")
        _prob("seed_link_prob", self.seed_link_prob)
        model = self.generator.get("model")
        if model not in {"er", "pa", "rmat", "affiliation"}:
            raise ConfigError(f"unknown generator model {model!r}")
        if model == "er":
            _prob("generator.p", self.generator.get("p"))
        pert = self.perturbation.get("model")
        if pert not in {"independent", "cascade", "affiliation"}:
            raise ConfigError(f"unknown perturbation model {pert!r}")
        if pert == "independent":
            _prob("perturbation.s1", self.perturbation.get("s1"))
            _prob("perturbation.s2", self.perturbation.get("s2", self.perturbation.get("s1")))
        elif pert == "cascade":
            _prob("perturbation.p", self.perturbation.get("p"))
        else:
            _prob("perturbation.q", self.perturbation.get("q"))
            if model != "affiliation":
                raise ConfigError("affiliation perturbation needs the affiliation generator")
        bk = self.baseline_k
        if not (bk is None or bk == "passes" or (isinstance(bk, int) and bk >= 1)):
            raise ConfigError("baseline_k must be a positive integer, 'passes' or null")
        if self.perturbation.get("sybil_attach_prob") is not None:
            _prob("perturbation.sybil_attach_prob", self.perturbation["sybil_attach_prob"])


def generate(spec: dict, seed: int):
    """Build the underlying network described by a generator spec."""
    p = {k: v for k, v in spec.items() if k != "model"}
    model = spec["model"]
    if model == "er":
        return gen.gen_er(p["n"], p["p"], seed)
    if model == "pa":
        return gen.gen_pa(p["n"], p["m"], seed)
    if model == "rmat":
        a, b, c, d = p.get("probs", gen.RMAT_DEFAULTS)
        return gen.gen_rmat(p["scale"], p.get("edge_factor", 16), a, b, c, d, seed)
    if model == "affiliation":
        return gen.gen_affiliation(p["users"], p["interests"], p["memberships_per_user"], seed)
    raise ConfigError(f"unknown generator model {model!r}")


def perturb(spec: dict, underlying, seed: int) -> CopyPair:
    model = spec["model"]
    seeds = derive_seeds(seed, 2)
    if model == "independent":
        s1 = spec["s1"]
        cp = copy_independent(underlying, s1, spec.get("s2", s1), spec.get("permute", True), seeds[0])
    elif model == "cascade":
        cp = cascade_pair(
            underlying, spec["p"], seeds[0],
            start1=spec.get("start1"), start2=spec.get("start2"),
            min_active=spec.get("min_active", 0),
        )
    elif model == "affiliation":
        if not isinstance(underlying, gen.BipartiteAffiliation):
            raise ConfigError("affiliation perturbation needs the affiliation generator")
        cp = affiliation_pair(underlying, spec["q"], seeds[0], spec.get("permute", True))
    else:
        raise ConfigError(f"unknown perturbation model {model!r}")
    if spec.get("sybil_attach_prob") is not None:
        cp = add_sybils(cp, spec["sybil_attach_prob"], seeds[1])
    return cp


@dataclass
class ExperimentReport:
    rows: list[dict]
    manifest: dict

    @property
    def failed(self) -> bool:
        return any(r["status"] != "ok" for r in self.rows)

    def rows_for(self, variant: str = "bucketed", T: int | None = None) -> list[dict]:
        return [r for r in self.rows if r["variant"] == variant and (T is None or r["T"] == T)]


def _metrics_row(m: Metrics) -> dict:
    return {k: getattr(m, k) for k in (
        "output", "seeds", "seeds_echoed", "good", "bad", "sybil_links", "truth_pairs",
        "eligible", "precision", "recall_all", "recall_new", "recall_gt5")}


def _variants(cfg: ExperimentConfig) -> list[tuple[int, str]]:
    out = []
    for T in cfg.T:
        out.append((T, "bucketed"))
        if cfg.ablation:
            out.append((T, "baseline"))
    return out


def _run_repetition(cfg: ExperimentConfig, rep: int, rep_seed: int, out_dir: Path | None):
    gseed, pseed, lseed = derive_seeds(rep_seed, 3)
    seeds_info = {"repetition": rep, "rep_seed": rep_seed, "generator_seed": gseed,
                  "perturb_seed": pseed, "seed_link_seed": lseed}
    files: list[str] = []
    rows: list[dict] = []
    timings = {}
    rdir = None
    if out_dir is not None:
        rdir = out_dir / f"rep_{rep:03d}"
        rdir.mkdir(parents=True, exist_ok=True)

    def save(name, writer, obj):
        if rdir is not None:
            writer(rdir / name, obj)
            files.append(f"{rdir.name}/{name}")

    try:
        t0 = time.perf_counter()
        underlying = generate(cfg.generator, gseed)
        timings["seconds_generate"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        cp = perturb(cfg.perturbation, underlying, pseed)
        timings["seconds_perturb"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        seeds = sample_seeds(cp, cfg.seed_link_prob, lseed)
        timings["seconds_seeds"] = time.perf_counter() - t0
        if cfg.write_graphs:
            save("g1.edges", io.write_edge_list, cp.g1)
            save("g2.edges", io.write_edge_list, cp.g2)
            save("truth.pairs", io.write_pairs, cp.truth)
            if cp.sybils1 is not None:
                save("sybils.ids", lambda path, c: io.write_sybils(path, c.sybils1, c.sybils2), cp)
        save("seeds.pairs", io.write_pairs, seeds)
    except Exception as exc:  # noqa: BLE001 - recorded as an error row
        log.error("repetition %d failed before matching: %s", rep, exc)
        err = f"{type(exc).__name__}: {exc}"
        for T, variant in _variants(cfg):
            rows.append({"repetition": rep, "T": T, "variant": variant, "status": "error",
                         "error": err, **timings})
        return rows, seeds_info, files

    sybils = (cp.sybils1, cp.sybils2) if cp.sybils1 is not None else None
    for T, variant in _variants(cfg):
        row = {"repetition": rep, "T": T, "variant": variant, **timings}
        try:
            k = cfg.k
            if variant == "baseline" and cfg.baseline_k is not None:
                k = cfg.baseline_k
                if k == "passes":
                    # same number of scoring rounds as the bucketed run
                    D = cfg.D or max(cp.g1.max_degree, cp.g2.max_degree)
                    k = cfg.k * max(len(bucket_thresholds(D)), 1)
            row["k"] = k
            t0 = time.perf_counter()
            res = run_matching(
                cp.g1, cp.g2, seeds, T, k, D=cfg.D, bucketing=variant == "bucketed",
                strict=cfg.strict, freeze=cfg.freeze, workers=cfg.workers,
            )
            row["seconds_match"] = time.perf_counter() - t0
            t0 = time.perf_counter()
            metrics = evaluate(res.links, cp.truth, seeds, cp.g1, cp.g2, sybils)
            buckets = degree_breakdown(res.links, cp.truth, cp.g1, cp.g2)
            row["seconds_evaluate"] = time.perf_counter() - t0
            row["peak_candidates"] = max((p.candidates for p in res.passes), default=0)
            row.update(_metrics_row(metrics))
            tag = f"T{T}" + ("" if variant == "bucketed" else "_baseline")
            save(f"out_{tag}.pairs", io.write_pairs, res.links)
            save(f"breakdown_{tag}.csv", write_breakdown_csv, buckets)
            save(f"summary_{tag}.txt", _write_summary, metrics.lines() + res.report_lines())
            row["breakdown_file"] = f"rep_{rep:03d}/breakdown_{tag}.csv" if rdir else ""
            row["status"] = "ok"
            row["error"] = ""
        except Exception as exc:  # noqa: BLE001
            log.error("repetition %d T=%d %s failed: %s", rep, T, variant, exc)
            log.debug("%s", traceback.format_exc())
            row["status"] = "error"
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows, seeds_info, files


def _write_summary(path, lines):
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ExperimentReport:
    """Run every repetition and write ``manifest.json`` and ``report.csv`` to ``out_dir``."""
    cfg.validate()
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rep_seeds = derive_seeds(cfg.master_seed, cfg.repetitions)
    jobs = [(cfg, i, s, out) for i, s in enumerate(rep_seeds)]
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(lambda a: _run_repetition(*a), jobs))
    else:
        results = [_run_repetition(*a) for a in jobs]

    rows = [r for res in results for r in res[0]]
    for r in rows:
        for col in REPORT_COLUMNS:
            r.setdefault(col, "")
    manifest = {
        "schema": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "repetitions": [res[1] for res in results],
        "files": sorted(f for res in results for f in res[2]),
    }
    if out is not None:
        manifest["files"] += ["report.csv"]
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
        with open(out / "report.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, extrasaction="ignore")
            w.writeheader()
            for r in rows:
                w.writerow({k: ("undefined" if r[k] is None else r[k]) for k in REPORT_COLUMNS})
    return ExperimentReport(rows, manifest)


# ---------------------------------------------------------------------------
# scaling benchmark


class BenchError(RuntimeError):
    pass


def _warm_up():
    # compile every kernel the pipeline touches before anything is timed
    g = gen.gen_rmat(6, 4, seed=1)
    cp = copy_independent(g, 0.5, 0.5, True, 1)
    s = sample_seeds(cp, 0.5, 1)
    res = run_matching(cp.g1, cp.g2, s, 1, 1)
    evaluate(res.links, cp.truth, s, cp.g1, cp.g2)


def run_bench(
    scales: list[int],
    edge_factor: int = 16,
    s: float = 0.5,
    l: float = 0.10,
    T: int = 3,
    k: int = 1,
    seed: int = 1,
    workers: int = 1,
    freeze: bool = False,
    repeat: int = 1,
) -> list[dict]:
    """Time the pipeline (copy, seed, match, evaluate) on RMAT graphs.

    Generation is timed separately and excluded from ``relative``, which
    is pipeline time divided by that of the smallest scale. With
    ``repeat > 1`` the pipeline time is the best of that many runs.
    """
    if not scales:
        raise BenchError("need at least one scale")
    _warm_up()
    # one seed per scale value, so a scale always gets the same graph
    per_scale = derive_seeds(seed, 33)
    rows = []
    for scale in scales:
        if not 0 <= scale <= 32:
            raise BenchError(f"scale {scale} outside [0, 32]")
        gseed = per_scale[scale]
        try:
            t0 = time.perf_counter()
            g = gen.gen_rmat(scale, edge_factor, seed=gseed)
            t_gen = time.perf_counter() - t0
            t_pipe = float("inf")
            for _ in range(max(repeat, 1)):
                t0 = time.perf_counter()
                cp = copy_independent(g, s, s, True, gseed ^ 1)
                seeds = sample_seeds(cp, l, gseed ^ 2)
                res = run_matching(cp.g1, cp.g2, seeds, T, k, workers=workers, freeze=freeze)
                m = evaluate(res.links, cp.truth, seeds, cp.g1, cp.g2)
                t_pipe = min(t_pipe, time.perf_counter() - t0)
        except MemoryError as exc:
            raise BenchError(f"out of memory at scale {scale}") from exc
        rows.append({
            "scale": scale, "nodes": g.n, "edges": g.num_edges,
            "copy_edges": cp.g1.num_edges + cp.g2.num_edges,
            "seeds": len(seeds), "links": len(res.links), "bad": m.bad,
            "seconds_generate": t_gen, "seconds_pipeline": t_pipe,
        })
        log.info("bench scale=%d pipeline=%.2fs", scale, t_pipe)
        del g, cp
    base = min(rows, key=lambda r: r["scale"])["seconds_pipeline"]
    for r in rows:
        r["relative"] = r["seconds_pipeline"] / base if base > 0 else float("nan")
    return rows
