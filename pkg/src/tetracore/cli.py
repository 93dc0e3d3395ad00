"""Command-line entry point: sample, verify, certify, check, degenerate, export.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
Random draws use Python's ``random.Random(seed)`` (MT19937).  Set
TETRACORE_THREADS to certify on several worker processes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import combinatorics as comb
from . import config as cfg
from . import core
from . import relations as rel

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    seed: int | None = None
    counts: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self, with_timings: bool = True) -> dict:
        out = {
            "command": self.command,
            "seed": self.seed,
            "counts": self.counts,
            "expected": self.expected,
            "failures": self.failures,
            "artifacts": self.artifacts,
        }
        if with_timings:
            out["timings"] = self.timings
        return out

    def table(self) -> str:
        lines = [f"# {self.command}" + (f" (seed {self.seed})" if self.seed is not None else "")]
        keys = list(self.counts)
        width = max([len(k) for k in keys] + [5])
        lines.append(f"{'claim':<{width}}  {'expected':>10}  {'observed':>10}")
        for k in keys:
            exp = self.expected.get(k, "")
            lines.append(f"{k:<{width}}  {str(exp):>10}  {str(self.counts[k]):>10}")
        for f in self.failures:
            lines.append(f"FAIL {f}")
        for a in self.artifacts:
            lines.append(f"wrote {a}")
        return "\n".join(lines)


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TETRACORE_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def cmd_sample(args) -> tuple[RunReport, int]:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    stats: dict = {}
    configs = cfg.sample_config(args.seed, args.count, stats=stats)
    write_atomic(args.out, cfg.configs_to_json(configs))
    rep = RunReport("sample", args.seed)
    rep.counts = {"configs": len(configs)}
    rep.counts.update({f"rejected {k}": stats[k] for k in ("singular", "not_general", "zero_edge")})
    rep.expected = {"configs": args.count}
    rep.artifacts.append(str(args.out))
    return rep, EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _u_points(charts, inject_fault: bool):
    points = [c.edge_assignment() for c in charts]
    if inject_fault and points:
        key = next(iter(points[0]))
        points[0] = dict(points[0])
        points[0][key] = points[0][key] + 1
    return points


def cmd_verify(args) -> tuple[RunReport, int]:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    rep = RunReport(f"verify --level {args.level}", args.seed)
    t0 = time.perf_counter()
    charts = [cfg.normalize(c) for c in cfg.sample_config(args.seed, args.samples)]
    spot = charts[: min(10, len(charts))]
    if args.level == "u":
        rels = rel.u_relations()
        points = _u_points(charts, args.inject_fault)
        report = rel.verify_vanishing(rels, points)
        jac = rel.Jacobian(rels)
        variables = [rel.xvar(e) for e in comb.all_edges()]
        ranks = [jac.rank(variables, p) for p in points[: len(spot)]]
        rep.counts = {"relations": len(rels), "points": len(points), "failures": len(report.failures), "rank18_spots": sum(r == 18 for r in ranks)}
        rep.expected = {"failures": 0, "rank18_spots": len(spot), "linear relations": 16}
        rep.counts["linear relations"] = rel.family_counts(rels)[rel.LINEAR]
        bad_ranks = [r for r in ranks if r != 18]
    else:
        rels = rel.z_relations()
        lifts = [core.core_from_chart(c) for c in charts]
        points = [z.assignment() for z in lifts]
        if args.inject_fault and points:
            key = next(iter(points[0]))
            points[0] = dict(points[0])
            points[0][key] = points[0][key] + 1
        report = rel.verify_vanishing(rels, points)
        coranks = [core.CHART_DIMENSION - core.jacobian_rank(z) for z in lifts[: len(spot)]]
        rep.counts = {"relations": len(rels), "points": len(points), "failures": len(report.failures), "corank3_spots": sum(c == 3 for c in coranks)}
        rep.expected = {"failures": 0, "corank3_spots": len(spot)}
        bad_ranks = [c for c in coranks if c != 3]
    rep.counts.update({f"family {k}": v for k, v in rel.family_counts(rels).items()})
    for i, j, v in report.failures[:50]:
        rep.failures.append(f"relation {i} ({rels[i].family}: {rels[i].to_text()}) at point {j}: {cfg.format_rat(v)}")
    if bad_ranks:
        rep.failures.append(f"dimension spot checks failed: {bad_ranks}")
    if args.symbolic:
        bad = [r.to_text() for r in rel.u_relations() if not rel.symbolic_identity_check(r, "exact")]
        rep.counts["symbolic identities"] = len(rel.u_relations()) - len(bad)
        rep.expected["symbolic identities"] = len(rel.u_relations())
        rep.failures.extend(f"not an identity: {t}" for t in bad)
    rep.timings["total_s"] = round(time.perf_counter() - t0, 3)
    return rep, EXIT_FAIL if rep.failures else EXIT_OK


# ---------------------------------------------------------------------------
# certify / check
# ---------------------------------------------------------------------------


def _certify_one(item):
    z, shape = item
    return core.jacobian_certificate(z, shape_relations=shape)


def certify_records(records: Sequence[core.SpecialPointRecord]) -> dict[int, list[core.SmoothnessCertificate]]:
    jobs = [(i, z, r.dimension == 1) for i, r in enumerate(records) for z in r.representatives]
    threads = _threads()
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(threads) as pool:
            certs = list(pool.map(_certify_one, [(z, s) for _, z, s in jobs]))
    else:
        certs = [_certify_one((z, s)) for _, z, s in jobs]
    out: dict[int, list] = {i: [] for i in range(len(records))}
    for (i, _, _), c in zip(jobs, certs):
        out[i].append(c)
    return out


def _certificate_failures(records, certs) -> list[str]:
    failures = []
    for i, r in enumerate(records):
        for j, c in enumerate(certs[i]):
            if c.verdict != "Smooth":
                failures.append(f"{r.type_label} representative {j}: corank {c.corank}, verdict {c.verdict}")
            if c.propagation_bound is not None and c.propagation_bound != c.corank:
                failures.append(f"{r.type_label} representative {j}: propagation bound {c.propagation_bound} != corank {c.corank}")
    return failures


def _census_failures(records, only_type: str | None) -> tuple[dict, dict, list]:
    counts = {}
    expected = {}
    failures = []
    if only_type is None:
        summary = core.census(records)
        counts["isolated"] = summary["isolated"]
        counts["families"] = summary["families"]
        expected["isolated"] = core.EXPECTED_ISOLATED
        expected["families"] = core.EXPECTED_FAMILIES
        labels = core.TYPE_LABELS
    else:
        labels = (only_type,)
    for label in labels:
        got = sum(r.orbit_size for r in records if r.type_label == label)
        counts[f"orbit {label}"] = got
        expected[f"orbit {label}"] = core.EXPECTED_ORBITS[label]
    for k, v in expected.items():
        if counts.get(k) != v:
            failures.append(f"count mismatch for {k}: expected {v}, observed {counts.get(k)}")
    return counts, expected, failures


def cmd_certify(args) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    records = list(core.enumerate_special())
    if args.only_type:
        if args.only_type not in core.TYPE_LABELS:
            raise UsageError(f"--only-type must be one of {', '.join(core.TYPE_LABELS)}")
        records = [r for r in records if r.type_label == args.only_type]
    t1 = time.perf_counter()
    certs = certify_records(records)
    rep = RunReport("certify")
    rep.counts, rep.expected, rep.failures = _census_failures(records, args.only_type)
    rep.counts["certificates"] = sum(len(c) for c in certs.values())
    rep.counts["smooth"] = sum(c.verdict == "Smooth" for cs in certs.values() for c in cs)
    rep.expected["smooth"] = rep.counts["certificates"]
    rep.counts["propagation agrees"] = sum(c.propagation_bound == c.corank for cs in certs.values() for c in cs)
    rep.failures += _certificate_failures(records, certs)
    for r in records:
        if r.family is not None:
            rep.counts[f"{r.type_label} relation"] = r.family.linear_relation
    write_atomic(args.out, _dump(core.catalog_json(records, certs)))
    rep.artifacts.append(str(args.out))
    rep.timings = {"enumerate_s": round(t1 - t0, 3), "certify_s": round(time.perf_counter() - t1, 3)}
    if not rep.failures:
        iso = sum(r.orbit_size for r in records if r.dimension == 0)
        fam = sum(r.orbit_size for r in records if r.dimension == 1)
        rep.counts["summary"] = f"{iso} isolated, {fam} families, all smooth"
    return rep, EXIT_FAIL if rep.failures else EXIT_OK


def cmd_check(args) -> tuple[RunReport, int]:
    """Replay a catalog: every point must satisfy the relations and reproduce its certificate."""
    rep = RunReport("check")
    try:
        data = json.loads(Path(args.catalog).read_text())
        records = core.records_from_json(data)
    except (KeyError, ValueError, TypeError, AttributeError) as exc:
        rep.failures.append(f"malformed catalog: {exc}")
        return rep, EXIT_FAIL
    for i, (item, r) in enumerate(zip(data, records)):
        stored = item.get("certificates", [])
        if len(stored) != len(r.representatives):
            rep.failures.append(f"record {i} ({r.type_label}): {len(stored)} certificates for {len(r.representatives)} points")
        for j, z in enumerate(r.representatives):
            bad = z.violations()
            if bad:
                rep.failures.append(f"record {i} ({r.type_label}) point {j}: {len(bad)} relations fail, e.g. {bad[0].to_text()}")
                continue
            if j < len(stored):
                rank = core.jacobian_rank(z, {k: comb.parse_edge(v) for k, v in stored[j]["chart"].items()})
                if rank != stored[j]["jacobian_rank"] or core.CHART_DIMENSION - rank != stored[j]["corank"]:
                    rep.failures.append(
                        f"record {i} ({r.type_label}) point {j}: stored rank/corank "
                        f"{stored[j]['jacobian_rank']}/{stored[j]['corank']}, recomputed {rank}/{core.CHART_DIMENSION - rank}"
                    )
                if stored[j]["verdict"] != ("Smooth" if core.CHART_DIMENSION - rank == 3 else "Inconclusive"):
                    rep.failures.append(f"record {i} ({r.type_label}) point {j}: verdict does not follow from corank")
            if r.family is not None and not any(f.contains(z) for f in core._orbit_families(r)):
                rep.failures.append(f"record {i} ({r.type_label}) point {j}: not on the recorded family")
        if r.dimension == 0 and len({z.faces for z in r.representatives}) != r.orbit_size:
            rep.failures.append(f"record {i} ({r.type_label}): {len(r.representatives)} points for orbit size {r.orbit_size}")
    counts, expected, failures = _census_failures(records, None)
    rep.counts, rep.expected = counts, expected
    rep.failures += failures
    if not args.skip_enumeration:
        fresh = {z.faces for r in core.enumerate_special() if r.dimension == 0 for z in r.representatives}
        stored_pts = {z.faces for r in records if r.dimension == 0 for z in r.representatives}
        if fresh != stored_pts:
            rep.failures.append(f"isolated points differ from a fresh enumeration ({len(fresh ^ stored_pts)} differences)")
    return rep, EXIT_FAIL if rep.failures else EXIT_OK


# ---------------------------------------------------------------------------
# degenerate
# ---------------------------------------------------------------------------


def _parse_weights(text: str) -> cfg.OneParamWeights:
    parts = text.split(",")
    try:
        w = tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"--weights must be four integers, got {text!r}")
    if len(w) != 4:
        raise UsageError(f"--weights must be four integers, got {text!r}")
    return cfg.OneParamWeights(w)


def _load_catalog(path: str | None):
    if path is None:
        return list(core.enumerate_special())
    return core.records_from_json(json.loads(Path(path).read_text()))


def cmd_degenerate(args) -> tuple[RunReport, int]:
    if (args.weights is None) == (args.target_split is None):
        raise UsageError("give exactly one of --weights or --target-split")
    g = cfg.sample_matrices(args.seed, 1)[0]
    c = cfg.config_from_matrix(g)
    rep = RunReport("degenerate", args.seed)
    if args.target_split is not None:
        try:
            target = cfg.parse_split(args.target_split)
        except ValueError as exc:
            raise UsageError(str(exc))
        catalog = _load_catalog(args.catalog)
        feasible = {z.zero_pattern().partition_types() for r in catalog for z in r.representatives}
        if target not in feasible:
            pretty = sorted(",".join("".join(map(str, p)) for p in t) for t in feasible)
            rep.failures.append(f"split {args.target_split} occurs in no catalog entry; realised splits: {' '.join(pretty)}")
            return rep, EXIT_FAIL
        try:
            d = cfg.minimal_split_search(g, args.seed, target=target)
        except cfg.SearchExhausted as exc:
            rep.failures.append(str(exc))
            return rep, EXIT_FAIL
    else:
        w = _parse_weights(args.weights)
        try:
            d = cfg.degenerate_and_limit(c, w)
        except cfg.GeneralPositionError as exc:
            rep.failures.append(str(exc))
            return rep, EXIT_FAIL
        catalog = None
    split = d.split
    if split == (2, 2, 2):
        status = "minimally split"
    elif split == (4, 6, 4):
        status = "nondegenerate"
    else:
        status = "split" if min(split) >= 2 else "not split"
    rep.counts = {"n_1": split[0], "n_2": split[1], "n_3": split[2], "status": status}
    rep.counts["limit equals seed"] = all(cfg.projectively_equal(c.plueckers[s], d.limit.plueckers[s]) for s in c.plueckers)
    bad = d.core_limit.violations()
    rep.counts["core limit relation failures"] = len(bad)
    rep.expected["core limit relation failures"] = 0
    if bad:
        rep.failures.append(f"core limit violates {len(bad)} relations")
    if min(split) >= 2 or args.target_split is not None:
        catalog = catalog if catalog is not None else _load_catalog(args.catalog)
        match = core.match_against_catalog(d.core_limit, catalog)
    else:
        match = None
    rep.counts["catalog match"] = match.type_label if match else "none"
    if args.target_split is not None:
        rep.expected.update({"n_1": 2, "n_2": 2, "n_3": 2})
        if match is None:
            rep.failures.append("minimally split limit matches no catalog entry")
    if args.out:
        payload = {
            "seed_matrix": [[str(v) for v in row] for row in g],
            "weights": list(d.weights.a),
            "frame": None if d.frame is None else [[cfg.format_rat(Fraction(v)) for v in row] for row in d.frame],
            "curve": d.curve.to_json(),
            "limit": d.limit.to_json(),
            "n_k": list(split),
            "core_limit": d.core_limit.to_json(),
            "match": match.type_label if match else None,
        }
        write_atomic(args.out, _dump(payload))
        rep.artifacts.append(str(args.out))
    return rep, EXIT_FAIL if rep.failures else EXIT_OK


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def cmd_export(args) -> tuple[RunReport, int]:
    if not args.gamma and not args.relations:
        raise UsageError("nothing to export: give --gamma and/or --relations")
    out = Path(args.out_dir)
    rep = RunReport("export")
    if args.gamma == "dot":
        path = out / "gamma.dot"
        text = comb.gamma_dot()
        write_atomic(path, text)
        rep.counts["subgraphs"] = text.count("subgraph")
        rep.expected["subgraphs"] = 19
        rep.artifacts.append(str(path))
    elif args.gamma == "json":
        path = out / "gamma.json"
        data = comb.gamma_json()
        write_atomic(path, _dump(data))
        rep.counts["edges"] = data["edge_count"]
        rep.counts["components"] = len(data["components"])
        rep.expected.update({"edges": 72, "components": 19})
        rep.artifacts.append(str(path))
    if args.relations:
        rels = rel.u_relations() if args.level == "u" else rel.z_relations()
        if args.relations == "txt":
            path = out / f"relations_{args.level}.txt"
            write_atomic(path, "".join(r.to_text() + "\n" for r in rels))
        else:
            path = out / f"relations_{args.level}.json"
            write_atomic(path, _dump([r.to_json() for r in rels]))
        rep.counts["relations"] = len(rels)
        rep.artifacts.append(str(path))
    return rep, EXIT_OK


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tetracore", description="Exact computations on the core of the space of complete tetrahedra.")
    p.add_argument("--report", help="also write the run report as JSON to this file")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="write seeded general-position configurations")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    v = sub.add_parser("verify", help="check the defining relations on seeded samples")
    v.add_argument("--level", choices=("u", "z"), required=True)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--symbolic", action="store_true", help="exact identity check of every U-level generator")
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("certify", help="enumerate the special locus and certify smoothness")
    c.add_argument("--out", default="catalog.json")
    c.add_argument("--only-type", choices=core.TYPE_LABELS)
    c.set_defaults(func=cmd_certify)

    k = sub.add_parser("check", help="replay a catalog written by certify")
    k.add_argument("--catalog", required=True)
    k.add_argument("--skip-enumeration", action="store_true", help="do not compare against a fresh enumeration")
    k.set_defaults(func=cmd_check)

    d = sub.add_parser("degenerate", help="one-parameter degeneration of a seeded configuration")
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--weights", help="a,b,c,d")
    d.add_argument("--target-split", help="L,P,H block sizes, e.g. 31,51,22")
    d.add_argument("--catalog", help="catalog JSON from certify (default: enumerate afresh)")
    d.add_argument("--out", help="write curve, limit and core limit as JSON")
    d.set_defaults(func=cmd_degenerate)

    e = sub.add_parser("export", help="write Gamma and relation lists")
    e.add_argument("--gamma", choices=("dot", "json"))
    e.add_argument("--relations", choices=("txt", "json"))
    e.add_argument("--level", choices=("u", "z"), default="z")
    e.add_argument("--out-dir", default=".")
    e.set_defaults(func=cmd_export)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        report, code = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except cfg.SamplingAbort as exc:
        print(f"sampling aborted: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(report.table())
    if args.report:
        try:
            write_atomic(args.report, _dump(report.to_json()))
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
