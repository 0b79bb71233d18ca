"""Command-line pipeline: family -> checks -> hull -> triangulation -> quotient -> homology.

Commands
    generate     build a family and report its size against the counting bound
    verify       run the three membership conditions on a family file
    pipeline     run all stages (or a prefix) and emit a summary verdict
    bound-table  exact family sizes vs. the counting bound over a range of n

Outputs are deterministic for a fixed configuration.  Exit codes: 0 on
success, 2 for usage errors, 3 for I/O errors, and a distinct code per
failing stage (family 10, verify 11, hull 12, triangulate 13,
quotient 14, homology 15).  The environment variable RPFORGE_LOG sets
the logging level.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import family as fam
from . import geometry as geo
from . import triangulation as tri
from .errors import CertificationError, QuotientError
from .homology import (check_pseudomanifold, classify_low_dimensional,
                       expected_rp_homology, homology, homology_to_dict)

log = logging.getLogger("rpforge.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
STAGE_EXIT = {
    "family": 10,
    "verify": 11,
    "hull": 12,
    "triangulate": 13,
    "quotient": 14,
    "homology": 15,
}
STAGE_ORDER = ("family", "verify", "hull", "triangulate", "quotient", "homology")
DEFAULT_HULL_LIMIT = 7


class StageError(Exception):
    """A pipeline stage failed; carries the stage name for the exit code."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage
        self.exit_code = STAGE_EXIT[stage]


@dataclass
class PipelineConfig:
    n: int
    k: int | None = None
    single_group: bool = False
    precision: int = geo.DEFAULT_PRECISION
    eps: float = geo.DEFAULT_EPS
    out: Path | None = None
    stage: str = "all"
    jobs: int = 1
    fmt: str = "json"
    hull_limit: int = DEFAULT_HULL_LIMIT
    off_digits: int = 17

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.single_group:
            self.k = 1
        if self.k is None:
            self.k = fam.default_k(self.n)
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must be in 1..{self.n}")
        if self.precision < 64:
            raise ValueError("precision must be at least 64 bits")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.stage not in STAGE_ORDER + ("all",):
            raise ValueError(f"unknown stage {self.stage}")

    @property
    def last_stage(self) -> str:
        return "homology" if self.stage == "all" else self.stage


def _report_dict(report: fam.ConditionReport, with_witnesses: bool = False) -> dict:
    out = {
        "condition": report.condition,
        "passed": report.passed,
        "violations": [_jsonable(v) for v in report.violations],
    }
    if with_witnesses:
        out["witnesses"] = [_jsonable(w) for w in report.witnesses]
    return out


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write(out: Path | None, name: str, text: str) -> None:
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def _dump(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------

def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run stages up to cfg.stage, writing artifacts when an output dir is set.

    Raises StageError on the first failing stage.
    """
    summary: dict = {
        "config": {
            "n": cfg.n, "k": cfg.k, "single_group": cfg.single_group,
            "precision": cfg.precision, "eps": cfg.eps,
            "stage": cfg.stage, "jobs": cfg.jobs,
        }
    }
    last = cfg.last_stage

    # -- family --------------------------------------------------------
    try:
        partition = fam.make_partition(cfg.n, cfg.k)
        V = fam.build_grouped_family(partition)
    except ValueError as exc:
        raise StageError("family", str(exc)) from exc
    closed_form = fam.count_grouped_family(partition)
    if closed_form != len(V):
        raise StageError("family",
                         f"closed-form count {closed_form} != enumerated {len(V)}")
    bound = fam.size_bound(partition.k, partition.max_group_size)
    if not len(V) < bound:
        raise StageError("family",
                         f"family size {len(V)} is not below the bound {bound}")
    summary["family"] = {
        "size": len(V),
        "bound": bound,
        "baseline": (1 << cfg.n) - 1,
        "groups": [list(g) for g in partition.groups],
    }
    _write(cfg.out, "family.json", _dump(V.to_dict(partition)))
    log.info("family: %d members (bound %d)", len(V), bound)
    if last == "family":
        summary["verdict"] = "pass"
        _write(cfg.out, "summary.json", _dump(summary))
        return summary

    # -- verify ----------------------------------------------------------
    reports = fam.check_all(V)
    summary["verify"] = {r.condition: _report_dict(r) for r in reports}
    _write(cfg.out, "verify.json", _dump(summary["verify"]))
    failed = [r.condition for r in reports if not r.passed]
    if failed:
        raise StageError("verify", f"conditions failed: {', '.join(failed)}")
    if last == "verify":
        summary["verdict"] = "pass"
        _write(cfg.out, "summary.json", _dump(summary))
        return summary

    # -- hull ------------------------------------------------------------
    if cfg.n > cfg.hull_limit:
        raise StageError(
            "hull", f"n={cfg.n} exceeds the hull stage limit {cfg.hull_limit}; "
            f"only the counting stages scale past it")
    try:
        lattice = geo.convex_hull(V, cfg.precision, cfg.eps, cfg.jobs)
    except CertificationError as exc:
        raise StageError("hull", str(exc)) from exc
    for v in lattice.vertices:
        if geo.inner_vertices(v, v) != 1:
            raise StageError("hull", f"vertex {v} does not have exact unit norm")
    orthant = geo.check_orthant_property(lattice)
    antipodal = geo.check_antipodal_disjoint(lattice)
    summary["hull"] = {
        "vertex_count": len(lattice.vertices),
        "facet_count": len(lattice.facets),
        "min_margin": lattice.min_margin,
        "margin_over_eps": lattice.min_margin / cfg.eps,
        "unit_norms_exact": True,
        "orthant": _report_dict(orthant),
        "antipodal_disjoint": _report_dict(antipodal),
    }
    _write(cfg.out, "lattice.json", _dump(geo.lattice_to_dict(lattice)))
    _write(cfg.out, "lattice.off", geo.lattice_to_off(lattice, cfg.off_digits))
    if not (orthant.passed and antipodal.passed):
        raise StageError("hull", "facet condition checks failed")
    if last == "hull":
        summary["verdict"] = "pass"
        _write(cfg.out, "summary.json", _dump(summary))
        return summary

    # -- triangulate -------------------------------------------------------
    try:
        S, inv = tri.pull_triangulate(lattice)
    except (CertificationError, ValueError) as exc:
        raise StageError("triangulate", str(exc)) from exc
    equi = tri.check_equivariance(S, inv)
    star = tri.check_star_disjointness(S, inv)
    summary["triangulation"] = {
        "f_vector": list(S.f_vector()),
        "euler": S.euler_characteristic(),
        "equivariance": _report_dict(equi),
        "star_disjointness": _report_dict(star),
    }
    names = {i: f"{'+' if v.sign > 0 else '-'}{list(v.elements)}"
             for i, v in enumerate(lattice.vertices)}
    _write(cfg.out, "boundary_s.json", _dump(tri.complex_to_dict(S, names)))
    _write(cfg.out, "boundary_s.txt", tri.complex_to_text(S))
    if not (equi.passed and star.passed):
        raise StageError("triangulate", "equivariance or star disjointness failed")
    if last == "triangulate":
        summary["verdict"] = "pass"
        _write(cfg.out, "summary.json", _dump(summary))
        return summary

    # -- quotient ---------------------------------------------------------
    try:
        Q = tri.quotient(S, inv)
    except (QuotientError, ValueError) as exc:
        raise StageError("quotient", str(exc)) from exc
    fS, fQ = S.f_vector(), Q.f_vector()
    halved = len(fS) == len(fQ) and all(a == 2 * b for a, b in zip(fS, fQ))
    summary["quotient"] = {
        "f_vector": list(fQ),
        "euler": Q.euler_characteristic(),
        "vertex_count": len(Q.labels),
        "f_halved": halved,
    }
    qnames = {i: list(lattice.vertices[i].elements) for i in Q.labels}
    _write(cfg.out, "quotient.json", _dump(tri.complex_to_dict(Q, qnames)))
    _write(cfg.out, "quotient.txt", tri.complex_to_text(Q))
    if not halved:
        raise StageError("quotient", f"f-vector {fS} does not halve to {fQ}")
    if len(Q.labels) != len(V):
        raise StageError("quotient",
                         f"quotient has {len(Q.labels)} vertices, expected {len(V)}")
    if last == "quotient":
        summary["verdict"] = "pass"
        _write(cfg.out, "summary.json", _dump(summary))
        return summary

    # -- homology ----------------------------------------------------------
    m = cfg.n - 1
    if m >= 1:
        pseudo = check_pseudomanifold(Q)
    else:
        pseudo = fam.ConditionReport("pseudomanifold")
    hz = homology(Q, "Z")
    hz2 = homology(Q, "Z2")
    ez = expected_rp_homology(m, "Z")
    ez2 = expected_rp_homology(m, "Z2")
    match = (hz.groups == ez.groups) and (hz2.groups == ez2.groups)
    low_dim = None
    if 1 <= m <= 2:
        try:
            low_dim = classify_low_dimensional(Q)
        except ValueError as exc:
            raise StageError("homology", f"link validation failed: {exc}") from exc
    summary["homology"] = {
        "Z": homology_to_dict(hz),
        "Z2": homology_to_dict(hz2),
        "expected_Z": homology_to_dict(ez),
        "expected_Z2": homology_to_dict(ez2),
        "match": match,
        "pseudomanifold": _report_dict(pseudo),
        "low_dim_class": low_dim,
    }
    _write(cfg.out, "homology_z.json", _dump(homology_to_dict(hz)))
    _write(cfg.out, "homology_z2.json", _dump(homology_to_dict(hz2)))
    if not pseudo.passed:
        raise StageError("homology", "quotient is not a closed pseudomanifold")
    if not match:
        raise StageError(
            "homology",
            f"homology mismatch: got {hz.describe()} / {hz2.describe()}, "
            f"expected {ez.describe()} / {ez2.describe()}")
    summary["verdict"] = "pass"
    _write(cfg.out, "summary.json", _dump(summary))
    return summary


# ---------------------------------------------------------------------------
# bound table
# ---------------------------------------------------------------------------

def _log_big(x: int) -> float:
    """Natural log of a (possibly huge) positive integer."""
    if x <= 0:
        raise ValueError("positive integer required")
    bits = x.bit_length()
    if bits <= 512:
        return math.log(x)
    shift = bits - 64
    return math.log(x >> shift) + shift * math.log(2)


def bound_table(n_max: int, k_policy: str = "sqrt",
                enumerate_limit: int = 24) -> list[dict]:
    """Rows of exact family sizes against the counting bound for n=1..n_max.

    Sizes are enumerated constructively up to `enumerate_limit` and
    obtained from the closed-form per-block count beyond; where both
    apply they are asserted equal.  Each row carries the bound
    2^s (s+1)^(k-1) k, the baseline 2^n - 1, and the normalised ratio
    log|V| / (sqrt(n) log n).
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    rows = []
    prev_size = 0
    for n in range(1, n_max + 1):
        if k_policy == "sqrt":
            k = fam.default_k(n)
        elif k_policy.startswith("fixed:"):
            k = min(int(k_policy.split(":", 1)[1]), n)
        else:
            raise ValueError(f"unknown k policy {k_policy!r}")
        sizes = fam.block_sizes(n, k)
        size = fam.count_from_block_sizes(sizes)
        if n <= enumerate_limit:
            enumerated = len(fam.build_grouped_family(fam.make_partition(n, k)))
            if enumerated != size:
                raise AssertionError(
                    f"count mismatch at n={n}, k={k}: enumerated {enumerated}, "
                    f"closed form {size}")
        s_max = max(sizes)
        bound = fam.size_bound(k, s_max)
        if not size < bound:
            raise AssertionError(f"size {size} not below bound {bound} at n={n}")
        if size < prev_size:
            raise AssertionError(f"family size decreased at n={n}")
        prev_size = size
        ratio = None
        if n >= 2:
            ratio = _log_big(size) / (math.sqrt(n) * math.log(n))
        rows.append({
            "n": n, "k": k, "s": s_max,
            "size": size, "bound": bound, "baseline": (1 << n) - 1,
            "ratio": ratio,
        })
    return rows


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(cfg: PipelineConfig) -> int:
    partition = fam.make_partition(cfg.n, cfg.k)
    V = fam.build_grouped_family(partition)
    bound = fam.size_bound(partition.k, partition.max_group_size)
    payload = _dump(V.to_dict(partition))
    if cfg.out is not None:
        _write(cfg.out, "family.json", payload)
        print(f"wrote {cfg.out / 'family.json'}")
    else:
        sys.stdout.write(payload)
    print(f"|V| = {len(V)}  bound = {bound}  baseline = {(1 << cfg.n) - 1}")
    return EXIT_OK


def cmd_verify(path: Path, fmt: str = "json") -> int:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        print(f"cannot read family file: {exc}", file=sys.stderr)
        return EXIT_IO
    V, _partition = fam.SubsetFamily.from_dict(data)
    collect = len(V) <= 500
    reports = [fam.check_singletons(V), fam.check_downward_closed(V),
               fam.check_exchange(V, collect_witnesses=collect)]
    result = {r.condition: _report_dict(r, with_witnesses=collect)
              for r in reports}
    result["witnesses_collected"] = collect
    if fmt == "json":
        sys.stdout.write(_dump(result))
    else:
        for r in reports:
            print(r.summary())
    return EXIT_OK if all(r.passed for r in reports) else STAGE_EXIT["verify"]


def cmd_pipeline(cfg: PipelineConfig) -> int:
    try:
        summary = run_pipeline(cfg)
    except StageError as exc:
        print(f"stage '{exc.stage}' failed: {exc}", file=sys.stderr)
        return exc.exit_code
    if cfg.fmt == "json":
        sys.stdout.write(_dump(summary))
    else:
        _print_text_summary(summary)
    return EXIT_OK


def _print_text_summary(summary: dict) -> None:
    c = summary["config"]
    print(f"n={c['n']} k={c['k']} precision={c['precision']}")
    if "family" in summary:
        f = summary["family"]
        print(f"family: |V|={f['size']} bound={f['bound']} baseline={f['baseline']}")
    if "verify" in summary:
        states = {k: v["passed"] for k, v in summary["verify"].items()}
        print(f"verify: {states}")
    if "hull" in summary:
        h = summary["hull"]
        print(f"hull: {h['vertex_count']} vertices, {h['facet_count']} facets, "
              f"margin/eps={h['margin_over_eps']:.3g}, "
              f"orthant={h['orthant']['passed']}, "
              f"antipodal={h['antipodal_disjoint']['passed']}")
    if "triangulation" in summary:
        t = summary["triangulation"]
        print(f"triangulation: f={t['f_vector']} "
              f"equivariant={t['equivariance']['passed']} "
              f"stars_disjoint={t['star_disjointness']['passed']}")
    if "quotient" in summary:
        q = summary["quotient"]
        print(f"quotient: f={q['f_vector']} vertices={q['vertex_count']} "
              f"halved={q['f_halved']}")
    if "homology" in summary:
        h = summary["homology"]
        print(f"homology match: {h['match']} "
              f"(pseudomanifold={h['pseudomanifold']['passed']}, "
              f"class={h['low_dim_class']})")
    print(f"verdict: {summary.get('verdict', 'fail')}")


def cmd_bound_table(n_max: int, k_policy: str, fmt: str) -> int:
    rows = bound_table(n_max, k_policy)
    if fmt == "json":
        sys.stdout.write(_dump({"rows": rows}))
    else:
        print(f"{'n':>6} {'k':>4} {'s':>4} {'|V|':>14} {'bound':>16} "
              f"{'baseline':>16} {'ratio':>7}")
        for r in rows:
            size = r["size"] if r["size"] < 10 ** 12 else f"~e^{_log_big(r['size']):.1f}"
            bound = r["bound"] if r["bound"] < 10 ** 14 else f"~e^{_log_big(r['bound']):.1f}"
            base = r["baseline"] if r["baseline"] < 10 ** 14 else f"~2^{r['n']}"
            ratio = f"{r['ratio']:.4f}" if r["ratio"] is not None else "-"
            print(f"{r['n']:>6} {r['k']:>4} {r['s']:>4} {size!s:>14} "
                  f"{bound!s:>16} {base!s:>16} {ratio:>7}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="ground set size")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--k", type=int, default=None,
                       help="number of partition blocks (default ceil(sqrt(n)))")
    group.add_argument("--single-group", action="store_true",
                       help="use one block (the 2^n - 1 baseline family)")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--format", dest="fmt", choices=("json", "text"),
                        default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpforge",
        description="Certified pipeline from subset families to projective-space "
                    "triangulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="build a family file")
    _add_common(p_gen)

    p_ver = sub.add_parser("verify", help="check the membership conditions")
    p_ver.add_argument("family", type=Path, help="family JSON file")
    p_ver.add_argument("--format", dest="fmt", choices=("json", "text"),
                       default="json")

    p_pipe = sub.add_parser("pipeline", help="run the full pipeline")
    _add_common(p_pipe)
    p_pipe.add_argument("--precision", type=int, default=geo.DEFAULT_PRECISION,
                        help="working precision in bits (default 256)")
    p_pipe.add_argument("--eps", type=float, default=geo.DEFAULT_EPS,
                        help="relative on-plane tolerance (default 2^-64)")
    p_pipe.add_argument("--stage", choices=STAGE_ORDER + ("all",), default="all")
    p_pipe.add_argument("--jobs", type=int, default=1,
                        help="worker processes for facet certification")
    p_pipe.add_argument("--hull-limit", type=int, default=DEFAULT_HULL_LIMIT,
                        help="refuse hull stages above this dimension")
    p_pipe.add_argument("--off-digits", type=int, default=17,
                        help="decimal digits in the OFF export (default 17)")

    p_tab = sub.add_parser("bound-table", help="sizes vs. bound for n=1..n_max")
    p_tab.add_argument("--n-max", type=int, required=True)
    p_tab.add_argument("--k-policy", default="sqrt",
                       help='"sqrt" (default) or "fixed:K"')
    p_tab.add_argument("--format", dest="fmt", choices=("json", "text"),
                       default="text")
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("RPFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "generate":
            cfg = PipelineConfig(n=args.n, k=args.k, single_group=args.single_group,
                                 out=args.out, fmt=args.fmt)
            return cmd_generate(cfg)
        if args.command == "verify":
            return cmd_verify(args.family, args.fmt)
        if args.command == "pipeline":
            cfg = PipelineConfig(n=args.n, k=args.k, single_group=args.single_group,
                                 precision=args.precision, eps=args.eps,
                                 out=args.out, stage=args.stage, jobs=args.jobs,
                                 fmt=args.fmt, hull_limit=args.hull_limit,
                                 off_digits=args.off_digits)
            return cmd_pipeline(cfg)
        if args.command == "bound-table":
            return cmd_bound_table(args.n_max, args.k_policy, args.fmt)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
