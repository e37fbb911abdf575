"""Config-driven experiment runner and curve emission.

An experiment is one model family evaluated over one or more bounds (and
optionally several channel/document variants), producing per-case CCDF
curves from the requested sources over a shared grid, a comparison report
against the exact quadrature oracle, and CSV/JSON files with a JSON
metadata sidecar.

The CSV column set is a frozen compatibility surface:

    n, mc_ccdf, mc_ci_lo, mc_ci_hi, oracle, uniform_approx, power_law,
    exp_tail, exact_integer, log_body

Absent sources leave their fields empty. All float fields carry 17
significant digits so a reload is numerically identical.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from . import asym
from .dists import (
    CoupledModel,
    CouplingMode,
    Law,
    SlowVary,
    SlowVaryOne,
    derive_doc_law,
    ell_from_dict,
    law_from_dict,
    validate_coupling,
)
from .errors import (
    ConfigInvalid,
    CouplingInvalid,
    EllNotOne,
    InvalidParameter,
    IoFailure,
    NoRoot,
    NotInteger,
    QuadratureFailure,
    UnknownPreset,
)
from .mc import CcdfCurve, CurvePoint, Source, empirical_ccdf, run_tally
from .oracle import OracleResult, ccdf_exact

ENV_OUTDIR = "RETXDIST_OUTDIR"

CSV_COLUMNS = ("n", "mc_ccdf", "mc_ci_lo", "mc_ci_hi", "oracle",
               "uniform_approx", "power_law", "exp_tail", "exact_integer",
               "log_body")

_SOURCE_COLUMN = {
    Source.ORACLE: "oracle",
    Source.UNIFORM_APPROX: "uniform_approx",
    Source.POWER_LAW: "power_law",
    Source.EXP_TAIL: "exp_tail",
    Source.EXACT_INTEGER: "exact_integer",
    Source.LOG_BODY: "log_body",
}

DEFAULT_SAMPLES = 10_000_000
DEFAULT_CURVES = frozenset({Source.MONTE_CARLO, Source.ORACLE,
                            Source.UNIFORM_APPROX, Source.POWER_LAW})
COUPLING_TOLERANCE = 0.05
ORACLE_REPORT_THRESHOLD = 1e-6
MIN_EXPECTED_TAIL_HITS = 10     # auto grids stop where oracle < this / samples


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced integer grid of retransmission counts.

    n_max None means auto-sizing: the grid runs to ten times the
    transition point and is trimmed where the oracle CCDF drops below
    MIN_EXPECTED_TAIL_HITS / samples. An explicit n_max is honored
    verbatim (no oracle trim).
    """

    n_min: int = 1
    n_max: Optional[int] = None
    points_per_decade: int = 24

    def __post_init__(self) -> None:
        if self.n_min < 1:
            raise ConfigInvalid(f"grid n_min must be >= 1, got {self.n_min}")
        if self.n_max is not None and self.n_max < self.n_min:
            raise ConfigInvalid("grid n_max must be >= n_min")
        if self.points_per_decade < 1:
            raise ConfigInvalid("points_per_decade must be >= 1")


@dataclass(frozen=True)
class ModelVariant:
    """Channel/document override for multi-model experiments."""

    label: str
    channel: Law
    doc_base: Optional[Law]


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    channel: Law
    doc_base: Optional[Law]               # None: document law derived from channel
    bounds: tuple[float, ...]
    alpha: float
    ell: SlowVary = field(default_factory=SlowVaryOne)
    grid: GridSpec = field(default_factory=GridSpec)
    samples: int = DEFAULT_SAMPLES
    seed: int = 20260808
    workers: int = 1
    confidence: float = 0.95
    curves: frozenset = DEFAULT_CURVES
    output_prefix: Optional[str] = None
    fmt: str = "csv"
    variants: tuple[ModelVariant, ...] = ()
    skip_coupling_check: bool = False
    oracle_threshold: float = ORACLE_REPORT_THRESHOLD

    def __post_init__(self) -> None:
        if not self.bounds:
            raise ConfigInvalid("at least one bound is required")
        if any(not b > 0 for b in self.bounds):
            raise ConfigInvalid(f"bounds must be positive, got {self.bounds}")
        if self.samples < 1000:
            raise ConfigInvalid(f"samples must be >= 1000, got {self.samples}")
        if not 0.5 < self.confidence < 1.0:
            raise ConfigInvalid(
                f"confidence must be in (0.5, 1), got {self.confidence}")
        if self.workers < 1:
            raise ConfigInvalid(f"workers must be >= 1, got {self.workers}")
        if self.fmt not in ("csv", "json"):
            raise ConfigInvalid(f"format must be csv or json, got {self.fmt}")
        if not self.curves:
            raise ConfigInvalid("at least one curve source is required")
        if Source.EXACT_INTEGER in self.curves:
            if abs(self.alpha - round(self.alpha)) > 1e-12 or round(self.alpha) < 1:
                raise ConfigInvalid(
                    "exact_integer curve needs a positive integer alpha")
            if not isinstance(self.ell, SlowVaryOne):
                raise ConfigInvalid("exact_integer curve needs ell == 1")

    def cases(self) -> list[tuple[str, Law, Optional[Law], float]]:
        """(label, channel, doc_base, bound) per emitted file."""
        out = []
        variants = self.variants or (
            ModelVariant("", self.channel, self.doc_base),)
        for var in variants:
            for b in self.bounds:
                label = f"b{b:g}" if not var.label else f"{var.label}_b{b:g}"
                out.append((label, var.channel, var.doc_base, b))
        return out

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "model": {
                "channel": self.channel.params(),
                "doc": (self.doc_base.params() if self.doc_base is not None
                        else {"derived": True}),
                "bound": list(self.bounds),
            },
            "alpha": self.alpha,
            "ell": self.ell.params(),
            "grid": {"n_min": self.grid.n_min, "n_max": self.grid.n_max,
                     "points_per_decade": self.grid.points_per_decade},
            "samples": self.samples,
            "seed": self.seed,
            "workers": self.workers,
            "confidence": self.confidence,
            "curves": sorted(s.value for s in self.curves),
            "format": self.fmt,
            "skip_coupling_check": self.skip_coupling_check,
        }
        if self.output_prefix is not None:
            d["output"] = self.output_prefix
        if self.variants:
            d["variants"] = [
                {"label": v.label, "channel": v.channel.params(),
                 "doc": (v.doc_base.params() if v.doc_base is not None
                         else {"derived": True})}
                for v in self.variants]
        return d


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

_TOP_KEYS = {"name", "model", "alpha", "ell", "grid", "samples", "seed",
             "workers", "confidence", "curves", "output", "format",
             "variants", "skip_coupling_check"}


def _infer_alpha(channel: Law, doc: Law) -> float:
    """alpha making Fbar = Gbar^alpha hold exactly, when one exists."""
    if getattr(channel, "family", None) == "exponential" \
            and getattr(doc, "family", None) == "exponential":
        return doc.rate / channel.rate
    if getattr(channel, "family", None) == "weibull" \
            and getattr(doc, "family", None) == "weibull" \
            and channel.index == doc.index:
        return (channel.scale / doc.scale) ** channel.index
    raise ConfigInvalid(
        "alpha cannot be inferred for this channel/document pair; set it")


def parse_config(raw: dict) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a plain config dict."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("config root must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    try:
        model = raw["model"]
        channel = law_from_dict(model["channel"])
        doc_spec = model.get("doc")
        if doc_spec is None or doc_spec.get("derived"):
            doc_base = None
        else:
            doc_base = law_from_dict(doc_spec)
        bound = model["bound"]
        bounds = tuple(float(b) for b in (bound if isinstance(bound, (list, tuple))
                                          else [bound]))
        ell = ell_from_dict(raw.get("ell", {"kind": "one"}))
        if "alpha" in raw:
            alpha = float(raw["alpha"])
        elif doc_base is not None:
            alpha = _infer_alpha(channel, doc_base)
        else:
            raise ConfigInvalid("derived models require an explicit alpha")
        grid_raw = raw.get("grid", {})
        grid = GridSpec(
            n_min=int(grid_raw.get("n_min", 1)),
            n_max=(int(grid_raw["n_max"]) if grid_raw.get("n_max") is not None
                   else None),
            points_per_decade=int(grid_raw.get("points_per_decade", 24)))
        curves = raw.get("curves")
        if curves is None:
            curve_set = DEFAULT_CURVES
        else:
            try:
                curve_set = frozenset(Source(c) for c in curves)
            except ValueError as exc:
                raise ConfigInvalid(f"unknown curve source: {exc}") from None
        variants = tuple(
            ModelVariant(
                label=str(v["label"]),
                channel=law_from_dict(v["channel"]),
                doc_base=(None if v.get("doc", {}).get("derived")
                          else law_from_dict(v["doc"])))
            for v in raw.get("variants", ()))
        return ExperimentConfig(
            name=str(raw.get("name", "experiment")),
            channel=channel, doc_base=doc_base, bounds=bounds, alpha=alpha,
            ell=ell, grid=grid,
            samples=int(raw.get("samples", DEFAULT_SAMPLES)),
            seed=int(raw.get("seed", 20260808)),
            workers=int(raw.get("workers", 1)),
            confidence=float(raw.get("confidence", 0.95)),
            curves=curve_set,
            output_prefix=raw.get("output"),
            fmt=str(raw.get("format", "csv")),
            variants=variants,
            skip_coupling_check=bool(raw.get("skip_coupling_check", False)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(f"bad config: {exc!r}") from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


# ---------------------------------------------------------------------------
# Presets: the four simulation experiments, at desk scale
# ---------------------------------------------------------------------------


def _exp(rate: float) -> dict:
    return {"family": "exponential", "rate": rate}


def _weib(index: float, scale: float) -> dict:
    return {"family": "weibull", "index": index, "scale": scale}


_PRESETS: dict[str, dict] = {
    # Exponential documents (rate 2) on an exponential channel (rate 1):
    # power-law index 2, bounds 1/2/4.
    "example1a": {
        "name": "example1a",
        "model": {"channel": _exp(1.0), "doc": _exp(2.0), "bound": [1.0, 2.0, 4.0]},
        "alpha": 2.0,
        "seed": 20260801,
        "curves": ["mc", "oracle", "uniform_approx", "power_law", "exact_integer"],
    },
    # Heavier documents than availability periods: index 0.5.
    "example1b": {
        "name": "example1b",
        "model": {"channel": _exp(2.0), "doc": _exp(1.0), "bound": [1.0, 2.0, 4.0]},
        "alpha": 0.5,
        "seed": 20260802,
        "curves": ["mc", "oracle", "uniform_approx", "power_law"],
    },
    # Same model as example1a, focused on the geometric tail handover.
    "example2": {
        "name": "example2",
        "model": {"channel": _exp(1.0), "doc": _exp(2.0), "bound": [1.0, 2.0, 4.0]},
        "alpha": 2.0,
        "seed": 20260803,
        "curves": ["mc", "oracle", "uniform_approx", "power_law",
                   "exact_integer", "exp_tail", "log_body"],
    },
    # Weibull pairs with matched index; lighter channel tails widen the
    # power-law region. alpha = (scale_A / scale_L)^k = 4 in every variant.
    "example3": {
        "name": "example3",
        "model": {"channel": _weib(1.0, 4.0), "doc": _weib(1.0, 1.0), "bound": 8.0},
        "alpha": 4.0,
        "seed": 20260804,
        "curves": ["mc", "oracle", "uniform_approx", "power_law"],
        "variants": [
            {"label": "k0.5", "channel": _weib(0.5, 16.0), "doc": _weib(0.5, 1.0)},
            {"label": "k1", "channel": _weib(1.0, 4.0), "doc": _weib(1.0, 1.0)},
            {"label": "k2", "channel": _weib(2.0, 2.0), "doc": _weib(2.0, 1.0)},
        ],
    },
    # Gamma documents on an exponential channel: nontrivial slowly varying
    # part, evaluated exactly.
    "example4": {
        "name": "example4",
        "model": {"channel": _exp(2.0),
                  "doc": {"family": "gamma", "rate": 2.0, "shape": 2.0},
                  "bound": [2.0, 3.0, 4.0]},
        "alpha": 1.0,
        "ell": {"kind": "gamma_doc_exact", "doc_rate": 2.0, "shape": 2.0,
                "channel_rate": 2.0},
        "seed": 20260805,
        "curves": ["mc", "oracle", "uniform_approx", "power_law", "exp_tail"],
    },
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset(name: str) -> ExperimentConfig:
    """Named experiment configuration; UnknownPreset for anything else."""
    try:
        raw = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; available: {preset_names()}") from None
    return parse_config(dict(raw))


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


def log_grid(n_min: int, n_max: int, points_per_decade: int = 24) -> list[int]:
    """Unique integers log-spaced at the given density, inclusive of ends."""
    if n_max < n_min:
        raise InvalidParameter("n_max must be >= n_min")
    k_lo = math.floor(points_per_decade * math.log10(max(n_min, 1)))
    k_hi = math.ceil(points_per_decade * math.log10(max(n_max, 1)))
    pts = {n_min, n_max}
    for k in range(k_lo, k_hi + 1):
        n = round(10 ** (k / points_per_decade))
        if n_min <= n <= n_max:
            pts.add(int(n))
    return sorted(pts)


def _auto_n_max(model: CoupledModel) -> int:
    """Ten times the transition point (heuristic fallback without a root)."""
    p = asym.ApproxParams.from_model(model)
    try:
        n_fp = asym.transition_point(p).n_fixed_point
    except NoRoot:
        n_fp = max(10.0, p.alpha / p.gbar_b)
    return max(10, math.ceil(10.0 * n_fp))


# ---------------------------------------------------------------------------
# Reports and the runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    """Per-case agreement summary against the oracle.

    max_rel_err maps source name to the maximum relative error over grid
    points where the oracle is at least the reporting threshold (for the
    log-scale body curve the ratio is taken between logs). ci_coverage is
    the fraction of Monte Carlo intervals containing the oracle value.
    """

    label: str
    bound: float
    oracle_threshold: float
    max_rel_err: dict
    ci_coverage: Optional[float]
    coverage_points: int
    transition: Optional[asym.TransitionReport]
    coupling_residual: Optional[float]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if self.transition is not None:
            d["transition"] = {
                "n_heuristic": self.transition.n_heuristic,
                "n_fixed_point": self.transition.n_fixed_point,
                "bracket": list(self.transition.bracket),
            }
        return d


@dataclass(frozen=True)
class CaseResult:
    label: str
    bound: float
    model: CoupledModel
    grid: tuple[int, ...]
    curves: dict
    oracle: tuple[OracleResult, ...]
    report: ComparisonReport
    files: tuple[Path, ...]


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    cases: tuple[CaseResult, ...]

    @property
    def curves(self) -> list[CcdfCurve]:
        return [c for case in self.cases for c in case.curves.values()]

    @property
    def reports(self) -> list[ComparisonReport]:
        return [case.report for case in self.cases]


def build_model(channel: Law, doc_base: Optional[Law], alpha: float,
                ell: SlowVary, bound: float) -> CoupledModel:
    if doc_base is None:
        return derive_doc_law(channel, alpha, ell, bound)
    return CoupledModel.parametric(channel, doc_base, alpha, ell, bound)


def _nan_point(n: int, source: Source) -> CurvePoint:
    return CurvePoint(n, math.nan, math.nan, math.nan, source)


def _approx_curves(cfg: ExperimentConfig, model: CoupledModel,
                   grid: Sequence[int]) -> dict:
    p = asym.ApproxParams.from_model(model)
    ell_is_one = isinstance(cfg.ell, SlowVaryOne)
    out: dict = {}

    def curve(source: Source, fn) -> CcdfCurve:
        pts = []
        for n in grid:
            try:
                v = fn(p, n)
            except (InvalidParameter, NotInteger, EllNotOne):
                pts.append(_nan_point(n, source))
                continue
            pts.append(CurvePoint(n, v, math.nan, math.nan, source))
        return CcdfCurve(tuple(pts))

    if Source.UNIFORM_APPROX in cfg.curves:
        out[Source.UNIFORM_APPROX] = curve(Source.UNIFORM_APPROX, asym.uniform_approx)
    if Source.POWER_LAW in cfg.curves:
        out[Source.POWER_LAW] = curve(Source.POWER_LAW, asym.power_law_limit)
    if Source.EXACT_INTEGER in cfg.curves:
        out[Source.EXACT_INTEGER] = curve(Source.EXACT_INTEGER, asym.exact_integer_ccdf)
    if Source.EXP_TAIL in cfg.curves:
        fn = asym.exp_tail_asymptote if ell_is_one else asym.exp_tail_general
        out[Source.EXP_TAIL] = curve(Source.EXP_TAIL, fn)
    if Source.LOG_BODY in cfg.curves:
        out[Source.LOG_BODY] = curve(Source.LOG_BODY, asym.log_body)
    return out


def _run_case(cfg: ExperimentConfig, label: str, channel: Law,
              doc_base: Optional[Law], bound: float) -> CaseResult:
    model = build_model(channel, doc_base, cfg.alpha, cfg.ell, bound)

    coupling_residual = None
    if model.mode is CouplingMode.PARAMETRIC:
        residual = validate_coupling(model).max_residual
        coupling_residual = residual
        if residual > COUPLING_TOLERANCE and not cfg.skip_coupling_check:
            raise CouplingInvalid(
                f"case {label}: hazard-proportionality residual {residual:.4g} "
                f"exceeds {COUPLING_TOLERANCE}")

    auto = cfg.grid.n_max is None
    n_max = _auto_n_max(model) if auto else cfg.grid.n_max
    candidate = log_grid(cfg.grid.n_min, n_max, cfg.grid.points_per_decade)

    # The oracle is evaluated regardless of the requested curves: it
    # drives auto-grid trimming and the comparison report.
    floor = MIN_EXPECTED_TAIL_HITS / cfg.samples
    oracle_results: list[OracleResult] = []
    grid: list[int] = []
    prev_log = math.inf
    for n in candidate:
        res = ccdf_exact(model, n)
        if res.log_value > prev_log + 1e-9:
            raise QuadratureFailure(f"oracle curve not monotone at n={n}")
        prev_log = res.log_value
        if auto and res.value < floor and grid:
            break
        oracle_results.append(res)
        grid.append(n)

    curves: dict = {}
    if Source.ORACLE in cfg.curves:
        curves[Source.ORACLE] = CcdfCurve(tuple(
            CurvePoint(r.n, r.value, math.nan, math.nan, Source.ORACLE)
            for r in oracle_results))
    if Source.MONTE_CARLO in cfg.curves:
        tally = run_tally(model, grid, cfg.samples, cfg.seed, cfg.workers)
        curves[Source.MONTE_CARLO] = empirical_ccdf(tally, cfg.confidence)
    curves.update(_approx_curves(cfg, model, grid))

    report = _compare(cfg, label, bound, grid, oracle_results, curves,
                      model, coupling_residual)
    files = tuple(emit_curves(curves, report, cfg, label, grid)) \
        if cfg.output_prefix is not None else ()
    return CaseResult(label, bound, model, tuple(grid), curves,
                      tuple(oracle_results), report, files)


def _compare(cfg: ExperimentConfig, label: str, bound: float,
             grid: Sequence[int], oracle_results: Sequence[OracleResult],
             curves: dict, model: CoupledModel,
             coupling_residual: Optional[float]) -> ComparisonReport:
    oracle_by_n = {r.n: r for r in oracle_results}
    max_err: dict = {}
    for source, curve in curves.items():
        if source in (Source.MONTE_CARLO, Source.ORACLE):
            continue
        worst = None
        for pt in curve.points:
            res = oracle_by_n.get(pt.n)
            if res is None or res.value < cfg.oracle_threshold or math.isnan(pt.value):
                continue
            if source is Source.LOG_BODY:
                err = abs(pt.value / res.log_value - 1.0)
            else:
                err = abs(pt.value - res.value) / res.value
            worst = err if worst is None else max(worst, err)
        max_err[source.value] = worst

    coverage = None
    npoints = 0
    mc = curves.get(Source.MONTE_CARLO)
    if mc is not None:
        hits = 0
        for pt in mc.points:
            res = oracle_by_n.get(pt.n)
            if res is None:
                continue
            npoints += 1
            if pt.ci_lo <= res.value <= pt.ci_hi:
                hits += 1
        coverage = hits / npoints if npoints else None

    try:
        transition = asym.transition_point(asym.ApproxParams.from_model(model))
    except (NoRoot, InvalidParameter):
        transition = None
    return ComparisonReport(label, bound, cfg.oracle_threshold, max_err,
                            coverage, npoints, transition, coupling_residual)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run every case of the experiment; see the module docstring."""
    cases = tuple(_run_case(cfg, label, channel, doc_base, bound)
                  for label, channel, doc_base, bound in cfg.cases())
    return RunResult(cfg, cases)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    if v is None or math.isnan(v):
        return ""
    return format(v, ".17g")


def _rows(curves: dict, grid: Sequence[int]) -> list[dict]:
    by_source = {}
    for source, curve in curves.items():
        by_source[source] = {pt.n: pt for pt in curve.points}
    rows = []
    for n in grid:
        row: dict = {c: None for c in CSV_COLUMNS}
        row["n"] = int(n)
        mc_pt = by_source.get(Source.MONTE_CARLO, {}).get(n)
        if mc_pt is not None:
            row["mc_ccdf"], row["mc_ci_lo"], row["mc_ci_hi"] = \
                mc_pt.value, mc_pt.ci_lo, mc_pt.ci_hi
        for source, col in _SOURCE_COLUMN.items():
            pt = by_source.get(source, {}).get(n)
            if pt is not None and not math.isnan(pt.value):
                row[col] = pt.value
        rows.append(row)
    return rows


def emit_curves(curves: dict, report: ComparisonReport, cfg: ExperimentConfig,
                label: str, grid: Sequence[int]) -> list[Path]:
    """Write the case data file plus its metadata sidecar.

    Returns the created paths. Output location comes from the config
    prefix, resolved against RETXDIST_OUTDIR when relative.
    """
    prefix = Path(cfg.output_prefix)
    outdir = os.environ.get(ENV_OUTDIR)
    if outdir and not prefix.is_absolute():
        prefix = Path(outdir) / prefix
    stem = f"{prefix.name}_{label}" if label else prefix.name
    base = prefix.parent / stem
    rows = _rows(curves, grid)
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        # string concatenation, not with_suffix: labels may contain dots
        if cfg.fmt == "csv":
            data_path = base.parent / (stem + ".csv")
            lines = [",".join(CSV_COLUMNS)]
            for row in rows:
                lines.append(",".join(
                    str(row["n"]) if c == "n" else _fmt(row[c])
                    for c in CSV_COLUMNS))
            data_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        else:
            data_path = base.parent / (stem + ".json")
            payload = {"columns": list(CSV_COLUMNS),
                       "rows": [[row["n"]] + [
                           None if row[c] is None or (isinstance(row[c], float)
                                                      and math.isnan(row[c]))
                           else row[c]
                           for c in CSV_COLUMNS[1:]] for row in rows]}
            data_path.write_text(json.dumps(payload, sort_keys=True, indent=1)
                                 + "\n", encoding="utf-8")
        from . import __version__
        meta = {
            "artifact_version": __version__,
            "case": label,
            "config": cfg.to_dict(),
            "seed": cfg.seed,
            "exp_tail_variant": ("fixed_bound" if isinstance(cfg.ell, SlowVaryOne)
                                 else "general_slow_variation"),
            "report": report.to_dict(),
        }
        meta_path = base.parent / (stem + ".meta.json")
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n",
                             encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write results under {base}: {exc}") from exc
    return [data_path, meta_path]


def read_curve_file(path: Union[str, Path]) -> dict:
    """Reload an emitted data file into {column: list-of-optional-float}."""
    path = Path(path)
    out: dict = {c: [] for c in CSV_COLUMNS}
    if path.suffix == ".json":
        payload = json.loads(path.read_text(encoding="utf-8"))
        for row in payload["rows"]:
            for c, v in zip(payload["columns"], row):
                out[c].append(v)
        return out
    lines = path.read_text(encoding="utf-8").strip().split("\n")
    header = lines[0].split(",")
    if list(header) != list(CSV_COLUMNS):
        raise IoFailure(f"unexpected columns in {path}: {header}")
    for line in lines[1:]:
        for c, cell in zip(header, line.split(",")):
            if cell == "":
                out[c].append(None)
            elif c == "n":
                out[c].append(int(cell))
            else:
                out[c].append(float(cell))
    return out
