"""Batch experiment driver: strict JSON configs, deterministic reports.

Each experiment kind maps onto one module's machinery and emits CSV/JSON
reports plus a manifest with the config hash and content hashes of every
report file. Identical configs produce byte-identical outputs, for any
worker count, because all randomness derives from the single config seed
and all aggregation is keyed by input index.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import pcf, perturb, regularity, roof, spectral, util
from .errors import AnosovLabError, ConfigInvalid, ExperimentFailed
from .flow import SuspensionFlow
from .roof import RoofFunction, TrigPolynomial
from .spectral import IntegerMatrix

KINDS = ("catalog", "livshits", "pcf", "subbundle", "claim44", "sweep", "bunching")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    matrix: dict | None = None
    roof: dict | None = None
    params: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(payload: dict) -> "ExperimentConfig":
        if not isinstance(payload, dict):
            raise ConfigInvalid("config must be a JSON object")
        allowed = {"kind", "seed", "matrix", "roof", "params"}
        unknown = set(payload) - allowed
        if unknown:
            raise ConfigInvalid(f"unknown config fields: {sorted(unknown)}")
        kind = payload.get("kind")
        if kind not in KINDS:
            raise ConfigInvalid(f"kind must be one of {KINDS}, got {kind!r}")
        seed = payload.get("seed", 0)
        if not isinstance(seed, int) or seed < 0 or seed >= 2**64:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        matrix = payload.get("matrix")
        if matrix is not None:
            if not isinstance(matrix, dict) or set(matrix) - {"poly", "entries"}:
                raise ConfigInvalid("matrix spec allows only 'poly' or 'entries'")
            if ("poly" in matrix) == ("entries" in matrix):
                raise ConfigInvalid("matrix spec needs exactly one of poly/entries")
        roof_spec = payload.get("roof")
        if roof_spec is not None:
            if not isinstance(roof_spec, dict) or set(roof_spec) - {"constant", "terms"}:
                raise ConfigInvalid("roof spec allows only 'constant' and 'terms'")
        params = payload.get("params", {})
        if not isinstance(params, dict):
            raise ConfigInvalid("params must be an object")
        return ExperimentConfig(
            kind=kind, seed=seed, matrix=matrix, roof=roof_spec, params=dict(params)
        )

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed, "params": self.params}
        if self.matrix is not None:
            out["matrix"] = self.matrix
        if self.roof is not None:
            out["roof"] = self.roof
        return out

    def content_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def load_config(path: Path) -> ExperimentConfig:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigInvalid(f"cannot read config: {err}") from err
    cfg = ExperimentConfig.from_dict(payload)
    round_trip = ExperimentConfig.from_dict(cfg.to_dict())
    if round_trip.to_dict() != cfg.to_dict():
        raise ConfigInvalid("config does not round-trip losslessly")
    return cfg


def build_matrix(spec: dict | None) -> IntegerMatrix:
    if spec is None:
        raise ConfigInvalid("this experiment needs a matrix spec")
    try:
        if "poly" in spec:
            return IntegerMatrix.companion([int(c) for c in spec["poly"]])
        return IntegerMatrix([[int(v) for v in row] for row in spec["entries"]])
    except (ValueError, TypeError) as err:
        raise ConfigInvalid(f"invalid matrix spec: {err}") from err


def build_roof(spec: dict | None, dim: int) -> RoofFunction:
    if spec is None:
        raise ConfigInvalid("this experiment needs a roof spec")
    try:
        poly = TrigPolynomial.constant(float(spec.get("constant", 0.0)), dim)
        for term in spec.get("terms", []):
            unknown = set(term) - {"k", "re", "im"}
            if unknown:
                raise ConfigInvalid(f"unknown roof term fields: {sorted(unknown)}")
            k = tuple(int(v) for v in term["k"])
            coeff = complex(float(term.get("re", 0.0)), float(term.get("im", 0.0)))
            neg = tuple(-v for v in k)
            poly = poly + TrigPolynomial(dim, {k: coeff, neg: coeff.conjugate()})
        return RoofFunction(poly)
    except ConfigInvalid:
        raise
    except (ValueError, TypeError, KeyError) as err:
        raise ConfigInvalid(f"invalid roof spec: {err}") from err


def _parse_fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as err:
        raise ConfigInvalid(f"invalid rational {text!r}: {err}") from err


# ---------------------------------------------------------------------------
# experiment runners


def _run_catalog(cfg, out, workers):
    p = _take(cfg.params, {"d": int, "coeff_bound": int})
    entries = spectral.enumerate_catalog(p["d"], p["coeff_bound"])
    spectral.export_catalog_csv(entries, out / "catalog.csv")
    util.write_json(out / "catalog_summary.json", {
        "count": len(entries),
        "satisfied": sum(1 for e in entries if e.gap.satisfied),
        "complex_pairs": sum(1 for e in entries if e.data.complex_unstable_pair),
    })
    return ["catalog.csv", "catalog_summary.json"]


def _run_livshits(cfg, out, workers):
    p = _take(cfg.params, {
        "trunc": int, "n_max": int, "tol": float,
        "plant_coboundary": (dict, type(None)),
    }, optional={"plant_coboundary": None, "tol": 1e-8, "n_max": 6})
    matrix = build_matrix(cfg.matrix)
    roof_fn = build_roof(cfg.roof, matrix.dim)
    plant = p["plant_coboundary"]
    if plant is not None:
        unknown = set(plant) - {"amplitude", "freq"}
        if unknown:
            raise ConfigInvalid(f"unknown plant fields: {sorted(unknown)}")
        u = TrigPolynomial.sine(float(plant["amplitude"]),
                                tuple(int(v) for v in plant["freq"]), matrix.dim)
        roof_fn = RoofFunction(roof_fn.poly + u.compose_matrix(matrix) - u)
    report = roof.periodic_obstructions(roof_fn, matrix, p["n_max"])
    util.write_csv(out / "obstructions.csv", roof.OBSTRUCTION_CSV_HEADER,
                   roof.obstruction_csv_rows(report))
    payload = {
        "spread": report.spread,
        "n_orbits": len(report.orbits),
        "constant_equivalent": bool(report.spread <= p["tol"]),
    }
    try:
        sol = roof.solve_coboundary(roof_fn, matrix, p["trunc"],
                                    obstruction_tol=p["tol"],
                                    obstruction_n_max=p["n_max"])
        payload.update({
            "solved": True,
            "constant_c": sol.constant_c,
            "residual_sup": sol.residual_sup,
            "transfer_terms": sol.transfer_u.to_json_dict(),
        })
    except roof.ObstructionNonzero as err:
        payload.update({"solved": False, "rejection": str(err)})
    util.write_json(out / "livshits.json", payload)
    return ["obstructions.csv", "livshits.json"]


def _run_pcf(cfg, out, workers):
    p = _take(cfg.params, {
        "n_samples": int, "s_scale": float, "u_scale": float, "tol": float,
    }, optional={"s_scale": 0.02, "u_scale": 0.02, "tol": 1e-8})
    matrix = build_matrix(cfg.matrix)
    flow = SuspensionFlow(matrix, build_roof(cfg.roof, matrix.dim))
    quads = pcf.sample_quadrilaterals(
        flow, p["n_samples"], cfg.seed, s_scale=p["s_scale"], u_scale=p["u_scale"]
    )
    samples = util.parallel_map(
        lambda q: pcf.temporal_distance_sample(flow, q, tol=p["tol"]), quads,
        workers=workers,
    )
    util.write_csv(out / "samples.csv", pcf.sample_csv_header(matrix.dim),
                   pcf.sample_csv_rows(samples))
    util.write_json(out / "pcf_summary.json", {
        "n_samples": len(samples),
        "max_abs_series": max((abs(s.value_series) for s in samples), default=0.0),
        "max_discrepancy": max((s.discrepancy for s in samples), default=0.0),
    })
    return ["samples.csv", "pcf_summary.json"]


def _run_subbundle(cfg, out, workers):
    p = _take(cfg.params, {
        "base_point": list, "n_pairs": int, "budget": int,
        "translation": list, "patch_radius": float, "grid_n": int,
    }, optional={"n_pairs": 2, "budget": 200, "patch_radius": 0.008, "grid_n": 3})
    matrix = build_matrix(cfg.matrix)
    flow = SuspensionFlow(matrix, build_roof(cfg.roof, matrix.dim))
    bp = flow.make_point([float(v) for v in p["base_point"]], 0.0)
    pairs = pcf.find_independent_pairs(
        flow, bp, count=p["n_pairs"], seed=cfg.seed, budget=p["budget"]
    )
    kernel = pcf.matching_kernel_dimension(flow, bp, pairs)
    translation = tuple(_parse_fraction(v) for v in p["translation"])
    flow2, conj = pcf.translate_flow(flow, translation)
    rec = pcf.reconstruct_conjugacy_patch(
        flow, flow2, conj, bp, pairs,
        patch_radius=p["patch_radius"], grid_n=p["grid_n"],
    )
    util.write_json(out / "subbundle.json", {
        "kernel_dim": kernel.kernel_dim,
        "gradients": [list(g) for g in kernel.gradients],
        "reconstruction_sup_error": rec.sup_error,
        "n_grid": int(rec.grid_offsets.shape[0]),
    })
    return ["subbundle.json"]


def _run_claim44(cfg, out, workers):
    p = _take(cfg.params, {
        "q_period": int, "amplitude": float, "n_points": int,
        "norm_min": float, "norm_max": float,
    }, optional={"q_period": 4, "amplitude": 0.1, "n_points": 25,
                 "norm_min": 1e-4, "norm_max": 1e-1})
    matrix = build_matrix(cfg.matrix)
    flow = SuspensionFlow(matrix, build_roof(cfg.roof, matrix.dim))
    setup = perturb.kappa_experiment(
        flow, q_period=p["q_period"], norm_range=(p["norm_min"], p["norm_max"]),
        n_points=p["n_points"], amplitude=p["amplitude"],
    )
    report = perturb.claim44_check(setup.chart, setup.datum, setup.bump, setup.claim_steps)
    fit = perturb.remainder_exponent(setup.chart, setup.datum, setup.bump, setup.x_sequence)
    rows = []
    for h, lhs, err in zip(report.x_steps, report.lhs_fd, report.errors):
        rows.append([h, ";".join(util.format_float(v) for v in lhs),
                     ";".join(util.format_float(v) for v in report.rhs), err])
    util.write_csv(out / "claim44_residuals.csv",
                   ["step", "lhs_fd", "rhs", "abs_err"], rows)
    util.write_json(out / "claim44.json", {
        "rhs": list(report.rhs),
        "errors": list(report.errors),
        "fitted_order": report.fitted_order,
        "kappa": report.kappa,
        "remainder_exponent": fit.exponent,
        "remainder_norms": list(fit.norms),
        "remainder_residuals": list(fit.residuals),
        "y_r": setup.datum.y_r,
        "homoclinic_m": list(setup.homoclinic_m),
    })
    return ["claim44_residuals.csv", "claim44.json"]


def _run_sweep(cfg, out, workers):
    p = _take(cfg.params, {
        "q_period": int, "n_directions": int, "amplitudes": list,
    }, optional={"n_directions": 8, "amplitudes": [0.01, 0.05, 0.1]})
    matrix = build_matrix(cfg.matrix)
    data = spectral.spectral_data(matrix)
    catalog = spectral.invariant_unstable_subspaces(data)
    flow = SuspensionFlow(matrix, build_roof(cfg.roof, matrix.dim))
    chart = perturb.SectionChart(flow)
    cands = perturb.find_heteroclinic_data(chart, p["q_period"])
    datum = perturb.make_heteroclinic_datum(
        chart, cands[0].q_orbit, cands[0].q_index, cands[0].offset
    )
    rng = np.random.default_rng(cfg.seed)
    dirs = rng.normal(size=(p["n_directions"], chart.dim_unstable))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    grid = [a * d for d in dirs for a in (float(x) for x in p["amplitudes"])]
    report = perturb.grassmannian_sweep(chart, datum, grid, catalog)
    util.write_json(out / "sweep.json", {
        "n_subspaces": len(catalog.subspaces),
        "vacuous": report.vacuous,
        "diameter": report.diameter,
        "any_gradient_avoids_all": report.any_gradient_avoids_all,
        "entries": [
            {
                "gradient": list(e.gradient),
                "contained": list(e.contained_indices),
                "avoids_all": e.avoids_all,
            }
            for e in report.entries
        ],
    })
    return ["sweep.json"]


def _run_bunching(cfg, out, workers):
    p = _take(cfg.params, {
        "roof_mean": float, "t_multiples": list,
    }, optional={"roof_mean": 1.0, "t_multiples": [1, 2, 4]})
    matrix = build_matrix(cfg.matrix)
    data = spectral.spectral_data(matrix)
    reports = [
        regularity.bunching_report(data, p["roof_mean"], float(m) * p["roof_mean"])
        for m in p["t_multiples"]
    ]
    util.write_csv(out / "bunching.csv", regularity.BUNCHING_CSV_HEADER,
                   regularity.bunching_csv_rows(reports))
    first = reports[0]
    util.write_json(out / "bunching.json", {
        "stable_sup_nu1": first.stable_sup(1.0),
        "weak_sup_nu1": first.weak_stable_sup(1.0),
        "nu_max_stable": first.nu_max_stable,
        "nu_max_weak": first.nu_max_weak,
        "volume_product": first.volume_product,
    })
    return ["bunching.csv", "bunching.json"]


_RUNNERS = {
    "catalog": _run_catalog,
    "livshits": _run_livshits,
    "pcf": _run_pcf,
    "subbundle": _run_subbundle,
    "claim44": _run_claim44,
    "sweep": _run_sweep,
    "bunching": _run_bunching,
}


def _take(params: dict, schema: dict, optional: dict | None = None) -> dict:
    optional = optional or {}
    unknown = set(params) - set(schema)
    if unknown:
        raise ConfigInvalid(f"unknown params: {sorted(unknown)}")
    out = {}
    for key, typ in schema.items():
        if key in params:
            value = params[key]
            types = typ if isinstance(typ, tuple) else (typ,)
            if float in types and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            if not isinstance(value, types) or isinstance(value, bool):
                raise ConfigInvalid(f"param {key} has wrong type")
            out[key] = value
        elif key in optional:
            out[key] = optional[key]
        else:
            raise ConfigInvalid(f"missing param {key}")
    return out


def run_experiment(
    config: ExperimentConfig, out_dir: Path, workers: int = 1
) -> list[Path]:
    """Dispatch one experiment; returns the written report paths.

    Raises ConfigInvalid for bad configs and ExperimentFailed when a module
    operation aborts; reports plus a manifest with content hashes land in
    out_dir either way on success.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runner = _RUNNERS[config.kind]
    try:
        names = runner(config, out, workers)
    except ConfigInvalid:
        raise
    except AnosovLabError as err:
        raise ExperimentFailed(f"{config.kind}: {err}") from err
    except (ValueError, ArithmeticError) as err:
        raise ConfigInvalid(f"{config.kind}: {err}") from err
    manifest = {
        "kind": config.kind,
        "config_hash": config.content_hash(),
        "seed": config.seed,
        "reports": [
            {
                "name": name,
                "sha256": hashlib.sha256((out / name).read_bytes()).hexdigest(),
            }
            for name in sorted(names)
        ],
    }
    util.write_json(out / "manifest.json", manifest)
    return [out / name for name in names] + [out / "manifest.json"]
