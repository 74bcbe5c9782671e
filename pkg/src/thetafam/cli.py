"""Command-line surface: configuration, validation, ingestion, reports.

Every verb reads one TOML config, validates the standing assumptions
before touching any arithmetic, and writes its payload as canonical JSON
(sorted keys, fixed separators, no timestamps), so identical inputs give
byte-identical outputs.  Timing and progress go to a sidecar log next to
the payload, never into it.
"""

import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import euler
from .characters import build_lambda, character_from_spec, phi_psi_split
from .errors import (
    CapExhausted,
    CapOverflow,
    DomainError,
    EigenAmbiguous,
    EigenMismatch,
    InconsistencyFound,
    InsufficientSamples,
    MissingFrobenius,
    NoConvergence,
    NonUnit,
    NotPrimitive,
    NotSelfDual,
    ParseError,
    PrecisionLoss,
    RankDeficient,
    ValidationFailed,
)
from .hecke import (
    DiamondAction,
    QExpansion,
    hecke_T,
    hecke_U_p,
    matrix_ordinary_limit,
    ord_project,
)
from .padic import Zp2, teichmuller
from .quadfield import QuadField, read_ideal_cache, write_ideal_cache
from .synth import line_pipeline, ordinary_span_shear
from .tate import HeegnerPointData, TateCurve, heegner_combine
from .theta import build_g_col, build_g_hida, theta_classical
from .triple import OrdinaryBasis, lp_restrict_line, pipeline_value


def _factor(n):
    out = {}
    m, d = n, 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}")


def _load_character(path):
    data = _read_json(path)
    try:
        return character_from_spec(data)
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc.args[0]!r}")
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}")


class PipelineConfig:
    """One validated run: instance numbers, loaded characters, artifact paths.

    Construction performs every Setting validation and raises
    ValidationFailed naming the violated clause, (A) through (E), before
    any computation is reachable.
    """

    __slots__ = ("p", "prec", "q_cap", "series_cap", "field", "eta1", "eta2",
                 "family_kind", "eigen_spec", "basis_path", "line",
                 "fudge", "curve_path", "point_path", "out_dir", "cache_dir")

    def __init__(self, p, prec, q_cap, series_cap, field, eta1, eta2,
                 family_kind, eigen_spec, basis_path, line, fudge,
                 curve_path, point_path, out_dir, cache_dir):
        self.p = p
        self.prec = prec
        self.q_cap = q_cap
        self.series_cap = series_cap
        self.field = field
        self.eta1 = eta1
        self.eta2 = eta2
        self.family_kind = family_kind
        self.eigen_spec = eigen_spec
        self.basis_path = basis_path
        self.line = line
        self.fudge = fudge
        self.curve_path = curve_path
        self.point_path = point_path
        self.out_dir = out_dir
        self.cache_dir = cache_dir
        self._validate()

    # -- the standing assumptions, as executable clauses ---------------------

    def _validate(self):
        field, p = self.field, self.p
        split = field.prime_splitting(p)
        if split.kind != "inert":
            raise ValidationFailed(
                "A", f"p = {p} is {split.kind} in Q(sqrt(-{field.d_K}))")

        n_f = int(self.eigen_spec["level_tame"])
        fac = _factor(n_f) if n_f > 1 else {}
        if any(e > 1 for e in fac.values()):
            raise ValidationFailed("B", f"tame level {n_f} is not squarefree")
        if math.gcd(n_f, p * field.d_K) != 1:
            raise ValidationFailed(
                "B", f"tame level {n_f} shares a factor with p*d_K = {p * field.d_K}")
        inert = [ell for ell in fac if field.prime_splitting(ell).kind == "inert"]
        if len(inert) % 2:
            raise ValidationFailed(
                "B", f"tame level {n_f} has an odd number of inert primes: {inert}")

        cs = []
        for name, eta in (("eta1", self.eta1), ("eta2", self.eta2)):
            cond = eta.conductor
            if cond.a != 1 or cond.b != 1:
                raise ValidationFailed(
                    "C", f"{name} conductor is not a rational ideal c*p^r")
            m = cond.content
            r = 0
            while m % p == 0:
                m //= p
                r += 1
            if r < 1:
                raise ValidationFailed(
                    "C", f"{name} conductor {cond.content} has no p-part")
            if math.gcd(m, p * field.d_K * n_f) != 1:
                raise ValidationFailed(
                    "C", f"{name} tame conductor {m} is not prime to p*d_K*N_f")
            cs.append(m)

        for eta, name in ((self.eta1, "eta1"), (self.eta2, "eta2")):
            if eta.is_galois_stable():
                raise ValidationFailed(
                    "D", f"{name} is Galois stable, hence induced from a "
                         f"Dirichlet character")
        try:
            phi_psi_split(self.eta1, self.eta2)
        except NotSelfDual as exc:
            raise ValidationFailed("D", str(exc))

        for c in cs:
            for ell in _factor(c):
                if field.prime_splitting(ell).kind == "inert":
                    raise ValidationFailed(
                        "E", f"tame conductor {c} is divisible by the inert "
                             f"prime {ell}")


def load_config(path, out_dir=None, precision=None, qcap=None):
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ParseError(f"{path}: file not found")
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}")

    base = path.parent

    def need(section, key, cast):
        try:
            return cast(raw[section][key])
        except KeyError:
            raise ParseError(f"{path}: missing [{section}] {key}")
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: [{section}] {key}: {exc}")

    p = need("instance", "p", int)
    prec = precision if precision is not None else need("instance", "precision", int)
    q_cap = qcap if qcap is not None else need("instance", "q_cap", int)
    series_cap = need("instance", "series_cap", int)
    if prec < 1 or q_cap < 1 or series_cap < 0:
        raise ParseError(f"{path}: caps and precision must be positive")
    field = QuadField(need("field", "d_K", int))
    eta1 = _load_character(base / need("characters", "eta1", str))
    eta2 = _load_character(base / need("characters", "eta2", str))
    kind = need("family", "kind", str)
    if kind not in ("col", "hida"):
        raise ParseError(f"{path}: [family] kind must be col or hida, got {kind!r}")
    eigen_spec = _read_json(base / need("target", "eigen_data", str))
    if eigen_spec.get("schema") != 1:
        raise ParseError(f"{path}: eigen data schema {eigen_spec.get('schema')} "
                         f"is not supported")
    basis_path = base / need("target", "basis", str)
    line = need("triple", "line", str)
    fudge_rows = raw.get("triple", {}).get("fudge", [])
    try:
        fudge = {int(ell): int(v) for ell, v in fudge_rows}
    except (TypeError, ValueError):
        raise ParseError(f"{path}: [triple] fudge must be pairs [ell, unit]")
    curve_path = base / need("tate", "curve", str)
    point_path = base / need("tate", "point", str)
    out = Path(out_dir) if out_dir is not None else \
        Path(raw.get("output", {}).get("dir", "out"))
    cache = Path(raw.get("output", {}).get("cache", out / ".cache"))
    return PipelineConfig(p, prec, q_cap, series_cap, field, eta1, eta2,
                          kind, eigen_spec, basis_path, line, fudge,
                          curve_path, point_path, out, cache)


# -- ingestion ----------------------------------------------------------------

def load_eigenbasis(path):
    """Read a basis file, certify full rank, and replay the Hecke action.

    Every declared eigenvalue at ell <= 13 is checked against the literal
    operator on the loaded expansion; a contradiction raises EigenMismatch
    with the prime and both values.  Rank failures surface from the basis
    constructor as RankDeficient.
    """
    data = _read_json(path)
    if data.get("schema") != 1:
        raise ParseError(f"{path}: unsupported basis schema {data.get('schema')}")
    try:
        p = int(data["p"])
        prec = int(data["precision"])
        level = int(data["level"])
        weight = int(data["weight"])
        rows = data["elements"]
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc.args[0]!r}")
    ctx = Zp2(p, prec)
    char = DiamondAction(level, lambda d: ctx(d) ** (weight - 1), p=p)
    elements, metas = [], []
    for row in rows:
        try:
            coeffs = [ctx(int(c0), int(c1)) for c0, c1 in row["coeffs"]]
            meta = None
            if "eigen" in row:
                meta = {int(ell): ctx(int(v)) for ell, v in row["eigen"].items()}
                if "a_p" in row:
                    meta["a_p"] = ctx(int(row["a_p"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: malformed element row: {exc}")
        elements.append(QExpansion(coeffs, level, char=char, weight=weight,
                                   zero=ctx(0)))
        metas.append(meta)
    basis = OrdinaryBasis(elements, metas, level=level, weight=weight)
    for xi, meta in zip(elements, metas):
        if not meta:
            continue
        for ell in (2, 3, 5, 7, 11, 13):
            if ell == p or ell not in meta:
                continue
            image = hecke_T(ell, xi)
            if not image.agrees_with(xi.scale(meta[ell]), cap=image.Q):
                raise EigenMismatch(ell, meta[ell], image.a(1))
        if "a_p" in meta:
            image = hecke_U_p(xi, p)
            if not image.agrees_with(xi.scale(meta["a_p"]), cap=image.Q):
                raise EigenMismatch(p, meta["a_p"], image.a(1))
    return basis


def _cached_ideals(config):
    """The ideal list for (d_K, q_cap), through the content-keyed cache."""
    key = hashlib.sha256(
        f"{config.field.d_K}:{config.q_cap}".encode()).hexdigest()[:16]
    config.cache_dir.mkdir(parents=True, exist_ok=True)
    path = config.cache_dir / f"ideals-{key}.csv"
    if not path.exists():
        tmp = path.with_suffix(".tmp")
        write_ideal_cache(config.field, config.q_cap, tmp)
        os.replace(tmp, path)
    return read_ideal_cache(config.field, path)


# -- payload builders, one per verb ---------------------------------------------

def cmd_theta(config):
    ideals = _cached_ideals(config)
    th = theta_classical(config.eta1, k=1, Q=config.q_cap, ideals=ideals)
    return {
        "verb": "theta",
        "weight": 1,
        "level": th.level,
        "root_order": config.eta1.M,
        "q_cap": th.Q,
        "coefficients": [list(c.c) for c in th.coeffs],
    }


def cmd_family(config):
    lam = build_lambda(config.field, config.p, config.prec)
    if config.family_kind == "col":
        fam = build_g_col(config.eta1, lam, Q=config.q_cap,
                          D=config.series_cap)
    else:
        fam = build_g_hida(config.eta1, lam, Q=config.q_cap)
    payload = fam.to_json_dict()
    payload["verb"] = "family"
    return payload


def cmd_ordproj(config):
    lam = build_lambda(config.field, config.p, config.prec)
    fam = build_g_col(config.eta1, lam, Q=config.q_cap, D=config.series_cap)
    up = hecke_U_p(fam.series, config.p)
    projected = ord_project(fam.series, config.p)
    ctx = Zp2(config.p, 12)
    alpha = teichmuller(ctx(2))
    span = ordinary_span_shear(ctx, alpha, 40)
    e_mat = matrix_ordinary_limit(span.matrix)
    vp_coords = span.project_ordinary((ctx(0), ctx(1)))
    return {
        "verb": "ordproj",
        "family_kind": "col",
        "u_p_image_zero": up.is_zero(),
        "ordinary_projection_zero": projected.is_zero(),
        "span": {
            "u_p_eigenvalue": alpha.to_digits(),
            "projector": [[x.to_digits() for x in row] for row in e_mat],
            "v_p_line_projection": [x.to_digits() for x in vp_coords],
        },
    }


def _series_payload(series):
    coeffs = {}
    for mono, c in sorted(series.coeffs.items()):
        coeffs[str(mono[0])] = c.to_digits()
    return {"variable": series.variables[0], "cap": series.caps[0],
            "precision": series.ctx.N, "coefficients": coeffs}


def cmd_triple(config):
    basis = load_eigenbasis(config.basis_path)
    spec = config.eigen_spec
    corner_sign = int(spec.get("corner_a_p", 1))
    eta_f = int(spec["eta_f"])
    level_tame = int(spec["level_tame"])
    corner_cfg = line_pipeline(ap2=corner_sign, eta=eta_f,
                               level_tame=level_tame,
                               fudge_spec=config.fudge, label="cli")
    corner = pipeline_value(corner_cfg, 2)
    pure_cfg = line_pipeline(corner_euler=False, fudge_on=False, eta=1,
                             level_tame=14, label="cli-pure")
    report = lp_restrict_line(pure_cfg, config.line)
    return {
        "verb": "triple",
        "ingested_basis": {
            "dim": basis.dim,
            "level": basis.level,
            "weight": basis.weight,
            "pivots": list(basis.pivots),
        },
        "corner": {
            "weight": 2,
            "a_p": corner_sign,
            "value": corner.to_digits(),
            "is_zero": corner.is_zero(),
        },
        "line": {
            "name": report.line,
            "samples": list(report.samples),
            "series": _series_payload(report.series),
        },
    }


def cmd_euler(config):
    rows = euler.consistency_check(p=config.p)
    return {"verb": "euler", "rows": rows, "failures": 0}


def _euler_csv(payload):
    buf = io.StringIO()
    fields = ["k", "n", "case", "a_p", "character", "identity", "value",
              "root_number", "ok"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in payload["rows"]:
        writer.writerow(row)
    return buf.getvalue()


def cmd_tate(config):
    curve = TateCurve.from_descriptor(_read_json(config.curve_path))
    ctx = Zp2(curve.p, curve.q_E.prec)
    point = HeegnerPointData.from_json_dict(_read_json(config.point_path), ctx)
    plus, minus = heegner_combine(curve, point)
    self_log = curve.log(curve.q_E)
    return {
        "verb": "tate",
        "curve": curve.descriptor(),
        "period_valuation": curve.v,
        "log_qE_of_qE": self_log.to_digits(),
        "log_qE_of_qE_zero": self_log.is_zero(),
        "point": point.label,
        "plus": plus.to_digits(),
        "minus": minus.to_digits(),
        "case": "plus" if minus.is_zero() else "minus",
    }


def cmd_selfcheck(config):
    checks = []

    th = theta_classical(config.eta1, k=1, Q=60)
    ok = all(hecke_T(ell, th).agrees_with(th.scale(th.a(ell)),
                                          cap=60 // ell)
             for ell in (2, 3))
    checks.append({"name": "theta-eigen", "ok": ok})

    try:
        euler.consistency_check(p=config.p)
        checks.append({"name": "euler-grid", "ok": True})
    except InconsistencyFound:
        checks.append({"name": "euler-grid", "ok": False})

    curve = TateCurve(config.p, 1, j=Fraction(-1, config.p ** 3), N=8)
    checks.append({"name": "tate-roundtrip",
                   "ok": curve.log(curve.q_E).is_zero()})

    corner = pipeline_value(line_pipeline(Q=24, label="selfcheck"), 2)
    checks.append({"name": "triple-corner", "ok": corner.is_zero()})

    return {"verb": "selfcheck", "checks": checks,
            "all_ok": all(c["ok"] for c in checks)}


_BUILDERS = {
    "theta": cmd_theta,
    "family": cmd_family,
    "ordproj": cmd_ordproj,
    "triple": cmd_triple,
    "euler": cmd_euler,
    "tate": cmd_tate,
    "selfcheck": cmd_selfcheck,
}


# -- emission -------------------------------------------------------------------

def canonical_json(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _atomic_write(path, text):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def run_verb(verb, config):
    """Build the verb's payload and write it (atomically) under out_dir.

    Returns the list of written payload paths.  The sidecar log receives
    the wall time and never shares a file with payload data.
    """
    t0 = time.monotonic()
    payload = _BUILDERS[verb](config)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    main_path = config.out_dir / f"{verb}.json"
    _atomic_write(main_path, canonical_json(payload))
    written.append(main_path)
    if verb == "euler":
        csv_path = config.out_dir / "euler.csv"
        _atomic_write(csv_path, _euler_csv(payload))
        written.append(csv_path)
    elapsed = time.monotonic() - t0
    _atomic_write(config.out_dir / f"{verb}.log",
                  f"{verb}: ok in {elapsed * 1000:.1f} ms\n")
    return written


_VALIDATION_ERRORS = (ValidationFailed, NotSelfDual, RankDeficient,
                      EigenMismatch, EigenAmbiguous, NotPrimitive,
                      MissingFrobenius, DomainError)
_NUMERIC_ERRORS = (PrecisionLoss, NoConvergence, NonUnit, InconsistencyFound,
                   CapExhausted, CapOverflow, InsufficientSamples)


def _execute(verb, config_path, out_dir, precision, qcap, threads):
    if threads < 1:
        click.echo("error: --threads must be at least 1", err=True)
        sys.exit(2)
    try:
        config = load_config(config_path, out_dir=out_dir,
                             precision=precision, qcap=qcap)
        written = run_verb(verb, config)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except _NUMERIC_ERRORS as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(4)
    except _VALIDATION_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for path in written:
        click.echo(str(path))
    if verb == "selfcheck":
        report = json.loads((config.out_dir / "selfcheck.json").read_text())
        if not report["all_ok"]:
            sys.exit(4)


@click.group()
def main():
    """Exact p-adic reports for theta families and their line restrictions."""


def _verb(name, help_text):
    @main.command(name=name, help=help_text)
    @click.option("--config", "config_path", default="fixtures/config.toml",
                  show_default=True, help="TOML run configuration.")
    @click.option("--out", "out_dir", default=None,
                  help="Output directory (overrides the config).")
    @click.option("--precision", type=int, default=None,
                  help="Working precision override.")
    @click.option("--qcap", type=int, default=None,
                  help="q-expansion cap override.")
    @click.option("--threads", type=int, default=1, show_default=True,
                  help="Accepted for interface stability; single process.")
    def _cmd(config_path, out_dir, precision, qcap, threads):
        _execute(name, config_path, out_dir, precision, qcap, threads)

    return _cmd


_verb("theta", "Classical weight-1 theta expansion of eta1.")
_verb("family", "The configured family object as JSON.")
_verb("ordproj", "Ordinary projector facts: kill the family, project spans.")
_verb("triple", "Corner value and line restriction of the controlled pipeline.")
_verb("euler", "Local multiplier consistency table.")
_verb("tate", "Tate logarithms and the Heegner combination case.")
_verb("selfcheck", "Small cross-module battery; nonzero exit on failure.")


if __name__ == "__main__":
    main()
