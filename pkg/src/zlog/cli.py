"""Command-line front end: ``zlog <command> --config model.json ...``.

The config file names a model, the subcommand names a computation, and the
artifacts are CSV, PGM, or JSON written with a fixed 17-significant-digit
float format so identical inputs reproduce identical bytes.  Exit codes:
0 success, 2 validation (bad flags, bad config, undefined zeta function),
3 numeric failure (clearance violations, quadrature that will not converge,
a verify discrepancy above its gate).  Failures print one JSON object on
stderr.

Config kinds -- every schema rejects unknown keys:

  abelian   {"q", "charpoly"}            charpoly with ascending coefficients
  motive    {"q", "charpoly"|"weights"}  full motive / supersingular pieces
  lambda    {"q", "n"|"cells"}           punctured affine space / cellular
  raw       {"data": [{"eps","lambda"}], "c1","s1","beta","h","s2","q",
             "truncation"}               the four factors spelled out
  variety   {"family","params","q"} or {"ambient","n","equations","p","k"}

Variety configs carry point counts only, so they serve coeffs and
recurrence; the continuation commands need spectral data and reject them.
An optional "options" object supplies defaults for flags of the same name
(explicit flags win).

Conventions: complex numbers are "a+bi" strings, windows are
"remin:remax:immin:immax", paths are semicolon-separated vertex lists and
always start at the origin (a leading 0 may be omitted).  Grid rasters
encode the phase of d/dz log Z in [0, 255] (support points show up as
phase vortices); the sibling CSV carries the full complex values, because
rasters are for eyeballing and CSV is for assertions.
"""

from __future__ import annotations

import argparse
import cmath
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional

import jsonschema
import numpy as np

from zlog import kernels, series
from zlog.abelplana import (
    STEP_KINDS,
    BoxFunction,
    VerifyReport,
    box_identity_with_series_edges,
    box_sweep,
    verify_box_identity,
    verify_classical,
    verify_step_integrals,
)
from zlog.cloud import build_cloud
from zlog.continuation import (
    POLE_CLEARANCE,
    OrderMismatch,
    PathSpec,
    ZlogModel,
    abelian_model,
    cellular_model,
    eval_tail_w,
    eval_zlog,
    lambda_model,
    locate_weil_poles,
    model_support,
    monodromy_expected,
    monodromy_loop,
    motive_model,
    raw_model,
    residue_estimate,
)
from zlog.counts import (
    CountSequence,
    VarietySpec,
    counts_from_family,
    counts_from_variety,
    counts_from_weil_sequence,
)
from zlog.divisor import Window, build_support, periodify, support_pullback
from zlog.errors import NumericFailure, ValidationError
from zlog.motive import (
    full_motive_from_charpoly,
    select_truncation,
    spectral,
    supersingular_motive,
    weil_from_charpoly,
)
from zlog.recurrence import falsify_report

TWO_PI = 2.0 * math.pi

# ---------------------------------------------------------------------------
# scalar parsing
# ---------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """"a+bi" -> complex; bare reals, bare "i", and "2-i" all work."""
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ValidationError("empty complex literal")
    u = s.replace("i", "j")
    if u.endswith("j"):
        head = u[:-1]
        if head in ("", "+", "-"):
            u = head + "1j"
        elif head[-1] in "+-" and (len(head) < 2 or head[-2] not in "eE"):
            u = head + "1j"
    try:
        z = complex(u)
    except ValueError as exc:
        raise ValidationError(f"cannot parse complex number {text!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError(f"complex literal {text!r} is not finite")
    return z


def parse_window(text: str) -> Window:
    parts = str(text).split(":")
    if len(parts) != 4:
        raise ValidationError("window must be remin:remax:immin:immax")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise ValidationError(f"cannot parse window {text!r}") from exc
    if any(not math.isfinite(v) for v in vals):
        raise ValidationError("window bounds must be finite")
    return Window(*vals)


def parse_path(text: str, clearance: float) -> PathSpec:
    verts = [parse_complex(p) for p in str(text).split(";") if p.strip()]
    if not verts:
        raise ValidationError("path needs at least one vertex")
    if verts[0] != 0:
        verts.insert(0, 0j)
    return PathSpec(vertices=tuple(verts), clearance=clearance)


def _as_fraction(value) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, int):
            return Fraction(value)
        return Fraction(float(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse rational {value!r}") from exc


def _as_complex_field(value) -> complex:
    if isinstance(value, str):
        return parse_complex(value)
    return complex(value)


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------


def _json_text(obj) -> str:
    """JSON with %.17g floats; non-finite floats become null, Fractions
    become "p/q" strings, complex numbers {"re": .., "im": ..}."""
    if isinstance(obj, np.generic):
        obj = obj.item()
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return "%.17g" % obj if math.isfinite(obj) else "null"
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, complex):
        return _json_text({"re": obj.real, "im": obj.imag})
    if isinstance(obj, dict):
        inner = ", ".join(
            f"{json.dumps(str(k))}: {_json_text(v)}" for k, v in obj.items()
        )
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_text(v) for v in obj) + "]"
    raise ValidationError(f"cannot serialize {type(obj).__name__} to JSON")


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_pgm(path: str, pixels: np.ndarray) -> None:
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pixels.tobytes())


# ---------------------------------------------------------------------------
# config schema
# ---------------------------------------------------------------------------

_NUMBER_OR_STRING = {"type": ["number", "string"]}

_OPTIONS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "terms": {"type": "integer", "minimum": 1},
        "window": {"type": "string"},
        "res": {"type": "integer", "minimum": 2},
        "workers": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "dmax": {"type": "integer", "minimum": 1},
        "horizon": {"type": "integer", "minimum": 1},
        "clearance": {"type": "number", "exclusiveMinimum": 0},
    },
}

_TRUNCATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "K": {"type": "number", "exclusiveMinimum": 0},
        "r0": {"type": "integer", "minimum": 1},
        "L_max": {"type": "integer", "minimum": 8},
        "J_max": {"type": "integer", "minimum": 8},
        "M": {"type": "number", "exclusiveMinimum": 0},
        "tail_base": {"type": "number", "minimum": 0},
    },
}

_TERM_SCHEMA = {"type": "array", "minItems": 2, "maxItems": 2}

_KIND_SCHEMAS = {
    "abelian": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "q", "charpoly"],
        "properties": {
            "kind": {"const": "abelian"},
            "q": {"type": "integer", "minimum": 2},
            "charpoly": {
                "type": "array",
                "items": {"type": "integer"},
                "minItems": 2,
            },
            "options": _OPTIONS_SCHEMA,
        },
    },
    "motive": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "q"],
        "properties": {
            "kind": {"const": "motive"},
            "q": {"type": "integer", "minimum": 2},
            "charpoly": {
                "type": "array",
                "items": {"type": "integer"},
                "minItems": 2,
            },
            "weights": {
                "type": "array",
                "items": {"type": "integer", "minimum": 0},
                "minItems": 1,
            },
            "m": {"type": "integer", "minimum": 0},
            "options": _OPTIONS_SCHEMA,
        },
        "oneOf": [
            {"required": ["charpoly"], "properties": {"weights": False}},
            {"required": ["weights"], "properties": {"charpoly": False}},
        ],
    },
    "lambda": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "q"],
        "properties": {
            "kind": {"const": "lambda"},
            "q": {"type": "integer", "minimum": 2},
            "n": {"type": "integer", "minimum": 1},
            "cells": {
                "type": "array",
                "items": {"type": "integer", "minimum": 0},
                "minItems": 1,
            },
            "options": _OPTIONS_SCHEMA,
        },
        "oneOf": [
            {"required": ["n"], "properties": {"cells": False}},
            {"required": ["cells"], "properties": {"n": False}},
        ],
    },
    "raw": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind", "data"],
        "properties": {
            "kind": {"const": "raw"},
            "data": {
                "type": "array",
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["eps", "lambda"],
                    "properties": {
                        "eps": _NUMBER_OR_STRING,
                        "lambda": _NUMBER_OR_STRING,
                    },
                },
            },
            "c1": {"type": "number"},
            "s1": {"type": "integer", "minimum": 1},
            "beta": {"type": "number"},
            "h": _NUMBER_OR_STRING,
            "s2": {"type": "integer", "minimum": 1},
            "q": {"type": "integer", "minimum": 2},
            "truncation": _TRUNCATION_SCHEMA,
            "options": _OPTIONS_SCHEMA,
        },
    },
    "variety": {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind"],
        "properties": {
            "kind": {"const": "variety"},
            "family": {"type": "string"},
            "params": {"type": "array", "items": {"type": "integer"}},
            "q": {"type": "integer", "minimum": 2},
            "ambient": {"enum": ["affine", "projective"]},
            "n": {"type": "integer", "minimum": 0},
            "equations": {
                "type": "array",
                "items": {"type": "array", "items": _TERM_SCHEMA, "minItems": 1},
            },
            "p": {"type": "integer", "minimum": 2},
            "k": {"type": "integer", "minimum": 1},
            "options": _OPTIONS_SCHEMA,
        },
        "oneOf": [
            {
                "required": ["family", "q"],
                "properties": {
                    "ambient": False,
                    "n": False,
                    "equations": False,
                    "p": False,
                    "k": False,
                },
            },
            {
                "required": ["ambient", "n", "equations", "p"],
                "properties": {"family": False, "params": False, "q": False},
            },
        ],
    },
}


def validate_config(cfg) -> None:
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in _KIND_SCHEMAS:
        raise ValidationError(
            f"unknown model kind {kind!r}; expected one of {sorted(_KIND_SCHEMAS)}"
        )
    try:
        jsonschema.validate(cfg, _KIND_SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "top level"
        raise ValidationError(f"config rejected at {where}: {exc.message}") from exc


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    validate_config(cfg)
    return cfg


# ---------------------------------------------------------------------------
# config -> model / counts
# ---------------------------------------------------------------------------


def _weil_from_config(cfg: dict):
    if cfg["kind"] == "abelian":
        return weil_from_charpoly(cfg["q"], cfg["charpoly"])
    if "charpoly" in cfg:
        return full_motive_from_charpoly(cfg["q"], cfg["charpoly"])
    return supersingular_motive(cfg["q"], tuple(cfg["weights"]))


def model_from_config(cfg: dict) -> ZlogModel:
    kind = cfg["kind"]
    if kind == "abelian":
        return abelian_model(_weil_from_config(cfg))
    if kind == "motive":
        return motive_model(_weil_from_config(cfg), m=cfg.get("m"))
    if kind == "lambda":
        if "n" in cfg:
            return lambda_model(cfg["n"], cfg["q"])
        return cellular_model(cfg["cells"], cfg["q"])
    if kind == "raw":
        data = spectral(
            *[
                (_as_fraction(d["eps"]), _as_complex_field(d["lambda"]))
                for d in cfg["data"]
            ]
        )
        trunc = None
        if "truncation" in cfg:
            trunc = dataclasses.replace(select_truncation(data), **cfg["truncation"])
        return raw_model(
            data,
            c1=float(cfg.get("c1", 0.0)),
            s1=int(cfg.get("s1", 1)),
            beta=float(cfg.get("beta", 0.0)),
            h=_as_fraction(cfg.get("h", 1)),
            s2=int(cfg.get("s2", 1)),
            q=cfg.get("q"),
            trunc=trunc,
        )
    raise ValidationError(
        "variety configs carry point counts only; the continuation commands "
        "need spectral data (abelian, motive, lambda, or raw)"
    )


def _equations_from_json(eqs) -> tuple:
    out = []
    for eq in eqs:
        terms = []
        for term in eq:
            coef, exps = term
            if not isinstance(coef, int) or not isinstance(exps, list):
                raise ValidationError(
                    "equation terms are [coefficient, [exponents...]] pairs"
                )
            terms.append((coef, tuple(exps)))
        out.append(tuple(terms))
    return tuple(out)


def counts_from_config(cfg: dict, R: int) -> CountSequence:
    kind = cfg["kind"]
    if R < 1:
        raise ValidationError("need at least one count")
    if kind in ("abelian", "motive"):
        route = "abelian" if kind == "abelian" else "motive"
        return counts_from_weil_sequence(_weil_from_config(cfg), R, model=route)
    if kind == "lambda":
        model = model_from_config(cfg)
        values = [model.counts_fn(r) for r in range(1, R + 1)]
        return CountSequence(q=model.q, values=values, source=model.kind)
    if kind == "variety":
        if "family" in cfg:
            return counts_from_family(
                cfg["family"], tuple(cfg.get("params", ())), cfg["q"], R
            )
        spec = VarietySpec(
            ambient=cfg["ambient"],
            n=cfg["n"],
            equations=_equations_from_json(cfg["equations"]),
        )
        return counts_from_variety(spec, cfg["p"], cfg.get("k", 1), R)
    raise ValidationError(
        "raw spectral configs carry no integer point counts; "
        "coeffs and recurrence need a counting model"
    )


# ---------------------------------------------------------------------------
# grid rendering
# ---------------------------------------------------------------------------


def _log_derivative_row(model: ZlogModel, zs: np.ndarray) -> np.ndarray:
    """Vectorized mirror of log_derivative for rasters: the origin and
    points within POLE_CLEARANCE of a pole come back NaN instead of
    raising, so one bad pixel cannot kill a render."""
    zs = np.asarray(zs, dtype=np.complex128)
    out = np.zeros(zs.shape, dtype=np.complex128)
    bad = zs == 0
    with np.errstate(all="ignore"):
        u1 = zs**model.s1
        den = 1.0 - u1
        bad |= np.abs(den) < POLE_CLEARANCE
        lead = model.s1 * zs ** (model.s1 - 1)
        if model.c1 != 0.0:
            out = out + model.c1 * lead / den**2
        if model.beta != 0.0:
            out = out + model.beta * lead / den
        for r, rho in model.finite_prefix:
            out = out + rho * zs ** (r - 1)
        if model.data.N:
            cloud = build_cloud(model.data, model.trunc.L_max)
            u2 = zs**model.s2
            flat = u2.ravel()
            tail = kernels.cloud_eval(cloud.coeffs, cloud.mus, model.trunc.r0, flat)
            conj = model.data.conjugate()
            if conj.items == model.data.items:
                tail = 2.0 * tail
                mus = cloud.mus
            else:
                c2 = build_cloud(conj, model.trunc.L_max)
                tail = tail + kernels.cloud_eval(
                    c2.coeffs, c2.mus, model.trunc.r0, flat
                )
                mus = np.concatenate([cloud.mus, c2.mus])
            out = out + float(model.h) * model.s2 / 2.0 * tail.reshape(zs.shape) / zs
            dmin = np.full(zs.shape, np.inf)
            for mu in mus:
                dmin = np.minimum(dmin, np.abs(u2 - 1.0 / mu))
            bad |= dmin < POLE_CLEARANCE
    nanc = complex(float("nan"), float("nan"))
    return np.where(bad | ~np.isfinite(out), nanc, out)


def _phase_pixels(values: np.ndarray) -> np.ndarray:
    """Phase in (-pi, pi] mapped affinely to 0..255; non-finite -> 0."""
    phases = np.angle(values)
    pix = np.round((phases + math.pi) * (255.0 / TWO_PI))
    pix = np.where(np.isfinite(pix), pix, 0.0)
    return np.clip(pix, 0.0, 255.0).astype(np.uint8)


def _grid_csv(xs: np.ndarray, ys: np.ndarray, values: np.ndarray) -> str:
    lines = ["re_z,im_z,re_f,im_f"]
    for i in range(values.shape[0]):
        y = ys[i]
        row = values[i]
        for j in range(values.shape[1]):
            v = row[j]
            lines.append("%.17g,%.17g,%.17g,%.17g" % (xs[j], y, v.real, v.imag))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _opt(args, cfg: Optional[dict], name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if cfg is not None and name in cfg.get("options", {}):
        return cfg["options"][name]
    return default


def _require(value, flag: str):
    if value is None:
        raise ValidationError(f"{flag} is required")
    return value


def _cmd_coeffs(args) -> None:
    cfg = load_config(args.config)
    terms = int(_opt(args, cfg, "terms", 64))
    if terms < 1:
        raise ValidationError("--terms must be >= 1")
    seq = counts_from_config(cfg, terms)
    text = series.series_to_csv(series.zlog_series(seq, terms))
    _write_text(_opt(args, cfg, "out", None), text)


def _cmd_eval(args) -> None:
    cfg = load_config(args.config)
    model = model_from_config(cfg)
    clearance = float(_opt(args, cfg, "clearance", 0.05))
    if (args.z is None) == (args.path is None):
        raise ValidationError("eval needs exactly one of --z or --path")
    if args.z is not None:
        path = PathSpec.straight_to(parse_complex(args.z), clearance=clearance)
    else:
        path = parse_path(args.path, clearance)
    result = eval_zlog(path, model)
    payload = {
        "z": path.end,
        "value": result.value,
        "branch_offset": result.branch_offset,
        "error_estimate": result.error_estimate,
        "path": [[v.real, v.imag] for v in path.vertices],
        "clearance": clearance,
    }
    _write_text(_opt(args, cfg, "out", None), _json_text(payload) + "\n")


def _cmd_grid(args) -> None:
    cfg = load_config(args.config)
    model = model_from_config(cfg)
    window = parse_window(_require(_opt(args, cfg, "window", None), "--window"))
    res = int(_opt(args, cfg, "res", 200))
    if res < 2:
        raise ValidationError("--res must be >= 2")
    workers = int(_opt(args, cfg, "workers", 1))
    if workers < 1:
        raise ValidationError("--workers must be >= 1")
    out = _opt(args, cfg, "out", None)
    if out is None:
        raise ValidationError("grid writes a binary PGM; --out is required")
    if os.path.splitext(out)[1].lower() == ".csv":
        raise ValidationError(
            "grid --out names the PGM; the sibling CSV replaces its extension"
        )
    xs = np.linspace(window.re_min, window.re_max, res)
    ys = np.linspace(window.im_max, window.im_min, res)  # raster rows top-down

    def render(i: int) -> np.ndarray:
        return _log_derivative_row(model, xs + 1j * ys[i])

    if workers == 1:
        rows = [render(i) for i in range(res)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(render, range(res)))
    values = np.vstack(rows)
    _write_pgm(out, _phase_pixels(values))
    _write_text(os.path.splitext(out)[0] + ".csv", _grid_csv(xs, ys, values))


def _cmd_divisor(args) -> None:
    cfg = load_config(args.config)
    model = model_from_config(cfg)
    window = parse_window(_require(_opt(args, cfg, "window", None), "--window"))
    if args.plane == "z":
        div = support_pullback(model.data, model.trunc, window)
    else:
        base = build_support(model.data, model.trunc.L_max, window)
        j_range = int(math.ceil(window.height / TWO_PI)) + 1
        div = periodify(base, j_range, variant="full")
    lines = [
        f"# plane={args.plane} kind={div.kind}",
        f"# L_max={div.L_max} J_max={div.J_max}",
        f"# coverage_certified={'true' if div.coverage_certified else 'false'}",
    ]
    if div.verdict is not None:
        tag = f"# finiteness={div.verdict.status}"
        if div.verdict.rule:
            tag += f" rule={div.verdict.rule}"
        lines.append(tag)
    lines.append("re,im,multiplicity,level,contributors,unstable")
    for p in div.points:
        lines.append(
            "%.17g,%.17g,%s,%d,%d,%d"
            % (
                p.location.real,
                p.location.imag,
                p.multiplicity,
                p.level,
                p.contributors,
                1 if p.unstable else 0,
            )
        )
    _write_text(_opt(args, cfg, "out", None), "\n".join(lines) + "\n")


def _cmd_poles(args) -> None:
    cfg = load_config(args.config)
    model = model_from_config(cfg)
    window = parse_window(_require(_opt(args, cfg, "window", None), "--window"))
    points = sorted(model_support(model, window), key=lambda z: (z.real, z.imag))
    lines = ["re,im"] + ["%.17g,%.17g" % (z.real, z.imag) for z in points]
    _write_text(_opt(args, cfg, "out", None), "\n".join(lines) + "\n")


def _cmd_monodromy(args) -> None:
    cfg = load_config(args.config)
    model = model_from_config(cfg)
    if model.data.N == 0:
        raise ValidationError("monodromy needs a model with a spectral tail")
    center = parse_complex(_require(args.center, "--center"))
    radius = float(_require(args.radius, "--radius"))
    value = monodromy_loop(center, radius, model.data, model.trunc)
    expected = monodromy_expected(center, radius, model.data, model.trunc)
    winding = value / (2j * math.pi)
    payload = {
        "center": center,
        "radius": radius,
        "loop_integral": value,
        "winding": winding,
        "winding_modulus": abs(winding),
        "expected": expected,
    }
    _write_text(_opt(args, cfg, "out", None), _json_text(payload) + "\n")


def _cmd_residue(args) -> None:
    cfg = load_config(args.config)
    model = model_from_config(cfg)
    pole = parse_complex(_require(args.pole, "--pole"))
    report = residue_estimate(pole, model)
    payload = {
        "location": report.location,
        "residue": report.residue,
        "rational": report.rational,
        "fit_error": report.fit_error,
        "probe_radius": report.probe_radius,
    }
    _write_text(_opt(args, cfg, "out", None), _json_text(payload) + "\n")


def _cmd_weil_poles(args) -> None:
    cfg = load_config(args.config)
    model = model_from_config(cfg)
    poles = locate_weil_poles(model)
    payload = {"q": model.q, "count": len(poles), "poles": poles}
    _write_text(_opt(args, cfg, "out", None), _json_text(payload) + "\n")


def _cmd_recurrence(args) -> None:
    cfg = load_config(args.config)
    dmax = int(_opt(args, cfg, "dmax", 8))
    horizon = int(_opt(args, cfg, "horizon", 48))
    seq = counts_from_config(cfg, horizon)
    report = falsify_report(seq, dmax, horizon)
    if args.format == "table":
        text = report.table()
        if not text.endswith("\n"):
            text += "\n"
    else:
        text = _json_text(report.to_json_dict()) + "\n"
    _write_text(_opt(args, cfg, "out", None), text)


def _parse_b(raw: Optional[str], a: int, allow_inf: bool) -> Optional[int]:
    if raw is None:
        if allow_inf:
            return None
        raise ValidationError("--b is required (N absolute or +N relative to a)")
    s = str(raw).strip()
    if s.lower() in ("inf", "none"):
        if not allow_inf:
            raise ValidationError("--b inf only applies to step integrals")
        return None
    try:
        return a + int(s[1:]) if s.startswith("+") else int(s)
    except ValueError as exc:
        raise ValidationError(f"cannot parse --b {raw!r}") from exc


def _parse_sweep_windows(text: str):
    pairs = []
    for part in str(text).split(","):
        bits = part.split(":")
        if len(bits) != 2:
            raise ValidationError("--windows is a comma list of offset:length pairs")
        try:
            pairs.append((int(bits[0]), int(bits[1])))
        except ValueError as exc:
            raise ValidationError(f"cannot parse window pair {part!r}") from exc
    return pairs


def _emit_reports(args, cfg: Optional[dict], reports, gate: float) -> None:
    worst = float(max(rep.discrepancy for rep in reports))
    if len(reports) == 1:
        payload = reports[0].as_json_dict()
        payload["tolerance"] = gate
        payload["within_tolerance"] = bool(worst <= gate)
    else:
        payload = {
            "cases": len(reports),
            "tolerance": gate,
            "max_discrepancy": worst,
            "within_tolerance": bool(worst <= gate),
            "reports": [rep.as_json_dict() for rep in reports],
        }
    _write_text(_opt(args, cfg, "out", None), _json_text(payload) + "\n")
    if worst > gate:
        raise NumericFailure(
            f"verify {args.check}: discrepancy {worst:.3e} exceeds the gate {gate:.3g}"
        )


def _cmd_verify(args) -> None:
    check = args.check
    gate = args.fail_above
    if gate is not None and gate <= 0:
        raise ValidationError("--fail-above must be positive")
    if check == "classical":
        tol = 1e-11 if args.tol is None else args.tol
        w = parse_complex(args.w) if args.w is not None else 1.0 + 0j
        report = verify_classical(args.test, w=w, tol=tol)
        _emit_reports(args, None, [report], 1e-9 if gate is None else gate)
        return
    cfg = load_config(_require(args.config, "--config"))
    model = model_from_config(cfg)
    data, trunc = model.data, model.trunc
    if data.N == 0:
        raise ValidationError("verify needs a model with a spectral tail")
    a = trunc.r0 if args.a in (None, "auto") else int(args.a)
    if check == "box":
        tol = 1e-9 if args.tol is None else args.tol
        w = parse_complex(_require(args.w, "--w"))
        b = _parse_b(args.b, a, allow_inf=False)
        box = BoxFunction.from_truncation(data, w, trunc)
        if args.edges == "series":
            report = box_identity_with_series_edges(box, a, b, trunc, tol=tol)
        else:
            report = verify_box_identity(box, a, b, tol=tol)
        _emit_reports(args, cfg, [report], tol if gate is None else gate)
    elif check == "sweep":
        tol = 1e-9 if args.tol is None else args.tol
        w_text = args.w if args.w is not None else "1,1+0.3i,2-i"
        w_values = [parse_complex(part) for part in str(w_text).split(",")]
        windows = _parse_sweep_windows(args.windows)
        label = os.path.splitext(os.path.basename(args.config))[0]
        reports = box_sweep({label: (data, trunc)}, w_values, windows, tol=tol)
        _emit_reports(args, cfg, reports, tol if gate is None else gate)
    elif check == "steps":
        tol = 1e-10 if args.tol is None else args.tol
        w = parse_complex(_require(args.w, "--w"))
        kinds = list(STEP_KINDS) if args.kind == "all" else [args.kind]
        b = _parse_b(args.b, a, allow_inf=True)
        reports = [
            verify_step_integrals(k, data, w, a, b, trunc, eps=args.eps, tol=tol)
            for k in kinds
        ]
        _emit_reports(args, cfg, reports, 1e-8 if gate is None else gate)
    elif check == "translate":
        w = parse_complex(_require(args.w, "--w"))
        if w.real <= 0:
            raise ValidationError(
                "the translate check compares against the defining series; "
                "it needs Re w > 0"
            )
        R = int(args.terms if args.terms is not None else 400)
        if R < trunc.r0:
            raise ValidationError(f"--terms must be >= r0 = {trunc.r0}")
        closed = eval_tail_w(w, data, trunc, mode="closed")
        partial = 0j
        for r in range(trunc.r0, R + 1):
            partial += cmath.log(1.0 - data.inner_sum(r)) * cmath.exp(-w * r)
        report = VerifyReport(
            kind="translate_partial_sum",
            params={"w": w, "r0": trunc.r0, "R": R, "N": data.N},
            lhs=closed.value,
            rhs=partial,
            truncation_points={"L": trunc.L_max},
        )
        _emit_reports(args, cfg, [report], 1e-8 if gate is None else gate)
    else:  # pragma: no cover - argparse constrains the choices
        raise ValidationError(f"unknown verify check {check!r}")


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep stderr machine-readable
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="zlog",
        description=(
            "Multiplicative zeta functions over finite fields: series "
            "coefficients, analytic continuation along paths, pole/branch "
            "bookkeeping, and identity verification."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_config(name: str, help_: str):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", required=True, help="model config JSON")
        p.add_argument("--out", help="output file (default stdout)")
        return p

    p = with_config("coeffs", "CSV of the power-series coefficients of Z_log")
    p.add_argument("--terms", type=int, help="truncation order (default 64)")

    p = with_config("eval", "continue Z_log along a path and report the value")
    p.add_argument("--z", help='endpoint "a+bi" (straight path from 0)')
    p.add_argument("--path", help='semicolon-separated vertices, e.g. "1i;2+1i;2"')
    p.add_argument("--clearance", type=float, help="promised pole distance (0.05)")

    p = with_config("grid", "phase raster of d/dz log Z, PGM plus sibling CSV")
    p.add_argument("--window", help="remin:remax:immin:immax")
    p.add_argument("--res", type=int, help="points per axis (default 200)")
    p.add_argument("--workers", type=int, help="row-rendering threads (default 1)")

    p = with_config("divisor", "truncated support of the tail, CSV with weights")
    p.add_argument("--window", help="remin:remax:immin:immax")
    p.add_argument(
        "--plane",
        choices=("z", "w"),
        default="z",
        help="z: poles of the tail variable u = z^s2; w: cone points with "
        "their 2 pi i translates",
    )

    p = with_config("poles", "z-plane pole/branch locations of the full model")
    p.add_argument("--window", help="remin:remax:immin:immax")

    p = with_config("monodromy", "loop integral around one support cluster")
    p.add_argument("--center", help='loop center "a+bi" (in the tail variable)')
    p.add_argument("--radius", type=float, help="loop radius")

    p = with_config("residue", "residue of d/dz log Z at a simple pole")
    p.add_argument("--pole", help='pole location "a+bi"')

    with_config("weil-poles", "recover Weil numbers from pole locations")

    p = with_config("recurrence", "try to fit N_r recurrences; report the verdict")
    p.add_argument("--dmax", type=int, help="largest order tried (default 8)")
    p.add_argument("--horizon", type=int, help="counts horizon R (default 48)")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser(
        "verify",
        help="identity checks: quadrature vs series, JSON report",
        description="Identity checks; nonzero exit 3 when the discrepancy "
        "exceeds the gate.",
    )
    p.add_argument(
        "check", choices=("classical", "box", "sweep", "steps", "translate")
    )
    p.add_argument("--config", help="model config JSON (not used by classical)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--w", help='translate variable "a+bi"; comma list for sweep')
    p.add_argument("--a", help='left edge, integer >= r0, or "auto" (default)')
    p.add_argument("--b", help='right edge: N, +N relative to a, or "inf" (steps)')
    p.add_argument("--eps", type=float, default=0.25, help="H-kind lower endpoint")
    p.add_argument(
        "--kind", choices=STEP_KINDS + ("all",), default="all", help="step kind"
    )
    p.add_argument(
        "--test",
        choices=("exp_decay", "inverse_square"),
        default="exp_decay",
        help="classical family",
    )
    p.add_argument(
        "--windows", default="0:4,2:5,0:8", help="sweep offset:length pairs"
    )
    p.add_argument("--terms", type=int, help="translate partial-sum order (400)")
    p.add_argument("--edges", choices=("quad", "series"), default="quad")
    p.add_argument("--tol", type=float, help="quadrature/series accuracy target")
    p.add_argument(
        "--fail-above",
        dest="fail_above",
        type=float,
        help="discrepancy gate (defaults per check)",
    )

    return parser


_HANDLERS = {
    "coeffs": _cmd_coeffs,
    "eval": _cmd_eval,
    "grid": _cmd_grid,
    "divisor": _cmd_divisor,
    "poles": _cmd_poles,
    "monodromy": _cmd_monodromy,
    "residue": _cmd_residue,
    "weil-poles": _cmd_weil_poles,
    "recurrence": _cmd_recurrence,
    "verify": _cmd_verify,
}


# flags whose value may start with "-" (windows, complex numbers, negative
# reals); argparse would read such a value as an option, so the pair is glued
# into --flag=value before parsing
_VALUE_FLAGS = frozenset(
    {
        "--config",
        "--out",
        "--terms",
        "--z",
        "--path",
        "--clearance",
        "--window",
        "--res",
        "--workers",
        "--plane",
        "--center",
        "--radius",
        "--pole",
        "--dmax",
        "--horizon",
        "--format",
        "--eps",
        "--kind",
        "--test",
        "--windows",
        "--edges",
        "--tol",
        "--fail-above",
        "--w",
        "--a",
        "--b",
    }
)


def _glue_values(argv: list) -> list:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if (
            tok in _VALUE_FLAGS
            and i + 1 < len(argv)
            and argv[i + 1].startswith("-")
            and not argv[i + 1].startswith("--")
        ):
            out.append(tok + "=" + argv[i + 1])
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _fail(code: int, exc: Exception) -> int:
    detail = {"code": code, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, OrderMismatch):
        detail["order"] = exc.order
        detail["coefficients"] = [complex(c) for c in exc.coefficients]
    sys.stderr.write(_json_text({"error": detail}) + "\n")
    return code


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_values([str(a) for a in argv]))
    except _UsageError as exc:
        return _fail(2, exc)
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)
    try:
        _HANDLERS[args.command](args)
    except ValidationError as exc:
        return _fail(2, exc)
    except NumericFailure as exc:
        return _fail(3, exc)
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
