"""Command line front end.

    specflag check --input F
    specflag run --task T --input F --out DIR [--seed N] [--depth D] [--grid N] [--tol ABS,REL]
    specflag generate --k K --n N --seed S --out F

Tuple files are JSON: ``{"k": k, "n": n, "matrices": [...]}`` with every
entry written as an ``[re, im]`` pair, rows first.  Exit codes: 0 success,
2 the tuple does not commute, 3 an eigenvalue sits on a region boundary,
64 bad usage or input format, 70 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from . import __version__
from .errors import BoundaryAmbiguous, NonCommuting, SpecflagError
from .holocalc import (HoloFunction, apply_series, default_quadrature, vasilescu_integral,
                       verify_pushforward)
from .hsproj import (adjoint_dual, compress, hs_joint, joint_spectral_subspace,
                     similarity_transport)
from .jointspec import alpha as koszul_alpha
from .jointspec import complex_grid, harte_margin, scan
from .numcore import Tolerance, join, meet, projection_distance, random_invertible
from .ordering import assign_params, build_flag, curve_for, verify_simultut
from .regions import Disk, Intersection, Union, polydisk_union, rectangle, region_from_dict
from .triangular import joint_measure, simultaneous_schur
from .tuples import (CommPolynomial, certify_commuting, commutation_residual, eval_poly,
                     planted_commuting_tuple, random_poly)

EXIT_OK = 0
EXIT_NONCOMMUTING = 2
EXIT_BOUNDARY = 3
EXIT_FORMAT = 64
EXIT_NUMERICAL = 70

TASKS = ("triangularize", "measure", "project", "order", "spectrum-scan", "calc", "verify-all")


class FormatError(Exception):
    """Malformed input file or argument."""


# -- tuple files -------------------------------------------------------------------

def _pair(z):
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    return x + 0.0  # normalizes -0.0


def _matrix_json(a):
    return [[_pair(z) for z in row] for row in np.asarray(a)]


def _parse_matrix(rows, k, where):
    if not isinstance(rows, list) or len(rows) != k:
        raise FormatError(f"{where}: expected {k} rows")
    out = np.empty((k, k), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != k:
            raise FormatError(f"{where}, row {i}: expected {k} entries")
        for j, e in enumerate(row):
            ok = (isinstance(e, list) and len(e) == 2
                  and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in e))
            if not ok:
                raise FormatError(f"{where}, entry ({i}, {j}): expected an [re, im] pair")
            z = complex(e[0], e[1])
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise FormatError(f"{where}, entry ({i}, {j}): non-finite value")
            out[i, j] = z
    return out


def parse_tuple_document(text, source="<input>"):
    """Matrices and labels from the text of a tuple file."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{source}: top level must be an object")
    for key in ("k", "n", "matrices"):
        if key not in doc:
            raise FormatError(f"{source}: missing key {key!r}")
    k, n = doc["k"], doc["n"]
    if not (isinstance(k, int) and isinstance(n, int) and k >= 1 and n >= 1):
        raise FormatError(f"{source}: k and n must be positive integers")
    mats = doc["matrices"]
    if not isinstance(mats, list) or len(mats) != n:
        raise FormatError(f"{source}: expected {n} matrices")
    matrices = [_parse_matrix(m, k, f"{source}: matrix {i}") for i, m in enumerate(mats)]
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != n):
        raise FormatError(f"{source}: labels must be a list of {n} strings")
    return matrices, labels


def load_tuple_file(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_tuple_document(text, str(path))


def tuple_document(matrices, labels=None):
    doc = {"k": int(matrices[0].shape[0]), "n": len(matrices),
           "matrices": [_matrix_json(m) for m in matrices]}
    if labels:
        doc["labels"] = list(labels)
    return doc


def dumps(doc):
    """Deterministic JSON; floats use the shortest round-trip form."""
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


# -- configuration -------------------------------------------------------------------

@dataclass
class RunConfig:
    tol: Tolerance = field(default_factory=Tolerance)
    seed: int = 0
    depth: int = 4
    grid: int = 41
    angular: int | None = None
    radial: int = 16
    region: dict | None = None
    function: str = "exp"
    out: Path = Path(".")

    def __post_init__(self):
        if not 1 <= self.depth <= 12:
            raise FormatError("--depth must be between 1 and 12")
        if not 2 <= self.grid <= 1001:
            raise FormatError("--grid must be between 2 and 1001")
        if self.angular is not None and self.angular < 4:
            raise FormatError("--angular must be at least 4")
        if self.radial < 2:
            raise FormatError("--radial must be at least 2")


def _parse_tol(text):
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise FormatError(f"--tol expects ABS,REL, got {text!r}") from exc
    if len(parts) == 1:
        parts = [Tolerance().abs_eps, parts[0]]
    if len(parts) != 2 or not all(p > 0 and math.isfinite(p) for p in parts):
        raise FormatError(f"--tol expects two positive numbers ABS,REL, got {text!r}")
    return Tolerance(*parts)


def _parse_region(text):
    if text is None:
        return None
    p = Path(text)
    try:
        raw = p.read_text() if p.exists() else text
        return json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"--region is neither a readable file nor JSON: {exc}") from exc


# -- helpers ---------------------------------------------------------------------------

def _separation_radius(points):
    """0.45 times the smallest positive Chebyshev gap between rows (1 for one point)."""
    pts = np.atleast_2d(points)
    gaps = [np.abs(a - b).max() for i, a in enumerate(pts) for b in pts[i + 1:]]
    gaps = [g for g in gaps if g > 1e-6]
    return 0.45 * min(gaps) if gaps else 1.0


def _measure_json(nu):
    return {"atoms": [[_pair(z) for z in a] for a in nu.atoms],
            "weights": [_num(w) for w in nu.weights],
            "fractions": [str(f) for f in nu.fractions]}


def _default_region(t, nu):
    # polydisks around the first half of the atoms, radius below their spacing
    keep = nu.atoms[: max(1, len(nu.atoms) // 2)]
    return polydisk_union(keep, _separation_radius(nu.atoms))


def _function(cfg, n):
    name = cfg.function
    if name == "exp":
        return HoloFunction.exp_linear(np.full(n, 0.5))
    if name == "product":
        p = CommPolynomial.constant(n, 1.0)
        for j in range(n):
            p = p * CommPolynomial.coordinate(n, j)
        return HoloFunction.polynomial(p)
    if name == "random":
        return HoloFunction.polynomial(random_poly(n, 2, cfg.seed))
    if name.startswith("resolvent:"):
        try:
            w = complex(name.split(":", 1)[1].replace(" ", ""))
        except ValueError as exc:
            raise FormatError(f"bad resolvent point in {name!r}") from exc
        return HoloFunction.reciprocal(n, 0, w)
    raise FormatError(f"unknown function {name!r}; use exp, product, random or resolvent:W")


def _reference_value(f, t):
    """Independent value of f(T) for the calc task."""
    if f.kind == "polynomial":
        return eval_poly(f.poly, t)
    if f.name == "exp":
        out = np.eye(t.k, dtype=complex)
        for a in t.matrices:
            out = out @ scipy.linalg.expm(0.5 * a)
        return out
    if f.name == "reciprocal":
        w = 1.0 / f.coeff((0,) * t.n)
        return np.linalg.inv(w * np.eye(t.k) - t.matrices[0])
    return None


# -- tasks -------------------------------------------------------------------------------

def task_triangularize(t, cfg):
    sf = simultaneous_schur(t, cfg.tol)
    return {"unitary": _matrix_json(sf.unitary),
            "triangulars": [_matrix_json(r) for r in sf.triangulars],
            "lower_residual": _num(sf.residual),
            "reconstruction_error": _num(sf.reconstruction_error(t))}, {}


def task_measure(t, cfg):
    return _measure_json(joint_measure(t, cfg.tol)), {}


def task_project(t, cfg):
    nu = joint_measure(t, cfg.tol)
    region = region_from_dict(cfg.region) if cfg.region else _default_region(t, nu)
    p = hs_joint(t, region, cfg.tol)
    q = joint_spectral_subspace(t, region, cfg.tol)
    mass = nu.mass(lambda z: region.contains(z))
    return {"region": region.to_dict(), "dim": p.dim, "trace": str(p.trace),
            "measure": str(mass), "trace_matches_measure": p.trace == mass,
            "frame": _matrix_json(p.frame) if p.dim else [],
            "eigenspace_distance": _num(projection_distance(p.subspace, q.subspace))}, {}


def task_order(t, cfg):
    nu = joint_measure(t, cfg.tol)
    ordering = assign_params(curve_for(t, cfg.depth), nu)
    flag = build_flag(t, ordering, cfg.tol)
    return {"depth": cfg.depth,
            "atoms": [[_pair(z) for z in a] for a in nu.atoms],
            "indices": [int(i) for i in ordering.indices],
            "params": [str(p) for p in ordering.exact_params()],
            "order": list(ordering.order),
            "breakpoints": [_num(b) for b in flag.breakpoints],
            "dims": list(flag.dims),
            "unitary": _matrix_json(flag.unitary),
            "invariance_residual": _num(flag.invariance_residual(t))}, {}


def _scan_slice(t, cfg):
    """Grid on one coordinate plane; other coordinates fixed at the first atom."""
    nu = joint_measure(t, cfg.tol)
    anchor = nu.atoms[0]
    vals = nu.atoms[:, 0]
    center = complex(np.round(vals.mean(), 12))
    half = 1.5 * float(np.abs(vals - center).max()) + 0.25 * (1.0 + float(t.norms[0]))
    w = complex_grid(center, half, cfg.grid)
    points = np.column_stack([w] + [np.full(len(w), anchor[j]) for j in range(1, t.n)])
    return nu, anchor, center, half, w, points


def _svg(w, margins, eigen, center, half, size=400):
    lo = np.log10(np.maximum(margins, 1e-16))
    span = max(float(lo.max() - lo.min()), 1e-12)
    m = int(round(math.sqrt(len(w))))
    cell = size / m
    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
              f'viewBox="0 0 {size} {size}">\n')

    def xy(z):
        x = (z.real - (center.real - half)) / (2 * half) * size
        y = size - (z.imag - (center.imag - half)) / (2 * half) * size
        return x, y

    for z, v in zip(w, lo):
        shade = int(round(255 * (v - lo.min()) / span))
        x, y = xy(z)
        out.write(f'<rect x="{x - cell / 2:.2f}" y="{y - cell / 2:.2f}" width="{cell:.2f}" '
                  f'height="{cell:.2f}" fill="rgb({shade},{shade},255)"/>\n')
    for z in eigen:
        x, y = xy(complex(z))
        out.write(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="red" stroke="black"/>\n')
    out.write("</svg>\n")
    return out.getvalue()


def task_scan(t, cfg):
    nu, anchor, center, half, w, points = _scan_slice(t, cfg)
    res = scan(t, points, cfg.tol)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w_re", "w_im", "harte_margin", "alpha_margin"])
    for z, h, a in zip(w, res.harte_margins, res.alpha_margins):
        wr.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(h)), repr(float(a))])
    doc = {"rows": len(w), "grid": cfg.grid, "center": _pair(center), "half_width": _num(half),
           "fixed_coordinates": [_pair(z) for z in anchor[1:]],
           "harte_threshold": _num(res.harte_threshold),
           "alpha_threshold": _num(res.alpha_threshold),
           "harte_members": int(res.harte_members.sum()),
           "taylor_members": int(res.taylor_members.sum())}
    eigen = [a[0] for a in nu.atoms if np.allclose(a[1:], anchor[1:])] if t.n > 1 else nu.atoms[:, 0]
    files = {"scan.csv": buf.getvalue(),
             "scan.svg": _svg(w, res.alpha_margins, eigen, center, half)}
    return doc, files


def task_calc(t, cfg):
    f = _function(cfg, t.n)
    series = apply_series(f, t, tol=cfg.tol)
    doc = {"function": cfg.function, "series": _matrix_json(series)}
    ref = _reference_value(f, t)
    if ref is not None:
        doc["series_vs_reference"] = _num(np.abs(series - ref).max())
    if t.n <= 2:
        spec = default_quadrature(t, cfg.angular, cfg.radial, cfg.tol)
        q = vasilescu_integral(t, f, spec, tol=cfg.tol)
        doc.update({"integral": _matrix_json(q.value),
                    "integral_vs_series": _num(np.abs(q.value - series).max()),
                    "richardson_estimate": _num(q.error_estimate),
                    "nodes": q.nodes,
                    "polydisk": {"center": [_pair(c) for c in spec.center],
                                 "radii": [_num(r) for r in spec.radii],
                                 "margin": _num(spec.margin)}})
    return doc, {}


# -- the verification suite -----------------------------------------------------------------

def _row(key, passed, value, tolerance, detail=""):
    return {"key": key, "status": "pass" if passed else "fail", "value": _num(value),
            "tolerance": _num(tolerance), "detail": detail}


def verify_all(t, cfg):
    """Run every check on one tuple; returns the table rows."""
    tol = cfg.tol
    rows = []
    mats = t.matrices
    norms = [max(1.0, float(x)) for x in t.norms]
    nu = joint_measure(t, tol)
    rad = _separation_radius(nu.atoms)
    atoms = nu.atoms

    sf = simultaneous_schur(t, tol)
    low = max(np.linalg.norm(np.tril(r, -1), 2) / s for r, s in zip(sf.triangulars, norms))
    rows.append(_row("simultaneous-triangularization", low <= 1e-8, low, 1e-8,
                     "strictly lower part of U* T_i U relative to ||T_i||"))

    x = polydisk_union(atoms[: max(1, len(atoms) // 2)], rad)
    y = polydisk_union(atoms[len(atoms) // 3:], rad)
    p = hs_joint(t, x, tol)
    exact = p.trace == nu.mass(x.contains)
    rows.append(_row("measure-equals-trace", exact, float(abs(p.trace - nu.mass(x.contains))),
                     0.0, f"trace {p.trace} for measure {nu.mass(x.contains)}"))

    px, py = p.subspace, hs_joint(t, y, tol).subspace
    d_union = projection_distance(hs_joint(t, Union((x, y)), tol).subspace, join(px, py, tol))
    d_meet = projection_distance(hs_joint(t, Intersection((x, y)), tol).subspace,
                                 meet(px, py, tol))
    rows.append(_row("lattice-union-is-join", d_union <= 1e-7, d_union, 1e-7))
    rows.append(_row("lattice-intersection-is-meet", d_meet <= 1e-7, d_meet, 1e-7))

    if 0 < px.dim < t.k:
        rep = compress(t, p, [y], tol)
        ok = rep.measure_ok and rep.max_distance <= 1e-7
        rows.append(_row("compression-corners", ok, rep.max_distance, 1e-7,
                         f"measure decomposition {'exact' if rep.measure_ok else 'mismatch'}"))
    else:
        rows.append({"key": "compression-corners", "status": "skipped", "value": None,
                     "tolerance": 1e-7, "detail": "projection is trivial"})

    # the adjoint has the conjugate spectrum
    dual = adjoint_dual(t, x.conjugate(), tol)
    rows.append(_row("adjoint-duality", dual.distance <= 1e-6, dual.distance, 1e-6))
    s = random_invertible(t.k, cfg.seed, max_cond=1e3)
    tr = similarity_transport(s, t, x, tol)
    rows.append(_row("similarity-transport", tr.distance <= 1e-6, tr.distance, 1e-6,
                     f"cond(S) = {tr.condition:.3g}"))

    scale = max(1.0, sum(v * v for v in norms))
    worst_h = max(harte_margin(list(mats), a, "left") for a in atoms) / scale
    worst_a = max(koszul_alpha(t, a).sigma_min for a in atoms) / math.sqrt(scale)
    worst = max(worst_h, worst_a)
    rows.append(_row("spectrum-contains-atoms", worst <= 1e-7, worst, 1e-7,
                     "Harte and Koszul margins at the joint eigenvalues"))

    ordering = assign_params(curve_for(t, cfg.depth), nu)
    flag = build_flag(t, ordering, tol)
    f = random_poly(t.n, 2, cfg.seed)
    st = verify_simultut(None, t, flag, f, tol)
    rows.append(_row("flag-diagonal-expectation", st.passed(1e-7), st.eigen_distance, 1e-7,
                     "S - E(S) nilpotent" if st.nilpotent else "S - E(S) not nilpotent"))
    inv = flag.invariance_residual(t)
    rows.append(_row("flag-invariance", inv <= 1e-8, inv, 1e-8))

    e = HoloFunction.exp_linear(np.full(t.n, 0.5))
    ser = apply_series(e, t, tol=tol)
    ref = np.eye(t.k, dtype=complex)
    for a in mats:
        ref = ref @ scipy.linalg.expm(0.5 * a)
    d = float(np.abs(ser - ref).max() / max(1.0, np.abs(ref).max()))
    rows.append(_row("series-calculus", d <= 1e-8, d, 1e-8, "exp(sum z/2) against expm"))
    if t.n <= 2:
        g = HoloFunction.polynomial(f)
        q = vasilescu_integral(t, g, default_quadrature(t, None, cfg.radial, tol),
                               richardson=False, tol=tol)
        d = float(np.abs(q.value - eval_poly(f, t)).max())
        limit = 1e-8 if t.n == 1 else 1e-4
        rows.append(_row("integral-calculus", d <= limit, d, limit,
                         "boundary integral of a random polynomial"))
    else:
        rows.append({"key": "integral-calculus", "status": "skipped", "value": None,
                     "tolerance": None, "detail": "boundary quadrature needs n <= 2"})

    z = [CommPolynomial.coordinate(t.n, j) for j in range(t.n)]
    h = HoloFunction.composite([sum(z[1:], z[0]), z[0] * z[-1] + z[0]])
    img = np.array([np.atleast_1d(h(a)) for a in atoms])
    r = _separation_radius(img[:, :1])
    region = rectangle(Disk(img[0, 0], r), None)
    push = verify_pushforward(h, t, [region], tol)
    worst = max((push.measure_distance,) + push.projection_distances)
    rows.append(_row("pushforward", push.passed(1e-7), worst, 1e-7,
                     "measure and projections of h(T) against h applied to atoms"))
    return rows


def task_verify(t, cfg):
    rows = verify_all(t, cfg)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["key", "status", "value", "tolerance"])
    for r in rows:
        wr.writerow([r["key"], r["status"], "" if r["value"] is None else repr(r["value"]),
                     "" if r["tolerance"] is None else repr(r["tolerance"])])
    passed = all(r["status"] != "fail" for r in rows)
    return {"seed": cfg.seed, "passed": passed, "rows": rows}, {"verify.csv": buf.getvalue()}


TASK_FUNCS = {
    "triangularize": task_triangularize, "measure": task_measure, "project": task_project,
    "order": task_order, "spectrum-scan": task_scan, "calc": task_calc, "verify-all": task_verify,
}


# -- commands ----------------------------------------------------------------------------------

def cmd_check(args, out):
    matrices, _ = load_tuple_file(args.input)
    tol = _parse_tol(args.tol) if args.tol else Tolerance()
    resid, pair = commutation_residual(matrices)
    if len(matrices) > 1:
        out.write(f"worst pair: T_{pair[0] + 1}, T_{pair[1] + 1}\n")
    out.write(f"normalized commutator residual: {resid!r}\n")
    certify_commuting(matrices, tol)
    out.write("certified commuting\n")
    return EXIT_OK


def cmd_run(args, out):
    cfg = RunConfig(tol=_parse_tol(args.tol) if args.tol else Tolerance(), seed=args.seed,
                    depth=args.depth, grid=args.grid, angular=args.angular, radial=args.radial,
                    region=_parse_region(args.region), function=args.function,
                    out=Path(args.out))
    matrices, _ = load_tuple_file(args.input)
    t = certify_commuting(matrices, cfg.tol)
    doc, files = TASK_FUNCS[args.task](t, cfg)
    name = {"spectrum-scan": "scan", "verify-all": "verify"}.get(args.task, args.task)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / f"{name}.json").write_text(dumps({"task": args.task, "result": doc}))
    for fname, text in files.items():
        (cfg.out / fname).write_text(text)
    if args.task == "verify-all":
        for r in doc["rows"]:
            out.write(f"{r['status'].upper():7s} {r['key']}\n")
        if not doc["passed"]:
            return EXIT_NUMERICAL
    out.write(f"wrote {cfg.out / f'{name}.json'}\n")
    return EXIT_OK


def cmd_generate(args, out):
    if not (1 <= args.k <= 64 and 1 <= args.n <= 6):
        raise FormatError("generate needs 1 <= k <= 64 and 1 <= n <= 6")
    pt = planted_commuting_tuple(args.k, args.n, args.seed)
    target = Path(args.out)
    if target.suffix != ".json":
        target.mkdir(parents=True, exist_ok=True)
        target = target / "tuple.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps(tuple_document(pt.tuple.matrices)))
    out.write(f"wrote {target}\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_FORMAT)


def build_parser():
    parser = _Parser(prog="specflag", description="Spectral measures, projections and flags "
                     "of commuting matrix tuples.")
    parser.add_argument("--version", action="version", version=f"specflag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="certify that a tuple file commutes")
    check.add_argument("--input", required=True)
    check.add_argument("--tol")

    run = sub.add_parser("run", help="run one task and write results to a directory")
    run.add_argument("--task", required=True, choices=TASKS)
    run.add_argument("--input", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--depth", type=int, default=4, help="curve depth for the ordering")
    run.add_argument("--grid", type=int, default=41, help="points per axis of the scan grid")
    run.add_argument("--tol", help="ABS,REL tolerances (or REL alone)")
    run.add_argument("--angular", type=int, help="angular quadrature nodes")
    run.add_argument("--radial", type=int, default=16, help="radial quadrature nodes (n = 2)")
    run.add_argument("--region", help="region JSON (inline or a file) for the project task")
    run.add_argument("--function", default="exp",
                     help="calc function: exp, product, random or resolvent:W")

    gen = sub.add_parser("generate", help="write a planted commuting tuple file")
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    return parser


COMMANDS = {"check": cmd_check, "run": cmd_run, "generate": cmd_generate}


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except FormatError as exc:
        err.write(f"format error: {exc}\n")
        return EXIT_FORMAT
    except NonCommuting as exc:
        err.write(f"not commuting: {exc} (pair {exc.pair[0] + 1}, {exc.pair[1] + 1})\n")
        return EXIT_NONCOMMUTING
    except BoundaryAmbiguous as exc:
        err.write(f"boundary ambiguity: {exc} (eigenvalue {exc.eigenvalue})\n")
        return EXIT_BOUNDARY
    except (SpecflagError, np.linalg.LinAlgError, ArithmeticError) as exc:
        err.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    except ValueError as exc:
        # region and dimension validation in the library raise ValueError
        err.write(f"format error: {exc}\n")
        return EXIT_FORMAT
    except OSError as exc:
        err.write(f"cannot write output: {exc}\n")
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
