"""Command-line driver.

Subcommands:

* ``validate`` run representation/identity checks and write a JSON report
* ``star``     evaluate a star product of two expressions exactly
* ``converge`` sweep N and emit a convergence CSV with a fitted slope
* ``encode``   encode surface fields into matrix JSON files

Every command is deterministic for a given configuration; floats are
printed with 17 significant digits so reruns are byte-identical, and all
files are written atomically.
"""

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import encode, fuzzy_sphere, geometry, heisenberg, studies, surfaces
from .sphharm import ScalarField, SphereGrid

DEFAULT_TOLERANCES = {
    "structure": 1e-12,
    "trace": 1e-12,
    "spectrum": 1e-10,
    "norm": 1e-10,
    "orthogonality": 1e-10,
    "product": 1e-8,
    "relations": 1e-10,
    "eps_solver": 1e-10,
    "torus": 1e-12,
    "iso": 1e-8,
}


def fmt17(x) -> str:
    return format(float(x), ".17g")


def write_text_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(rows, slope=None) -> str:
    lines = ["N,eps,value,reference,abs_err"]
    for N, eps, value, reference, abs_err in rows:
        lines.append(
            f"{N},{fmt17(eps)},{fmt17(value)},{fmt17(reference)},{fmt17(abs_err)}"
        )
    if slope is not None:
        lines.append(f"# slope = {fmt17(slope)}")
    return "\n".join(lines) + "\n"


@dataclass
class RunConfig:
    """Validated command configuration."""

    command: str
    Ns: list = field(default_factory=list)
    R: float = 1.0
    L: int = 8
    seed: int = 0
    out: str = "."
    tolerances: dict = field(default_factory=dict)
    profile: str = None
    study: str = None
    trace_mode: str = "triple"
    surface: str = "sphere"
    field_files: list = None
    extras: dict = field(default_factory=dict)
    exprs: list = field(default_factory=list)
    kind: str = "vey"

    def __post_init__(self):
        for N in self.Ns:
            if N < 2:
                raise SystemExit(f"error: N must be >= 2, got {N}")
        if self.L < 0:
            raise SystemExit("error: band limit must be >= 0")
        paths = list(self.extras.values()) + list(self.field_files or [])
        if len(paths) != len(set(paths)):
            raise SystemExit("error: input paths must be distinct")

    def tol(self, name) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


def _parse_tol_overrides(pairs):
    out = {}
    for item in pairs or []:
        name, _, val = item.partition("=")
        if not val or name not in DEFAULT_TOLERANCES:
            known = ", ".join(sorted(DEFAULT_TOLERANCES))
            raise SystemExit(f"error: bad --tol-override {item!r} (known: {known})")
        out[name] = float(val)
    return out


def _parse_ns(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SystemExit(f"error: bad N list {text!r}")


# ---------------------------------------------------------------------------
# validate


def _sphere_checks(cfg):
    rng = np.random.default_rng(cfg.seed)
    for N in cfg.Ns:
        rep = fuzzy_sphere.build_rep(N, cfg.R)
        for name, res in rep.invariant_residuals().items():
            yield {"check": f"sphere/{name}", "N": N, "residual": float(res), "tol": cfg.tol("structure")}
        tr = abs(np.trace(rep.X0 @ rep.X0) / N - cfg.R**2 / 3.0)
        yield {"check": "sphere/trace_X0_sq", "N": N, "residual": float(tr), "tol": cfg.tol("trace")}
        nmax = min(N - 1, 6)
        for n in range(nmax + 1):
            for m in {0, n}:
                h = fuzzy_sphere.harmonic(rep, n, m)
                lap = fuzzy_sphere.laplacian(rep, h.mat)
                target = rep.eps**2 * n * (n + 1)
                scale = max(np.max(np.abs(h.mat)), 1e-300)
                res = np.max(np.abs(lap - target * h.mat)) / scale
                yield {"check": "sphere/laplacian", "N": N, "residual": float(res), "tol": cfg.tol("spectrum")}
                direct = fuzzy_sphere.trace_inner(rep, h.mat, h.mat).real
                formula = fuzzy_sphere.norm_sq_formula(n, cfg.R, rep.eps)
                res = abs(direct - formula) / max(abs(formula), 1e-300)
                yield {"check": "sphere/norm_formula", "N": N, "residual": float(res), "tol": cfg.tol("norm")}
        # product law on a random small pair
        nmax = min(N - 1, 3)
        n1 = int(rng.integers(0, nmax + 1))
        n2 = int(rng.integers(0, nmax + 1))
        m1 = int(rng.integers(-n1, n1 + 1))
        m2 = int(rng.integers(-n2, n2 + 1))
        prod = fuzzy_sphere.harmonic(rep, n1, m1).mat @ fuzzy_sphere.harmonic(rep, n2, m2).mat
        dec = fuzzy_sphere.decompose(rep, prod)
        worst = 0.0
        from .angmom import clebsch_gordan

        for n in range(abs(n1 - n2), min(n1 + n2, N - 1) + 1):
            m = m1 + m2
            if abs(m) > n:
                continue
            expected = clebsch_gordan(n1, m1, n2, m2, n, m).float_view
            expected *= fuzzy_sphere.reduced_matrix_element(rep, n1, n2, n)
            worst = max(worst, abs(dec.coeff(n, m) - expected))
        yield {"check": f"sphere/product_{n1}{m1}_{n2}{m2}", "N": N, "residual": worst, "tol": cfg.tol("product")}


def _torus_checks(cfg):
    for N in cfg.Ns:
        t = surfaces.fuzzy_torus(N)
        for name, res in t.relation_residuals().items():
            yield {"check": f"torus/{name}", "N": N, "residual": float(res), "tol": cfg.tol("torus")}
        worst = 0.0
        for r in range(-2 * N, 2 * N + 1):
            for s in range(-2 * N, 2 * N + 1):
                expected = 1.0 if (r % N == 0 and s % N == 0) else 0.0
                worst = max(worst, abs(surfaces.torus_trace(t, r, s) - expected))
        yield {"check": "torus/trace_delta", "N": N, "residual": worst, "tol": cfg.tol("torus")}


def _rotation_checks(cfg):
    if cfg.profile is None:
        raise SystemExit("error: --geometry rotation requires --profile")
    if cfg.profile == "sphere":
        rho = surfaces.sphere_profile(cfg.R)
    else:
        with open(cfg.profile) as f:
            rho = surfaces.RhoPoly.parse(f.read())
    for N in cfg.Ns:
        rep = surfaces.build_rotation_rep(rho, N)
        res = abs(N * rep.eps - (rep.z_hi - rep.z_lo))
        yield {"check": "rotation/eps_width", "N": N, "residual": float(res), "tol": cfg.tol("eps_solver")}
        for name, r in rep.relation_residuals().items():
            yield {"check": f"rotation/{name}", "N": N, "residual": float(r), "tol": cfg.tol("relations")}


def cmd_validate(cfg: RunConfig, geometry_kind: str) -> int:
    checks = {
        "sphere": _sphere_checks,
        "torus": _torus_checks,
        "rotation": _rotation_checks,
    }
    if geometry_kind not in checks:
        raise SystemExit(f"error: unknown geometry {geometry_kind!r}")
    results = []
    for row in checks[geometry_kind](cfg):
        row["pass"] = bool(row["residual"] <= row["tol"])
        results.append(row)
        status = "ok " if row["pass"] else "FAIL"
        print(f"[{status}] {row['check']:<32} N={row['N']:<4} residual={fmt17(row['residual'])}")
    report = {
        "geometry": geometry_kind,
        "N": cfg.Ns,
        "R": cfg.R,
        "results": results,
        "all_pass": all(r["pass"] for r in results),
    }
    path = os.path.join(cfg.out, f"validate_{geometry_kind}.json")
    write_text_atomic(path, json.dumps(report, indent=1, sort_keys=True) + "\n")
    print(f"report: {path}")
    return 0 if report["all_pass"] else 1


# ---------------------------------------------------------------------------
# star


def cmd_star(cfg: RunConfig) -> int:
    u = heisenberg.parse_expr(cfg.exprs[0])
    v = heisenberg.parse_expr(cfg.exprs[1])
    product = {"vey": heisenberg.star_vey, "normal": heisenberg.star_normal}[cfg.kind]
    print(heisenberg.format_element(product(u, v)))
    return 0


# ---------------------------------------------------------------------------
# converge


def cmd_converge(cfg: RunConfig) -> int:
    if cfg.study == "trace":
        rows, slope = studies.trace_study(cfg.Ns, cfg.R, mode=cfg.trace_mode)
    elif cfg.study == "bracket":
        rows, slope = studies.bracket_study(cfg.Ns, cfg.R, L=cfg.L, seed=cfg.seed)
    elif cfg.study == "ordering":
        rows, slope = studies.ordering_study(cfg.Ns, cfg.R)
    else:
        raise SystemExit(f"error: unknown study {cfg.study!r}")
    csv = rows_to_csv(rows, slope if len(cfg.Ns) > 1 else None)
    path = os.path.join(cfg.out, f"converge_{cfg.study}.csv")
    write_text_atomic(path, csv)
    sys.stdout.write(csv)
    print(f"report: {path}")
    return 0


# ---------------------------------------------------------------------------
# encode


def cmd_encode(cfg: RunConfig) -> int:
    N = cfg.Ns[0]
    if cfg.field_files:
        if len(cfg.field_files) != 3:
            raise SystemExit("error: --fields needs exactly three files")
        fields = []
        for p in cfg.field_files:
            with open(p) as f:
                fields.append(ScalarField.from_json(f.read()))
        x1, x2, x3 = fields
    elif cfg.surface == "sphere":
        x1, x2, x3 = geometry.round_sphere_fields(cfg.R).x
    else:
        raise SystemExit(f"error: unknown surface {cfg.surface!r}")
    extras = {}
    for name, path in cfg.extras.items():
        with open(path) as f:
            extras[name] = ScalarField.from_json(f.read())
    L = max([cfg.L, x1.L, x2.L, x3.L] + [f.L for f in extras.values()])
    surface, report = encode.analyze_surface(x1, x2, x3, extras, N=N, R=cfg.R, L=L)
    for name, mat in {**surface.coords, **surface.extras}.items():
        path = os.path.join(cfg.out, f"{name}.json")
        write_text_atomic(path, fuzzy_sphere.matrix_to_json(mat, surface.rep.eps) + "\n")
    if cfg.surface == "sphere" and not cfg.field_files:
        rep = surface.rep
        calib = {
            "x1": float(np.max(np.abs(surface.coords["x1"] - rep.X1))),
            "x2": float(np.max(np.abs(surface.coords["x2"] - rep.X2))),
            "x3": float(np.max(np.abs(surface.coords["x3"] - rep.X3))),
        }
        report["calibration_vs_build_rep"] = calib
    report_json = json.dumps(report, indent=1, sort_keys=True, default=_json_complex)
    path = os.path.join(cfg.out, "encode_report.json")
    write_text_atomic(path, report_json + "\n")
    print(f"wrote matrices and report to {cfg.out}")
    return 0


def _json_complex(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    raise TypeError(f"not serializable: {x!r}")


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="ncgeom", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol-override", action="append", default=[], metavar="NAME=VAL")

    v = sub.add_parser("validate", help="run identity checks")
    common(v)
    v.add_argument("--geometry", required=True, choices=["sphere", "torus", "rotation"])
    v.add_argument("--N", default="8", help="comma-separated N values")
    v.add_argument("--R", type=float, default=1.0)
    v.add_argument("--profile", help="profile file (or 'sphere') for rotation")

    s = sub.add_parser("star", help="evaluate a star product")
    common(s)
    s.add_argument("--kind", choices=["vey", "normal"], default="vey")
    s.add_argument("exprs", nargs=2, metavar="EXPR")

    c = sub.add_parser("converge", help="convergence study CSV")
    common(c)
    c.add_argument("--study", required=True, choices=["trace", "bracket", "ordering"])
    c.add_argument("--N", default="8,16,32,64")
    c.add_argument("--R", type=float, default=1.0)
    c.add_argument("--L", type=int, default=4, help="band limit for random fields")
    c.add_argument("--trace-mode", choices=["triple", "cos2"], default="triple")

    e = sub.add_parser("encode", help="encode surface fields into matrices")
    common(e)
    e.add_argument("--N", default="16")
    e.add_argument("--R", type=float, default=1.0)
    e.add_argument("--L", type=int, default=8)
    e.add_argument("--surface", default="sphere")
    e.add_argument("--fields", nargs=3, metavar="FIELD_JSON")
    e.add_argument("--extra", action="append", default=[], metavar="NAME=FILE")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    extras = {}
    for item in getattr(args, "extra", []) or []:
        name, _, path = item.partition("=")
        if not path:
            raise SystemExit(f"error: bad --extra {item!r}")
        extras[name] = path
    cfg = RunConfig(
        command=args.command,
        Ns=_parse_ns(getattr(args, "N", "8")),
        R=getattr(args, "R", 1.0),
        L=getattr(args, "L", 8),
        seed=args.seed,
        out=args.out,
        tolerances=_parse_tol_overrides(args.tol_override),
        profile=getattr(args, "profile", None),
        study=getattr(args, "study", None),
        trace_mode=getattr(args, "trace_mode", "triple"),
        surface=getattr(args, "surface", "sphere"),
        field_files=getattr(args, "fields", None),
        extras=extras,
        exprs=getattr(args, "exprs", []),
        kind=getattr(args, "kind", "vey"),
    )
    if args.command == "validate":
        return cmd_validate(cfg, args.geometry)
    if args.command == "star":
        return cmd_star(cfg)
    if args.command == "converge":
        return cmd_converge(cfg)
    if args.command == "encode":
        return cmd_encode(cfg)
    raise SystemExit(f"error: unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
