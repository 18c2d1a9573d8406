"""Command-line front end.

Every subcommand accepts ``--config FILE`` (a JSON object whose keys are the
long option names with dashes replaced by underscores); flags given on the
command line override the file.  Exit codes: 0 success, 2 configuration
error, 3 numerical failure (an ``error.json`` is written to the output
directory and echoed on stderr).
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DarbouxError, NotClosed
from .export import dumps_json, write_json, write_obj, write_ply, write_text

SUBCOMMANDS = ("transform", "holonomy", "resonances", "riccati", "spectral-scan", "iterate", "validate")


# --------------------------------------------------------------------------
# parsing helpers


def parse_mu(text) -> complex:
    """``re``, ``re,im`` or a resonance literal ``mu2`` ... ``mu9``."""
    from .spectral import resonance_mu

    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    s = str(text).strip()
    m = re.fullmatch(r"mu([2-9])", s)
    if m:
        return complex(resonance_mu(int(m.group(1))))
    parts = s.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"cannot parse spectral value {text!r}")


def parse_floats(text, n=None, name="value"):
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",")]
        except ValueError as exc:
            raise ConfigError(f"cannot parse {name} {text!r}") from exc
    if n is not None and len(vals) != n:
        raise ConfigError(f"{name} needs {n} comma-separated numbers")
    return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p):
    p.add_argument("--config", help="JSON config file; flags override its entries")
    p.add_argument("--surface", choices=["cylinder", "unduloid", "nodoid", "import"])
    p.add_argument("--neck", type=float, help="neck radius for Delaunay surfaces")
    p.add_argument("--patch", help="patch file for --surface import")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--X", type=float, dest="X", help="length of the x-range")
    p.add_argument("--tol", type=float, help="relative integration tolerance")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", help="mesh formats, comma-separated (obj,ply)")


def _mu_options(p, suffix=""):
    dest = "mu" + suffix.replace("-", "_")
    p.add_argument(f"--mu{suffix}", dest=dest, help="re[,im] or mu2..mu9")
    p.add_argument(f"--mu-polar{suffix}", dest=f"mu_polar{suffix.replace('-', '_')}", help="r,theta")
    p.add_argument(f"--which{suffix}", dest=f"which{suffix.replace('-', '_')}",
                   choices=["plus", "minus", "mix", "initial"])
    p.add_argument(f"--mix{suffix}", dest=f"mix{suffix.replace('-', '_')}", help="m+,m- weights at a resonance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cmc-darboux", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p = sub.add_parser("transform", help="mu-Darboux transform and meshes")
    _common(p)
    _mu_options(p)
    p.add_argument("--initial", help="a0re,a0im,a1re,a1im for --which initial")
    p = sub.add_parser("holonomy", help="holonomy around the periodic direction")
    _common(p)
    _mu_options(p)
    p.add_argument("--x0", type=float)
    p = sub.add_parser("resonances", help="resonance points of the surface")
    _common(p)
    p.add_argument("--kmax", type=int)
    p = sub.add_parser("riccati", help="classical transform from the Riccati equation")
    _common(p)
    p.add_argument("--r", type=float)
    p.add_argument("--dir", help="unit imaginary direction x,y,z (r outside [0,1])")
    p.add_argument("--sign", help="+ or - (0 < r < 1)")
    p = sub.add_parser("spectral-scan", help="holonomy eigen-data over the spectral plane")
    _common(p)
    p.add_argument("--segment", help="lo,hi,n real samples (geometric)")
    p.add_argument("--ring", help="radius,n samples on a circle")
    p.add_argument("--refine", action="store_true", default=None, help="refine resonances on the real samples")
    p = sub.add_parser("iterate", help="transform of a transform")
    _common(p)
    _mu_options(p)
    _mu_options(p, "-next")
    p = sub.add_parser("validate", help="structural checks of a patch")
    _common(p)
    return parser


DEFAULTS = {
    "surface": "cylinder", "neck": 0.3, "patch": None, "nx": 64, "ny": 256, "X": 2 * math.pi,
    "tol": 1e-10, "out": "out", "format": "obj,ply",
    "mu": None, "mu_polar": None, "which": None, "mix": None, "initial": None, "x0": None,
    "kmax": 5, "r": None, "dir": "0,0,1", "sign": "+", "segment": None, "ring": None, "refine": None,
    "mu_next": None, "mu_polar_next": None, "which_next": None, "mix_next": None,
}


def _glue_values(argv):
    """Turn ``--mu -1,0`` into ``--mu=-1,0`` so argparse does not read an option."""
    argv = list(argv)
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and re.fullmatch(r"-[\d.].*", argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def resolve_config(argv) -> tuple[str, dict]:
    parser = build_parser()
    ns = parser.parse_args(_glue_values(argv))
    if ns.command is None:
        raise ConfigError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
    flags = {k: v for k, v in vars(ns).items() if v is not None and k not in ("command", "config")}
    cfg = {}
    if getattr(ns, "config", None):
        try:
            data = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        allowed = {a.dest for a in _subparser(parser, ns.command)._actions} - {"help", "config"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg.update(data)
    cfg.update(flags)
    merged = {k: cfg.get(k, DEFAULTS.get(k)) for k in set(DEFAULTS) | set(cfg)}
    return ns.command, merged


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


# --------------------------------------------------------------------------
# pipeline pieces


def make_surface(cfg):
    from . import surfaces

    kind = cfg["surface"]
    nx, ny, X = int(cfg["nx"]), int(cfg["ny"]), float(cfg["X"])
    try:
        if kind == "cylinder":
            return surfaces.cylinder(nx, ny, X)
        if kind in ("unduloid", "nodoid"):
            return surfaces.delaunay(kind, float(cfg["neck"]), nx, ny, X)
        if kind == "import":
            if not cfg.get("patch"):
                raise ConfigError("--surface import needs --patch")
            return surfaces.import_patch(cfg["patch"])
    except ValueError as exc:
        if isinstance(exc, DarbouxError):
            raise
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown surface {kind!r}")


def get_mu(cfg, suffix=""):
    mu, polar = cfg.get("mu" + suffix), cfg.get("mu_polar" + suffix)
    if mu is not None and polar is not None:
        raise ConfigError("give either --mu or --mu-polar, not both")
    if polar is not None:
        r, theta = parse_floats(polar, 2, "mu-polar")
        return complex(r * math.cos(theta), r * math.sin(theta))
    if mu is None:
        raise ConfigError("a spectral value is required (--mu or --mu-polar)")
    return parse_mu(mu)


def _mix(cfg, suffix=""):
    m = cfg.get("mix" + suffix)
    if m is None:
        return None
    vals = parse_floats(m, 2, "mix")
    return complex(vals[0]), complex(vals[1])


def run_transform(patch, mu, which, mix, tol, initial=None):
    """Closed or plain transform; non-closed results are returned, not raised."""
    from .connection import build
    from .darboux import closed_mu_darboux, mu_darboux

    form = build(patch, mu)
    if mix is not None and which is None:
        which = "mix"
    if which is None:
        which = "plus" if patch.y_periodic else "initial"
    if which == "initial":
        init = np.array([1.0, 0.0], dtype=complex) if initial is None else initial
        return mu_darboux(form, init, tol=tol)
    try:
        return closed_mu_darboux(form, which, mix or (1.0, 1.0), tol=tol)
    except NotClosed as exc:
        if exc.result is None:
            raise
        return exc.result


def export_meshes(out: Path, name: str, points, welded: bool, formats) -> list:
    written = []
    for fmt in formats:
        fmt = fmt.strip().lower()
        if not fmt:
            continue
        path = out / f"{name}.{fmt}"
        if fmt == "obj":
            write_obj(path, points, welded)
        elif fmt == "ply":
            write_ply(path, points, welded)
        else:
            raise ConfigError(f"unknown mesh format {fmt!r}")
        written.append(path.name)
    return written


def stamp(command: str, cfg: dict) -> dict:
    import scipy

    return {
        "command": command,
        "config": {k: cfg[k] for k in sorted(cfg)},
        "package_version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": ".".join(map(str, sys.version_info[:3])),
        "tolerances": {"integration_rtol": cfg.get("tol")},
    }


def cmd_transform(cfg, out):
    patch = make_surface(cfg)
    mu = get_mu(cfg)
    initial = None
    if cfg.get("initial") is not None:
        v = parse_floats(cfg["initial"], 4, "initial")
        initial = np.array([complex(v[0], v[1]), complex(v[2], v[3])])
    res = run_transform(patch, mu, cfg.get("which"), _mix(cfg), float(cfg["tol"]), initial)
    welded = res.is_closed
    fmts = str(cfg["format"]).split(",")
    files = export_meshes(out, "f", patch.f, patch.y_periodic, fmts)
    files += export_meshes(out, "f_hat", res.im_f_hat, welded, fmts)
    summary = res.summary()
    summary["seam_welded"] = welded
    summary["files"] = files
    write_json(out / "summary.json", summary)
    return summary


def cmd_holonomy(cfg, out):
    from .connection import build
    from .holonomy import holonomy_csv, holonomy_y

    patch = make_surface(cfg)
    mu = get_mu(cfg)
    data = holonomy_y(build(patch, mu), cfg.get("x0"), float(cfg["tol"]))
    write_text(out / "holonomy.csv", holonomy_csv([data]))
    summary = {"mu": mu, "H": data.H, "h_plus": data.h_plus, "h_minus": data.h_minus,
               "det_error": abs(data.det - 1), "degenerate": data.degenerate,
               "full_eigenspace": data.full_eigenspace, "rho_plus": data.rho_plus, "rho_minus": data.rho_minus}
    write_json(out / "holonomy.json", summary)
    return summary


def cmd_resonances(cfg, out):
    import csv
    import io

    from .connection import build
    from .cylinder_analytic import analytic_monodromy
    from .holonomy import holonomy_y
    from .scan import find_resonances, scan
    from .spectral import resonance_points

    patch = make_surface(cfg)
    kmax = int(cfg["kmax"])
    try:
        points = resonance_points(kmax)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tol = min(float(cfg["tol"]), 1e-12)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["k", "mu_k", "mu_refined", "h_re", "h_im", "dist_to_minus_one", "dist_to_closed_form", "scalar_holonomy"])
    rows = []
    for pt in points:
        lo, hi = pt.mu_k * 0.97, pt.mu_k * 1.03
        rep = scan(patch, [lo, pt.mu_k * 0.99, pt.mu_k * 1.01, hi], tol)
        found = find_resonances(patch, rep, tol)
        refined = found[0].mu if found else float("nan")
        data = holonomy_y(build(patch, pt.mu_k), tol=tol)
        h = 0.5 * (data.h_plus + data.h_minus)
        closed = analytic_monodromy(pt.mu_k)[0] if patch.metadata.get("provider") == "cylinder" else float("nan")
        row = [pt.k, repr(pt.mu_k), repr(refined), repr(h.real), repr(h.imag), repr(abs(h + 1)),
               repr(abs(h - closed)), int(data.full_eigenspace)]
        w.writerow(row)
        rows.append({"k": pt.k, "mu_k": pt.mu_k, "mu_refined": refined, "h": h, "dist_to_minus_one": abs(h + 1)})
    write_text(out / "resonances.csv", buf.getvalue())
    write_json(out / "resonances.json", {"resonances": rows})
    return {"resonances": rows}


def cmd_riccati(cfg, out):
    from .riccati import init_T, integrate_riccati, match_mu_darboux

    patch = make_surface(cfg)
    if cfg.get("r") is None:
        raise ConfigError("riccati needs --r")
    sign = {"+": 1, "-": -1, "+1": 1, "-1": -1, "1": 1}.get(str(cfg["sign"]).strip())
    if sign is None:
        raise ConfigError("--sign must be + or -")
    v = parse_floats(cfg["dir"], 3, "dir")
    spec = init_T(patch, (0, 0), float(cfg["r"]), sign, v)
    res = integrate_riccati(patch, spec, min(float(cfg["tol"]), 1e-10))
    dist, mu = match_mu_darboux(patch, res, spec)
    fmts = str(cfg["format"]).split(",")
    files = export_meshes(out, "f", patch.f, patch.y_periodic, fmts)
    files += export_meshes(out, "f_sharp", res.im_f_hat, res.is_closed, fmts)
    summary = {"r": spec.r, "T0": spec.T0, "constraint_residual": res.notes["constraint_residual"],
               "mean_curvature": res.mean_curvature().summary(), "wedge_residual": res.wedge_residual(),
               "matching_mu": mu, "match_distance": dist, "closedness": res.closedness, "files": files}
    write_json(out / "summary.json", summary)
    return summary


def cmd_scan(cfg, out):
    from .scan import closed_under_reality, find_resonances, plot_script, real_segment, reality_involution_check, ring, scan

    patch = make_surface(cfg)
    samples = []
    if cfg.get("segment"):
        lo, hi, n = parse_floats(cfg["segment"], 3, "segment")
        samples += list(real_segment(lo, hi, int(n)))
    if cfg.get("ring"):
        r, n = parse_floats(cfg["ring"], 2, "ring")
        samples += list(ring(r, int(n)))
    if not samples:
        samples = list(real_segment(0.01, 0.9, 60))
    samples = closed_under_reality(samples)
    rep = scan(patch, samples, float(cfg["tol"]))
    if cfg.get("refine"):
        find_resonances(patch, rep)
    reality_involution_check(rep)
    write_text(out / "scan.csv", rep.csv())
    write_text(out / "scan.json", rep.json() + "\n")
    write_text(out / "plot_scan.py", plot_script("scan.csv"))
    return rep.to_dict()


def cmd_iterate(cfg, out):
    from .darboux import iterate

    patch = make_surface(cfg)
    first = run_transform(patch, get_mu(cfg), cfg.get("which"), _mix(cfg), float(cfg["tol"]))
    new_patch = iterate(first)
    second = run_transform(new_patch, get_mu(cfg, "_next"), cfg.get("which_next"), _mix(cfg, "_next"), float(cfg["tol"]))
    fmts = str(cfg["format"]).split(",")
    files = export_meshes(out, "f", patch.f, patch.y_periodic, fmts)
    files += export_meshes(out, "f_hat", first.im_f_hat, first.is_closed, fmts)
    files += export_meshes(out, "f_hat2", second.im_f_hat, second.is_closed, fmts)
    summary = {"first": first.summary(), "second": second.summary(), "files": files}
    write_json(out / "summary.json", summary)
    return summary


def cmd_validate(cfg, out):
    from .surfaces import validate

    patch = make_surface(cfg)
    report = validate(patch).to_dict()
    write_json(out / "validation.json", report)
    return report


COMMANDS = {
    "transform": cmd_transform, "holonomy": cmd_holonomy, "resonances": cmd_resonances,
    "riccati": cmd_riccati, "spectral-scan": cmd_scan, "iterate": cmd_iterate, "validate": cmd_validate,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    out = None
    try:
        command, cfg = resolve_config(argv)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "stamp.json", stamp(command, cfg))
        result = COMMANDS[command](cfg, out)
        sys.stdout.write(dumps_json(result))
        return 0
    except DarbouxError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(dumps_json(err))
        if out is not None:
            try:
                write_json(out / "error.json", err)
            except OSError:
                pass
        return exc.exit_code
    except OSError as exc:
        err = {"error": "Io", "message": str(exc), "exit_code": 3}
        sys.stderr.write(dumps_json(err))
        return 3


if __name__ == "__main__":
    sys.exit(main())
