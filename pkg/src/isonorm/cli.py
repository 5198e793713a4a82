"""Command-line front end.

Exit codes: 0 on success, 1 when a mathematical check fails (a witness is
printed), 2 on malformed input or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys

import numpy as np

from . import io
from .algebra import AlgebraElement
from .constructions import canonical_transformation_bisections, meets_every_orbit
from .errors import CheckFailure, ConvergenceError, InputError
from .norms import (cstar_identity_defect, exotic_norm_finite, extension_infimum_probe,
                    morita_restriction_check, reduced_norm, tmred_certificate)
from .numerics import SEED
from .representations import (IsotropyRep, compression_identity_check, gns_cyclicity_check,
                              induced_regular_spectra, isotropy_regular_norm)
from .states import (StateFunctional, assemble_state, centralizer_check, extract_pair,
                     random_state_data, reduced_factorization_check)
from .towers import bundle_truncation, exoticness_verdict, quasi_norm_sequence

DEFAULT_TOL = 1e-10
OK, FAILED, BAD_INPUT = 0, 1, 2
HYPOTHESES = ("(1)", "(2)", "(3)", "injectivity")


class Failed(Exception):
    """A check failed on valid input; carries the report lines already built."""

    def __init__(self, prop: str, message: str, witness=()):
        super().__init__(message)
        self.prop = prop
        self.witness = tuple(witness)


class Report:
    """Ordered (key, value) pairs printed as text lines or as two-column CSV."""

    def __init__(self, csv_mode: bool = False):
        self.csv_mode = csv_mode
        self.rows: list[tuple[str, str]] = []
        self.lines: list[str] = []

    def add(self, key: str, value, text: str | None = None):
        self.rows.append((key, _fmt(value)))
        self.lines.append(text if text is not None else f"{key} = {_fmt(value)}")

    def note(self, text: str, key: str | None = None, value=None):
        self.lines.append(text)
        if key is not None:
            self.rows.append((key, _fmt(value)))

    def render(self) -> str:
        if not self.csv_mode:
            return "".join(line + "\n" for line in self.lines)
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value"])
        w.writerows(self.rows)
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9f}"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.9f}{v.imag:+.9f}j"
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _witness(w) -> str:
    return "(" + ", ".join(str(x) for x in w) + ")"


# -- validate ---------------------------------------------------------------------

def cmd_validate(args, rep: Report):
    report = io.validate_file(args.groupoid)
    if not report.ok:
        raise Failed("groupoid axioms", report.message, report.witness)
    G = io.load_groupoid(args.groupoid)
    rep.note(f"ok: {len(G)} elements, {len(G.units)} units", "elements", len(G))
    rep.rows.append(("units", str(len(G.units))))
    if G.grading is not None:
        G.grading.validate(G)
        pair = G.grading.injectivity_witness(G)
        rep.add("grading injective on isotropy", pair is None)


# -- norms ------------------------------------------------------------------------

def cmd_norms_reduced(args, rep: Report):
    G = io.load_groupoid(args.groupoid)
    f = io.load_element(G, args.element)
    r = reduced_norm(f, args.tol, args.jobs)
    rep.add("r-norm", r.value, f"r-norm = {r.value:.9f}")
    rep.add("attained at", r.witness[0])
    rep.add("sup-norm", f.sup_norm())
    for u, v in r.details["per_unit"].items():
        rep.add(f"unit {u}", v)
    rep.add("tol", f"{args.tol:g}")


def cmd_norms_exotic(args, rep: Report):
    G = io.load_groupoid(args.groupoid)
    h = io.load_element(G, args.element)
    r = exotic_norm_finite(G, args.at, h, args.tol, args.jobs)
    rep.add("e-norm", r.value, f"e-norm = {r.value:.9f}")
    rep.add("isotropy regular norm", r.details["isotropy_norm"])
    rep.add("l1-norm", r.details["l1"])
    if args.probe:
        p = extension_infimum_probe(G, args.at, h, args.probe, args.seed, tol=args.tol)
        rep.add("sampled extensions", p.samples)
        rep.add("min extension r-norm", p.min_extension_norm)
    rep.add("tol", f"{args.tol:g}")


def cmd_norms_tmred(args, rep: Report):
    G = io.load_groupoid(args.groupoid)
    h = io.load_element(G, args.element)
    x, fam, nbhd = io.bisections_from_json(io.read_json(args.bisections))
    x = args.at or x
    if x is None:
        raise InputError("no base unit: give --at or an 'x' field in the bisection file")
    if fam is None:
        fam = canonical_transformation_bisections(G, x)
    c = tmred_certificate(G, fam, x, h, neighbourhood=nbhd)
    if not c.passed:
        raise Failed(f"hypothesis {c.hypothesis}" if c.hypothesis.startswith("(")
                     else c.hypothesis, c.message, c.witness)
    rep.note("certificate: PASS", "certificate", "pass")
    rep.add("neighbourhood", list(c.neighbourhood))
    rep.add("extension r-norm", c.f_norm)
    rep.add("r-norm of h", c.h_reduced)
    rep.add("e-norm of h", c.h_exotic)
    rep.add("max factorization error", f"{c.max_factorization_error:.3e}")


def cmd_norms_morita(args, rep: Report):
    T = io.load_groupoid(args.groupoid)
    units = [u.strip() for u in args.units.split(",") if u.strip()]
    if not units:
        raise InputError("--units needs a comma-separated list of units")
    m = morita_restriction_check(T, units, args.batch, args.seed, args.tol)
    rep.add("units", list(m.units))
    rep.add("elements checked", m.checked)
    rep.add("max deviation", f"{m.max_deviation:.3e}")
    rep.note("restriction isometry: PASS", "isometry", "pass")


# -- tower ------------------------------------------------------------------------

def _tower_inputs(args):
    tower = io.tower_from_json(io.read_json(args.tower))
    a = io.tower_element_from_json(io.read_json(args.element))
    tower.check_element(a)
    return tower, a


def cmd_tower_norms(args, rep: Report):
    tower, a = _tower_inputs(args)
    seq = quasi_norm_sequence(tower, a, args.levels, jobs=args.jobs, seed=args.seed)
    for n, (v, d, m) in enumerate(zip(seq.values, seq.dims, seq.methods), 1):
        rep.add(f"level {n}", v, f"level {n}: |X_n| = {d}, ‖λ_n(a)‖ = {v:.9f} ({m})")
    rep.add("nondecreasing", seq.nondecreasing)
    if args.figure:
        from .plotting import tower_figure
        tower_figure(args.figure, seq.values, seq.dims, title="quasi-regular norms")


def cmd_tower_exotic(args, rep: Report):
    tower, a = _tower_inputs(args)
    v = exoticness_verdict(tower, a, args.levels, args.radius, args.jobs, args.seed)
    for n, val in enumerate(v.values, 1):
        rep.add(f"level {n}", val)
    rep.add("e-estimate converged (heuristic)", v.converged)
    rep.add(f"r lower (ball radius {args.radius})", v.r_lower)
    if v.exotic is None:
        rep.note(f"e ≥ {v.e_lower:.6f}, r ≥ {v.r_lower:.6f} → UNDECIDABLE HERE", "verdict",
                 "undecidable")
    else:
        rep.add(f"r upper ({v.note})", v.r_upper)
        word = "EXOTIC" if v.exotic else "NOT EXOTIC"
        rep.note(f"e ≥ {v.e_lower:.6f}, r ≤ {v.r_upper:.6f} → {word}", "verdict", word.lower())
    if args.figure:
        from .plotting import tower_figure
        tower_figure(args.figure, v.values, [lev.cosets for lev in tower.levels[:len(v.values)]],
                     r_upper=v.r_upper, r_lower=v.r_lower, title="e-norm against r-norm bounds")


def cmd_tower_truncate(args, rep: Report):
    tower = io.tower_from_json(io.read_json(args.tower))
    t = bundle_truncation(tower, args.levels)
    rep.add("elements", len(t.groupoid))
    rep.add("units", len(t.groupoid.units))
    for n, (s, r) in enumerate(zip(t.block_sizes, t.block_ranks), 1):
        rep.add(f"level {n} block", f"{s}x{s}", f"level {n}: {s}x{s} block, span rank {r}")
        if r != s * s:
            raise Failed("full matrix blocks", f"level {n} spans rank {r}, expected {s * s}", (n,))
    if args.out:
        io.write_json(args.out, io.groupoid_to_json(t.groupoid))
        rep.add("written", args.out)


# -- states -----------------------------------------------------------------------

def _load_functional(G, path) -> StateFunctional:
    data = io.read_json(path)
    vals = data.get("values")
    if not isinstance(vals, dict):
        raise InputError(f"{path}: a functional file needs a 'values' map")
    out = {}
    for g, v in vals.items():
        G.idx(str(g))
        out[str(g)] = complex(*v) if isinstance(v, (list, tuple)) else complex(v)
    return StateFunctional(G, out)


def cmd_states_assemble(args, rep: Report):
    G = io.load_groupoid(args.groupoid)
    data = io.state_from_json(io.read_json(args.state))
    phi = assemble_state(G, data)
    for g in G.elements:
        v = phi.values.get(g, 0.0)
        if v != 0:
            rep.add(f"φ(δ_{g})", complex(v))
    viol, wit = centralizer_check(phi)
    rep.add("centralizer violation", f"{viol:.3e}")
    if viol > 1e-12:
        raise Failed("unit functions in the centralizer", f"violation {viol:.3e}", wit)
    lo = phi.min_positivity_eigenvalue()
    rep.add("min positivity eigenvalue", f"{lo:.3e}")
    if lo < -args.tol:
        raise Failed("positivity", f"min eigenvalue {lo:.3e}", ())
    if args.element:
        f = io.load_element(G, args.element)
        rep.add("φ(f)", phi(f))
    if args.out:
        io.write_json(args.out, {"values": {g: [complex(v).real, complex(v).imag]
                                            for g, v in sorted(phi.values.items())}})


def cmd_states_extract(args, rep: Report):
    G = io.load_groupoid(args.groupoid)
    phi = _load_functional(G, args.functional)
    data = extract_pair(G, phi)
    back = assemble_state(G, data, validate=False)
    dev = max((abs(back.values.get(g, 0) - phi.values.get(g, 0)) for g in G.elements),
              default=0.0)
    for x in G.units:
        rep.add(f"μ({x})", float(data.mu[x]))
    rep.add("round-trip deviation", f"{dev:.3e}")
    if dev > args.tol:
        raise Failed("assemble ∘ extract = id", f"deviation {dev:.3e}", ())
    out = io.state_to_json(data)
    if args.out:
        io.write_json(args.out, out)
    else:
        import json
        rep.note(json.dumps(out, sort_keys=True))


def cmd_states_check(args, rep: Report):
    tower = io.tower_from_json(io.read_json(args.tower))
    mu, tau, probes = io.tower_trace_from_json(io.read_json(args.trace))
    if not probes:
        raise InputError("the trace file lists no probes")
    v = reduced_factorization_check(tower, mu, tau, probes, tol=args.tol, jobs=args.jobs)
    rep.add("test", v.label)
    if not v.passed:
        raise Failed(v.condition, v.message, v.witness)
    rep.note(f"PASS: {v.message}", "result", "pass")


# -- certify ----------------------------------------------------------------------

def cmd_certify(args, rep: Report):
    """Run the property battery on one groupoid; one line per property."""
    G = io.load_groupoid(args.groupoid)
    rng = np.random.default_rng(args.seed)
    n = args.samples
    fails = []

    def record(name, ok, detail, witness=()):
        rep.note(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", name, "pass" if ok else "fail")
        if not ok:
            fails.append((name, detail, witness))

    batch = [AlgebraElement.random(G, rng, density=0.5) for _ in range(n)]
    worst = max((cstar_identity_defect(f) for f in batch), default=0.0)
    record("C*-identity", worst <= 1e-9, f"max defect {worst:.3e}")
    low = min((reduced_norm(f, args.tol).value - f.sup_norm() for f in batch), default=0.0)
    record("sup-norm bound", low >= -args.tol, f"min gap {low:.3e}")

    worst_e, worst_c, worst_s, worst_i = 0.0, 0.0, 0.0, 0.0
    wit_e = ()
    for x in G.units:
        iso = [G.elements[i] for i in G.isotropy(G.unit_index(x))]
        for _ in range(n):
            h = AlgebraElement.random(G, rng, iso)
            try:
                e = exotic_norm_finite(G, x, h, args.tol).value
            except CheckFailure as exc:
                worst_e, wit_e = float("inf"), exc.witness
                continue
            d = abs(e - isotropy_regular_norm(h, x))
            if d > worst_e:
                worst_e, wit_e = d, (x,)
            red = reduced_norm(h, args.tol).value
            worst_i = max(worst_i, red - h.l1_norm())
        for f in batch[: max(1, n // 2)]:
            worst_c = max(worst_c, compression_identity_check(G, x, IsotropyRep.regular(G, x), f))
            a, b = induced_regular_spectra(G, x, f)
            worst_s = max(worst_s, float(np.max(np.abs(a - b), initial=0.0)))
    record("exotic = isotropy regular norm", worst_e <= args.tol, f"max deviation {worst_e:.3e}",
           wit_e)
    record("e-norm ≤ l1-norm", worst_i <= args.tol, f"max excess {worst_i:.3e}")
    record("compression identity", worst_c <= 1e-12, f"max deviation {worst_c:.3e}")
    record("induced = regular spectra", worst_s <= args.tol, f"max deviation {worst_s:.3e}")

    x0 = G.units[0]
    h = AlgebraElement.random(G, rng, [G.elements[i] for i in G.isotropy(G.unit_index(x0))])
    try:
        p = extension_infimum_probe(G, x0, h, n, args.seed, tol=args.tol)
        record("infimum at the zero extension", True,
               f"min sampled {p.min_extension_norm:.9f} ≥ e-norm {p.e_norm:.9f}")
    except CheckFailure as exc:
        record("infimum at the zero extension", False, str(exc), exc.witness)

    data = random_state_data(G, rng, full_support=True)
    phi = assemble_state(G, data)
    back = extract_pair(G, phi)
    phi2 = assemble_state(G, back)
    dev = max((abs(phi2.values.get(g, 0) - phi.values.get(g, 0)) for g in G.elements), default=0.0)
    viol, wit = centralizer_check(phi)
    lo = phi.min_positivity_eigenvalue()
    record("state round trip", dev == 0.0 or dev <= 1e-15, f"max deviation {dev:.3e}")
    record("state positivity", lo >= -1e-10, f"min eigenvalue {lo:.3e}")
    record("unit functions in the centralizer", viol <= 1e-12, f"max violation {viol:.3e}", wit)
    cyc = [gns_cyclicity_check(G, x, {x: 1.0})[0] for x in G.units]
    record("GNS cyclicity (δ_e-trace)", all(cyc), f"{sum(cyc)}/{len(cyc)} units")

    if G.grading is not None:
        if args.bisections:
            bx, fam, nbhd = io.bisections_from_json(io.read_json(args.bisections))
            targets = [(bx or x0, fam, nbhd)]
        else:
            targets = [(x, None, None) for x in G.units]
        for x, fam, nbhd in targets:
            given = fam is not None
            fam = fam or canonical_transformation_bisections(G, x)
            iso = [G.elements[i] for i in G.isotropy(G.unit_index(x))]
            h = AlgebraElement.random(G, rng, iso)
            c = tmred_certificate(G, fam, x, h, neighbourhood=nbhd)
            name = f"graded certificate at {x}"
            hyp = f"hypothesis {c.hypothesis} " if c.hypothesis else ""
            if not c.passed and not given and c.hypothesis in HYPOTHESES:
                # grading-level sets need not be bisections outside (partial) actions
                rep.note(f"SKIP {name}: level-set family fails {hyp.strip()}", name, "skip")
                continue
            record(name, c.passed,
                   c.message if c.passed else f"{hyp}{c.message} {_witness(c.witness)}",
                   c.witness)
    rep.add("units meeting every orbit", meets_every_orbit(G, list(G.units)))
    if fails:
        name, detail, wit = fails[0]
        raise Failed("certify", f"{len(fails)} propert{'y' if len(fails) == 1 else 'ies'} "
                     f"failed, first: {name}", wit)


# -- parser -----------------------------------------------------------------------

def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL,
                        help="comparison tolerance (default 1e-10)")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=SEED,
                        help="random seed (default 0x9E3779B9)")
    common.add_argument("--csv", action="store_true", help="print the report as CSV")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")

    p = argparse.ArgumentParser(prog="isonorm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True

    v = sub.add_parser("validate", parents=[common], help="check the groupoid axioms")
    v.add_argument("groupoid")
    v.set_defaults(func=cmd_validate)

    n = sub.add_parser("norms", help="reduced and exotic norms on a finite groupoid")
    nsub = n.add_subparsers(dest="which", metavar="which")
    nsub.required = True
    s = nsub.add_parser("reduced", parents=[common])
    s.add_argument("groupoid")
    s.add_argument("element")
    s.set_defaults(func=cmd_norms_reduced)
    s = nsub.add_parser("exotic", parents=[common])
    s.add_argument("--at", required=True, help="base unit x")
    s.add_argument("--probe", type=_nonneg_int, default=0,
                   help="also sample this many extensions off the isotropy group")
    s.add_argument("groupoid")
    s.add_argument("element")
    s.set_defaults(func=cmd_norms_exotic)
    s = nsub.add_parser("tmred", parents=[common])
    s.add_argument("--bisections", required=True, help="bisection family file")
    s.add_argument("--at", help="base unit (overrides the file)")
    s.add_argument("groupoid")
    s.add_argument("element")
    s.set_defaults(func=cmd_norms_tmred)
    s = nsub.add_parser("morita", parents=[common])
    s.add_argument("--units", required=True, help="comma-separated unit subset")
    s.add_argument("--batch", type=_nonneg_int, default=20, help="random elements to check")
    s.add_argument("groupoid")
    s.set_defaults(func=cmd_norms_morita)

    t = sub.add_parser("tower", help="quotient-tower norms and verdicts")
    tsub = t.add_subparsers(dest="which", metavar="which")
    tsub.required = True
    for name, func in (("norms", cmd_tower_norms), ("exotic", cmd_tower_exotic)):
        s = tsub.add_parser(name, parents=[common])
        s.add_argument("tower")
        s.add_argument("element")
        s.add_argument("--levels", type=_nonneg_int, help="use the first N levels")
        s.add_argument("--figure", metavar="PATH", help="write a plot of the sequence")
        if name == "exotic":
            s.add_argument("--radius", type=_nonneg_int, default=12,
                           help="ball radius for the r lower bound (default 12)")
        s.set_defaults(func=func)
    s = tsub.add_parser("truncate", parents=[common])
    s.add_argument("--levels", type=_nonneg_int, required=True)
    s.add_argument("--out", help="write the truncated groupoid here")
    s.add_argument("tower")
    s.set_defaults(func=cmd_tower_truncate)

    st = sub.add_parser("states", help="states with the unit functions in their centralizer")
    ssub = st.add_subparsers(dest="which", metavar="which")
    ssub.required = True
    s = ssub.add_parser("assemble", parents=[common])
    s.add_argument("groupoid")
    s.add_argument("state")
    s.add_argument("--element", help="also evaluate the state on this element")
    s.add_argument("--out", help="write the functional's values here")
    s.set_defaults(func=cmd_states_assemble)
    s = ssub.add_parser("extract", parents=[common])
    s.add_argument("groupoid")
    s.add_argument("functional")
    s.add_argument("--out", help="write the extracted state data here")
    s.set_defaults(func=cmd_states_extract)
    s = ssub.add_parser("check-factorization", parents=[common])
    s.add_argument("tower")
    s.add_argument("trace")
    s.set_defaults(func=cmd_states_check)

    c = sub.add_parser("certify", parents=[common], help="run the property battery on a groupoid")
    c.add_argument("groupoid")
    c.add_argument("--bisections", help="bisection family for the graded certificate")
    c.add_argument("--samples", type=_positive_int, default=10, help="random elements per check")
    c.set_defaults(func=cmd_certify)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and BAD_INPUT
    rep = Report(args.csv)
    try:
        args.func(args, rep)
    except Failed as exc:
        stdout.write(rep.render())
        stdout.write(f"FAIL {exc.prop}: {exc} witness {_witness(exc.witness)}\n")
        return FAILED
    except CheckFailure as exc:
        stdout.write(rep.render())
        stdout.write(f"FAIL {exc} witness {_witness(exc.witness)}\n")
        return FAILED
    except ConvergenceError as exc:
        stdout.write(rep.render())
        stdout.write(f"FAIL numerical convergence: {exc}\n")
        return FAILED
    except InputError as exc:
        wit = getattr(exc, "witness", ())
        stderr.write(f"error: {exc}" + (f" {_witness(wit)}" if wit else "") + "\n")
        return BAD_INPUT
    except (KeyError, TypeError, ValueError) as exc:
        stderr.write(f"error: malformed input ({type(exc).__name__}: {exc})\n")
        return BAD_INPUT
    stdout.write(rep.render())
    return OK


if __name__ == "__main__":
    sys.exit(main())
