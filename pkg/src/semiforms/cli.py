"""Command-line front end.

Exit status: 0 when every check passes, 2 when a mathematical check fails,
3 for unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Any

from . import logforms, semiinv
from .exactnum import CycNum
from .polyring import DiffForm, MPoly, NotDivisible, eq_up_to_scalar
from .reflgroup import (
    CharacterError, GroupSpecError, ReflectionGroup, character, fixture_path, isotypic_dim,
    load_group, stanley_series,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 2, 3


class InputError(Exception):
    pass


class Report:
    def __init__(self, title: str):
        self.title = title
        self.lines: list[str] = []
        self.checks: list[dict[str, Any]] = []
        self.data: dict[str, Any] = {}

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def check(self, name: str, passed: bool, details: str = "") -> bool:
        self.checks.append({"name": name, "pass": bool(passed), "details": details})
        return passed

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            out = dict(self.data)
            out["checks"] = self.checks
            return json.dumps(out, indent=2, sort_keys=True)
        body = [self.title, *self.lines]
        for c in self.checks:
            mark = "PASS" if c["pass"] else "FAIL"
            body.append(f"[{mark}] {c['name']}" + (f": {c['details']}" if c["details"] else ""))
        return "\n".join(body)


def _resolve_group(spec: str) -> ReflectionGroup:
    path = Path(spec)
    if not path.exists():
        path = fixture_path(spec)
    if not path.exists():
        raise InputError(f"no group file {spec!r}")
    try:
        return load_group(path)
    except (OSError, GroupSpecError) as exc:
        raise InputError(str(exc)) from exc


def _resolve_character(G: ReflectionGroup, spec: str):
    try:
        if Path(spec).is_file():
            with open(spec) as fh:
                return character(G, json.load(fh))
        return character(G, spec)
    except (OSError, json.JSONDecodeError, CharacterError) as exc:
        raise InputError(f"bad character {spec!r}: {exc}") from exc


def _poly_json(f: MPoly) -> Any:
    return f.to_json()


# -- subcommands ------------------------------------------------------------


def cmd_info(args, rep: Report) -> None:
    G = _resolve_group(args.group)
    binv = semiinv.basic_invariants(G)
    rep.say(f"group {G.name}: order {G.order}, {len(G.reflections)} reflections, "
            f"{len(G.arrangement)} hyperplanes")
    for H in G.arrangement:
        rep.say(f"  {H.alpha}   o(s_H) = {H.stab_order}")
    rep.say(f"basic invariant degrees {tuple(binv.degrees)}")
    rep.data.update({
        "group": G.name, "order": G.order, "reflections": len(G.reflections),
        "hyperplanes": [{"alpha": _poly_json(H.alpha), "order": H.stab_order} for H in G.arrangement],
        "degrees": binv.degrees,
    })
    prod = 1
    for d in binv.degrees:
        prod *= d
    rep.check("product of degrees equals |G|", prod == G.order, f"{prod} vs {G.order}")


def cmd_qchi(args, rep: Report) -> None:
    G = _resolve_group(args.group)
    ctx = semiinv.context(G, _resolve_character(G, args.char))
    rep.say(f"Q_chi     = {ctx.q_chi}")
    rep.say(f"Q_chi_det = {ctx.q_chi_det}")
    table = []
    bad = 0
    for H in ctx.arrangement:
        r = semiinv.ah_recurrence_check(H, ctx.chi, ctx.det)
        bad += not r.passed
        table.append({"alpha": _poly_json(H.alpha), "order": H.stab_order,
                      "a_chi": r.a_chi, "a_chi_det": r.a_chi_det})
        rep.say(f"  {str(H.alpha):<20} o={H.stab_order}  a(chi)={r.a_chi}  a(chi det)={r.a_chi_det}")
    rep.data.update({"group": G.name, "character": ctx.chi.spec(), "q_chi": _poly_json(ctx.q_chi),
                     "q_chi_det": _poly_json(ctx.q_chi_det), "a_table": table})
    rep.check("a_H recurrence", bad == 0, f"{bad} hyperplanes disagree" if bad else "")


def _certificate(rep: Report, ctx, cert) -> None:
    rep.data.update({
        "group": ctx.G.name, "character": ctx.chi.spec(),
        "q_chi": _poly_json(ctx.q_chi), "q_chi_det": _poly_json(ctx.q_chi_det),
        "generators": [w.to_json() for w in getattr(cert, "forms", [])],
        "witness_scalar": cert.witness_scalar.to_json() if cert.ok else None,
    })


def cmd_basis(args, rep: Report) -> None:
    G = _resolve_group(args.group)
    ctx = semiinv.context(G, _resolve_character(G, args.char))
    cap = args.degree_cap
    try:
        cert = semiinv.find_generators(ctx, cap)
    except semiinv.GeneratorSearchExhausted as exc:
        rep.check("generator search", False, str(exc))
        return
    for w, d in zip(cert.forms, cert.degrees):
        rep.say(f"degree {d}: {w}")
    rep.say(f"witness {cert.witness_scalar}")
    _certificate(rep, ctx, cert)
    rep.check("saito criterion", cert.ok, f"witness {cert.witness_scalar}")


def _load_forms(path: str) -> list[DiffForm]:
    try:
        with open(path) as fh:
            data = json.load(fh)
        items = data["forms"] if isinstance(data, dict) else data
        return [DiffForm.from_json(f) for f in items]
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad forms file {path!r}: {exc}") from exc


def cmd_saito(args, rep: Report) -> None:
    G = _resolve_group(args.group)
    ctx = semiinv.context(G, _resolve_character(G, args.char))
    if not args.forms:
        raise InputError("saito needs --forms")
    forms = _load_forms(args.forms)
    if any(w.m != G.m or w.nvars != G.n for w in forms):
        raise InputError("forms do not match the group's dimension or conductor")
    cert = semiinv.saito_check(forms, ctx)
    _certificate(rep, ctx, cert)
    if cert.ok:
        rep.check("saito criterion", True, f"witness {cert.witness_scalar}")
    else:
        rep.check("saito criterion", False, cert.reason)


def reference_q_det4(n: int = 3, m: int = 12, homogeneous: bool = True) -> MPoly:
    """The reference degree-24 polynomial; ``homogeneous=False`` keeps the literal "x z^6"."""
    x, y, z = (MPoly.var(n, m, i) for i in range(3))
    y3, z3 = y**3, z**3
    last = z**6 if homogeneous else x * z**6
    inner = (x**9 + (y3 + z3).scale(3) * x**6 + (y3 + z3) ** 3
             + (y**6 - (y3 * z3).scale(7) + last).scale(3) * x**3)
    return (x * y * z) ** 2 * inner**2


def cmd_verify_g26(args, rep: Report) -> None:
    G = _resolve_group(args.group or "g26")
    rep.check("closure has 1296 elements", G.order == 1296, f"|G| = {G.order}")
    n, m = G.n, G.m
    x, y, z = (MPoly.var(n, m, i) for i in range(3))
    ctx3 = semiinv.context(G, 3)
    ctx4 = semiinv.context(G, 4)
    expected3 = (x**3 - y**3) * (x**3 - z**3) * (y**3 - z**3)
    c = eq_up_to_scalar(ctx3.q_chi, expected3)
    rep.check("Q_det^3 matches the reference product", c is not None, f"scalar {c}")
    q4 = ctx4.q_chi
    hom = eq_up_to_scalar(q4, reference_q_det4(n, m, True))
    lit = reference_q_det4(n, m, False)
    rep.check("Q_det^4 is homogeneous of degree 24", q4.homogeneous_degree() == 24)
    rep.check("Q_det^4 matches the reference polynomial read with z^6", hom is not None, f"scalar {hom}")
    rep.say(f"reference term 'x z^6' read literally gives a homogeneous polynomial: "
            f"{lit.homogeneous_degree() is not None}")
    rep.data["q_det4_literal_matches"] = eq_up_to_scalar(q4, lit) is not None

    forms_path = args.forms or str(fixture_path("g26_det3_forms.json"))
    forms = _load_forms(forms_path)
    inv = [ctx3.is_invariant(w) for w in forms]
    rep.check("omega_1..3 are det^3-invariant", all(inv), str(inv))
    for i, j in ((0, 1), (1, 2), (0, 2)):
        try:
            semiinv.divide_by_factors(forms[i].wedge(forms[j]), ctx3, ctx3.a)
            ok = True
        except NotDivisible:
            ok = False
        rep.check(f"Q_det^3 divides omega_{i + 1}^omega_{j + 1}", ok)
    det_m = forms[0].wedge(forms[1]).wedge(forms[2]).top_coeff()
    target = (q4 * ctx3.q_chi**2).scale(CycNum.from_rational(m, -16))
    rep.check("det M = -16 Q_det^4 Q_det^3^2", det_m == target)
    cert = semiinv.saito_check(forms, ctx3)
    _certificate(rep, ctx3, cert)
    rep.check("saito criterion", cert.ok,
              f"witness {cert.witness_scalar}" if cert.ok else cert.reason)


def cmd_hilbert(args, rep: Report) -> None:
    G = _resolve_group(args.group)
    chi = _resolve_character(G, args.char)
    ctx = semiinv.context(G, chi)
    binv = semiinv.basic_invariants(G)
    cap = args.degree_cap
    predicted = stanley_series(ctx.q_chi.degree(), binv.degrees, cap)
    actual = [isotypic_dim(G, chi, 0, d) for d in range(cap + 1)]
    rep.say("d  dim  predicted")
    for d in range(cap + 1):
        rep.say(f"{d:<3}{actual[d]:<5}{predicted[d]}")
    rep.data.update({"group": G.name, "character": chi.spec(), "dims": actual,
                     "predicted": predicted})
    bad = [d for d in range(cap + 1) if actual[d] != predicted[d]]
    rep.check("isotypic dimensions match t^deg Q / prod(1 - t^d_i)", not bad,
              f"mismatch at degrees {bad}" if bad else "")


def cmd_logcheck(args, rep: Report) -> None:
    G = _resolve_group(args.group)
    ctx = semiinv.context(G, _resolve_character(G, args.char))
    rng = random.Random(args.seed)
    P = ctx.projector
    forms = []
    for d in range(1, args.degree_cap + 1):
        for p in range(1, G.n + 1):
            if isotypic_dim(G, ctx.chi, p, d):
                forms.append(P.random_form(rng, p, d))
    checks, fails = logforms.log_battery(ctx, forms)
    rep.data.update({"group": G.name, "character": ctx.chi.spec(), "checks_run": checks})
    rep.check("logarithmic membership and closure", fails == 0, f"{checks - fails}/{checks} passed")


COMMANDS = {
    "info": cmd_info, "qchi": cmd_qchi, "basis": cmd_basis, "saito": cmd_saito,
    "verify-g26": cmd_verify_g26, "hilbert": cmd_hilbert, "logcheck": cmd_logcheck,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="semiforms",
                                 description="Semiinvariant differential forms of complex reflection groups")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--group", help="group JSON file or shipped fixture name (g26, b2, s2, cyclic_m)")
    ap.add_argument("--char", default="det", help='character: "det^k" or a JSON table file')
    ap.add_argument("--degree-cap", type=int, default=None)
    ap.add_argument("--forms", help="JSON list of 1-forms (saito, verify-g26)")
    ap.add_argument("--output", choices=("text", "json"), default="text")
    ap.add_argument("--seed", type=int, default=0)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    rep = Report(f"semiforms {args.command}")
    try:
        if args.command != "verify-g26" and not args.group:
            raise InputError("--group is required")
        if args.degree_cap is not None and args.degree_cap < 1:
            raise InputError("--degree-cap must be at least 1")
        if args.degree_cap is None and args.command in ("hilbert", "logcheck"):
            args.degree_cap = 12 if args.command == "hilbert" else 6
        COMMANDS[args.command](args, rep)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(rep.render(args.output))
    return EXIT_OK if rep.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
