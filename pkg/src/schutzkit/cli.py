"""Command line entry point: ``schutzkit <command> [options]``.

Exit status is 0 when every verdict passes, 1 when some check fails,
2 on malformed input or a violated precondition, 3 when a size guard trips.
Monoid arguments are document paths or names of bundled corpus monoids.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus
from .core import InputError, SizeGuardError, enumerate_valuations
from .dmonoid import DMonoid, LetterAssignment, validate_dmonoid
from .documents import parse_monoid_spec, serialize_monoid
from .languages import TruncLanguage, marked_product
from .products import schutzenberger, star_product
from .recognition import (DEFAULT_BOUND, TRUNCATION_NOTE, VerificationReport, closure_check,
                          corestriction, decompose_middle, random_schutz_assignment, recognizes,
                          reutenauer_check, schurec_witness, trivial_assignment,
                          universal_property_check)

VERIFY_TARGETS = ("schurec", "reutenauer", "decompose", "closure", "universal")
TABLE_LIMIT = 64
TEXT_TABLE_LIMIT = 16


@dataclass
class CommandConfig:
    command: str
    theorem: str | None = None
    left: str | None = None
    right: str | None = None
    alphabet: tuple = ("a", "b")
    images: str | None = None
    mark: str | None = None
    max_len: int = DEFAULT_BOUND
    mode: str = "without"
    format: str = "json"
    seed: int = 0
    languages: list = field(default_factory=list)
    modulus: int | None = None
    via: str = "image"
    export: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.max_len < 1:
            raise InputError("--max-len must be at least 1")


# ---------------------------------------------------------------- inputs


def load_monoid(ref: str | None) -> DMonoid:
    """A document path, or the name of a bundled corpus monoid."""
    if ref is None:
        raise InputError("missing monoid argument")
    path = Path(ref)
    if path.exists():
        return parse_monoid_spec(path.read_text(encoding="utf-8"))
    if ref in corpus.CORPUS:
        return corpus.load(ref)
    raise InputError(f"no such document or corpus monoid: {ref}")


def parse_images(text: str, alphabet, monoid: DMonoid) -> LetterAssignment:
    """``a=g,b=1``: one image name per letter."""
    mapping = {}
    for part in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in part:
            raise InputError(f"bad image binding {part!r}, expected letter=element")
        k, v = (s.strip() for s in part.split("=", 1))
        mapping[k] = v
    missing = [a for a in alphabet if a not in mapping]
    if missing:
        raise InputError(f"no image for letters {', '.join(missing)}")
    unknown = [a for a in mapping if a not in alphabet]
    if unknown:
        raise InputError(f"images given for letters outside the alphabet: {', '.join(unknown)}")
    names = monoid.names
    try:
        idx = tuple(names.index(mapping[a]) for a in alphabet)
    except ValueError:
        bad = next(mapping[a] for a in alphabet if mapping[a] not in names)
        raise InputError(f"unknown element {bad!r}") from None
    return LetterAssignment(tuple(alphabet), monoid, idx)


def parse_language(spec: str, alphabet, bound: int, semiring) -> TruncLanguage:
    """``all``, ``none``, ``words:w1|w2`` (ε or empty for the empty word),
    ``contains:x``, ``length-mod:k:r``, ``count:x`` (occurrences of x in the semiring)."""
    kind, _, arg = spec.partition(":")
    alphabet = tuple(alphabet)
    k = len(semiring.elements)
    if kind == "all":
        fn = lambda u: 1  # noqa: E731
    elif kind == "none":
        fn = lambda u: 0  # noqa: E731
    elif kind == "words":
        words = {("" if w in ("ε", "eps") else w) for w in arg.split("|")}
        fn = lambda u: int(u in words)  # noqa: E731
    elif kind == "contains":
        fn = lambda u: int(arg in u)  # noqa: E731
    elif kind == "length-mod":
        try:
            mod, r = (int(x) for x in arg.split(":"))
        except ValueError:
            raise InputError("length-mod needs k:r") from None
        fn = lambda u: int(len(u) % mod == r)  # noqa: E731
    elif kind == "count":
        fn = lambda u: min(u.count(arg), 1) if semiring.boolean else u.count(arg) % k  # noqa: E731
    else:
        raise InputError(f"unknown language spec {spec!r}")
    return TruncLanguage.from_function(alphabet, bound, semiring, fn)


def schutz_assignment_from(cfg: CommandConfig, sp):
    """--images "left;right" with --mark gives the marked-letter rule; otherwise a seeded random assignment."""
    alphabet = cfg.alphabet
    if cfg.images:
        parts = cfg.images.split(";")
        if len(parts) != 2:
            raise InputError('--images needs "left;right" bindings for a product')
        g = parse_images(parts[0], alphabet, sp.left)
        h = parse_images(parts[1], alphabet, sp.right)
        mark = cfg.mark or alphabet[0]
        return g, h, schurec_witness(g, enumerate_valuations(sp.left.carrier)[0], h,
                                     enumerate_valuations(sp.right.carrier)[0], mark, cfg.max_len).assignment
    return None, None, random_schutz_assignment(sp, alphabet, np.random.default_rng(cfg.seed))


# ---------------------------------------------------------------- commands


def _table(m: DMonoid) -> list | None:
    if m.size > TABLE_LIMIT:
        return None
    names = m.names
    return [[names[int(x)] for x in row] for row in m.table]


def cmd_validate(cfg):
    m = load_monoid(cfg.left)
    problems = validate_dmonoid(m)
    report = VerificationReport("validate", f"{m!r}", 0, "pass" if not problems else "fail",
                                problems[0] if problems else None, {"violations": list(problems)})
    return [report]


def cmd_star(cfg):
    m, n = load_monoid(cfg.left), load_monoid(cfg.right)
    sp = star_product(m, n)
    out = {"variety": str(sp.variety), "left_size": m.size, "right_size": n.size, "size": sp.size,
           "unit": sp.name(sp.unit), "elements": sp.names if sp.size <= TABLE_LIMIT else None,
           "generators": {f"{m.name(a)}*{n.name(b)}": sp.name(int(sp.gen[a, b]))
                          for a in range(m.size) for b in range(n.size)},
           "mult": _table(sp)}
    return out


def cmd_schutzenberger(cfg):
    m, n = load_monoid(cfg.left), load_monoid(cfg.right)
    sp = schutzenberger(m, n)
    out = {"variety": str(sp.variety), "left_size": m.size, "right_size": n.size, "star_size": sp.star.size,
           "middle_size": sp.algebra.size, "size": sp.size, "unit": sp.name(sp.unit), "mult": _table(sp)}
    if cfg.export:
        Path(cfg.export).write_text(serialize_monoid(sp), encoding="utf-8")
        out["exported"] = cfg.export
    return out


def cmd_recognize(cfg):
    m = load_monoid(cfg.left)
    if not cfg.images:
        raise InputError("recognize needs --images")
    if len(cfg.languages) != 1:
        raise InputError("recognize needs exactly one --language")
    f = parse_images(cfg.images, cfg.alphabet, m)
    target = parse_language(cfg.languages[0], cfg.alphabet, cfg.max_len, m.variety.semiring)
    v = recognizes(f, target)
    report = VerificationReport("recognize", f"{m!r}, language {cfg.languages[0]}", cfg.max_len,
                                notes=[TRUNCATION_NOTE.format(L=cfg.max_len)])
    if v is None:
        report.verdict = "fail"
        report.notes.append("no valuation recognizes the language")
    else:
        report.witness = {"valuation": {m.name(i): int(x) for i, x in enumerate(v.values)}}
    return [report]


def cmd_marked_product(cfg):
    if len(cfg.languages) != 2:
        raise InputError("marked-product needs two --language options")
    if not cfg.mark:
        raise InputError("marked-product needs --mark")
    from .core import OutputSemiring, is_prime

    if cfg.modulus is not None and not is_prime(cfg.modulus):
        raise InputError(f"modulus must be prime, got {cfg.modulus}")
    s = OutputSemiring(cfg.modulus)
    k, lang = (parse_language(x, cfg.alphabet, cfg.max_len, s) for x in cfg.languages)
    prod = marked_product(k, cfg.mark, lang)
    values = {(prod.word_str(i) or "ε"): int(v) for i, v in enumerate(prod.values) if v}
    return {"bound": cfg.max_len, "semiring": str(s), "support_size": len(values), "values": values,
            "notes": [TRUNCATION_NOTE.format(L=cfg.max_len)]}


def cmd_verify(cfg):
    m, n = load_monoid(cfg.left), load_monoid(cfg.right)
    sp = schutzenberger(m, n)
    L = cfg.max_len
    if cfg.theorem == "schurec":
        if not cfg.images:
            raise InputError("verify schurec needs --images")
        parts = cfg.images.split(";")
        if len(parts) != 2:
            raise InputError('--images needs "left;right" bindings')
        g = parse_images(parts[0], cfg.alphabet, m)
        h = parse_images(parts[1], cfg.alphabet, n)
        marks = [cfg.mark] if cfg.mark else list(cfg.alphabet)
        reports = []
        for a in marks:
            for i, p in enumerate(enumerate_valuations(m.carrier)):
                for j, q in enumerate(enumerate_valuations(n.carrier)):
                    r = schurec_witness(g, p, h, q, a, L).report
                    r.instance += f", p{i}, q{j}"
                    reports.append(r)
        return reports
    _, _, f = schutz_assignment_from(cfg, sp)
    if cfg.theorem == "reutenauer":
        return [reutenauer_check(f, L)]
    if cfg.theorem == "decompose":
        reports = []
        for i, p in enumerate(enumerate_valuations(m.carrier)):
            for j, q in enumerate(enumerate_valuations(n.carrier)):
                r = decompose_middle(f, p, q, L).report
                r.instance += f", p{i}, q{j}"
                reports.append(r)
        return reports
    if cfg.theorem == "closure":
        return [closure_check(f, cfg.mode, L, cfg.seed)]
    e = corestriction(f) if cfg.via == "image" else trivial_assignment(f)
    return [universal_property_check(f, e, L).report]


COMMANDS = {"validate": cmd_validate, "star": cmd_star, "schutzenberger": cmd_schutzenberger,
            "recognize": cmd_recognize, "marked-product": cmd_marked_product, "verify": cmd_verify}


def run_command(cfg: CommandConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        result = COMMANDS[cfg.command](cfg)
    except SizeGuardError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if isinstance(result, list):
        out.write(emit_report(result, cfg.format, cfg.timing))
        if any(r.verdict == "precondition-violated" for r in result):
            return 2
        return 0 if all(r.passed for r in result) else 1
    out.write(emit_data(result, cfg.format))
    return 0


# ---------------------------------------------------------------- output


def emit_data(data: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    lines = []
    for k in sorted(data):
        v = data[k]
        if k == "mult" and v and len(v) > TEXT_TABLE_LIMIT:
            lines.append(f"mult: {len(v)}x{len(v)} table (use --format json)")
        elif k == "mult" and v:
            lines.append("mult:")
            width = max(len(x) for row in v for x in row)
            lines.extend("  " + " ".join(x.rjust(width) for x in row) for row in v)
        elif isinstance(v, dict):
            lines.append(f"{k}:")
            lines.extend(f"  {a}: {b}" for a, b in v.items())
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def emit_report(reports, fmt: str = "json", timing: bool = False) -> str:
    if isinstance(reports, VerificationReport):
        reports = [reports]
    if fmt == "json":
        doc = {"reports": [r.to_dict(timing) for r in reports],
               "verdict": "pass" if all(r.passed for r in reports) else
               next(r.verdict for r in reports if not r.passed)}
        return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    rows = []
    for r in reports:
        line = f"{r.theorem:<11} {r.verdict:<22} L={r.bound:<3} {r.instance}"
        if r.counterexample is not None:
            line += f"  counterexample: {r.counterexample}"
        if timing:
            line += f"  ({r.timing:.3f}s)"
        rows.append(line)
        rows.extend(f"    note: {n}" for n in r.notes if not n.startswith("checked on all words"))
    rows.append(f"bound L={reports[0].bound if reports else 0}: "
                f"{sum(r.passed for r in reports)}/{len(reports)} passed")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schutzkit", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("theorem", nargs="?", choices=VERIFY_TARGETS, help="what to verify (verify only)")
    parser.add_argument("--left", help="monoid document path or corpus name")
    parser.add_argument("--right", help="monoid document path or corpus name")
    parser.add_argument("--alphabet", default="a,b", help="comma separated symbols (default a,b)")
    parser.add_argument("--images", help='letter images, "a=g,b=1" or "left;right" for products')
    parser.add_argument("--mark", help="marked letter")
    parser.add_argument("--max-len", type=int, default=DEFAULT_BOUND, help="word length bound L")
    parser.add_argument("--mode", choices=("with-derivatives", "without"), default="without")
    parser.add_argument("--format", choices=("json", "table"), default="json")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--language", action="append", default=[],
                        help="all | none | words:w1|w2 | contains:x | length-mod:k:r | count:x")
    parser.add_argument("--modulus", type=int, help="prime modulus for marked-product (default Boolean)")
    parser.add_argument("--via", choices=("image", "trivial"), default="image",
                        help="universal: factor through the image or the trivial monoid")
    parser.add_argument("--export", help="schutzenberger: write the product as a document")
    parser.add_argument("--timing", action="store_true", help="include wall-clock timing in reports")
    return parser


def config_from_args(args) -> CommandConfig:
    if args.command == "verify" and not args.theorem:
        raise InputError(f"verify needs one of: {', '.join(VERIFY_TARGETS)}")
    alphabet = tuple(s.strip() for s in args.alphabet.split(",") if s.strip())
    if not alphabet:
        raise InputError("empty alphabet")
    return CommandConfig(command=args.command, theorem=args.theorem, left=args.left, right=args.right,
                         alphabet=alphabet, images=args.images, mark=args.mark, max_len=args.max_len,
                         mode="with" if args.mode == "with-derivatives" else "without", format=args.format,
                         seed=args.seed, languages=args.language, modulus=args.modulus, via=args.via,
                         export=args.export, timing=args.timing)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
