"""``ikas`` command line: build and check schemes, run the key workflow.

Exit status is 0 on success, 1 when the request is understood but fails
(bad parameters, unauthorized derivation, failed verification, I/O), and 2
on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import catalog, kas
from .core import HyperRect, format_node_id, parse_node_id
from .graph import stats
from .verify import default_report, family_names, format_table, formula_table

SEED_ENV = "IKAS_SEED"


class CommandError(Exception):
    """A failure worth one line on stderr and exit status 1."""


# -- argument helpers --------------------------------------------------------------


def parse_label(text: str) -> HyperRect:
    """``d=2;3-11,2-14``, or the short form ``3-11,2-14``."""
    text = text.strip()
    if text.startswith("d="):
        return parse_node_id(text)
    try:
        pairs = [tuple(int(v) for v in part.split("-", 1)) for part in text.split(",")]
        return HyperRect(pairs)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad label {text!r}; use a-b[,c-d...]") from None


def parse_factors(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad factor list {text!r}") from None


def parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            raise ValueError
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use a..b") from None


def _seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env in (None, ""):
        return None
    try:
        return int(env)
    except ValueError:
        raise CommandError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _read(path: Path, binary: bool = False):
    try:
        return path.read_bytes() if binary else path.read_text()
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Path | None, data, binary: bool = False) -> None:
    if path is None:
        if binary:
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    try:
        if binary:
            path.write_bytes(data)
        else:
            path.write_text(data)
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc.strerror}") from None


def _params(args) -> dict:
    con = catalog.lookup(args.construction)
    params = {"m": args.m, "n": args.n, "k": args.k, "factors": args.factors}
    # grids and cubes accept --m for their side length, and vice versa
    if "n" in con.needs and params["n"] is None:
        params["n"] = params["m"]
    if "m" in con.needs and params["m"] is None:
        params["m"] = params["n"]
    return {p: params[p] for p in con.needs}


def _build(args) -> catalog.Built:
    return catalog.build(args.construction, **_params(args))


def _rebuild(pub: kas.PublicInfo) -> catalog.Built:
    return catalog.build(pub.construction, **pub.params)


# -- subcommands --------------------------------------------------------------------


def cmd_build(args) -> int:
    _write(args.output, _build(args).graph.export_text())
    return 0


def cmd_stats(args) -> int:
    built = _build(args)
    s = stats(built.graph)
    rows = [
        ("construction", args.construction),
        ("space", str(built.space)),
        ("nodes", s.node_count),
        ("edges", s.edge_count),
        ("depth", s.derivation_depth),
        ("max out-degree", s.max_out_degree),
        ("components", s.component_count),
        ("keys per user", built.max_keys),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name.ljust(width)}  {value}")
    return 0


def cmd_verify(args) -> int:
    report = catalog.verify(args.construction, force=args.force, **_params(args))
    print(report.summary())
    return 0 if report.passed else 1


def cmd_table(args) -> int:
    if args.family is None:
        rows = default_report()
    else:
        lo, hi = args.range or (2, 16)
        rows = formula_table(args.family, lo, hi)
    sys.stdout.write(format_table(rows, args.format))
    return 0


def cmd_setup(args) -> int:
    built = _build(args)
    store, pub = kas.setup(built.graph, args.variant, kas.RandomSource(_seed(args)))
    _write(args.public, pub.to_json())
    _write(args.secrets, store.to_json())
    print(f"{len(pub.tokens)} tokens over {built.graph.node_count} nodes", file=sys.stderr)
    return 0


def cmd_issue(args) -> int:
    pub = kas.PublicInfo.from_json(_read(args.public))
    store = kas.SecretStore.from_json(_read(args.secrets))
    cred = kas.issue(store, args.label, _rebuild(pub).cover)
    _write(args.output, cred.to_json())
    return 0


def cmd_derive(args) -> int:
    pub = kas.PublicInfo.from_json(_read(args.public))
    cred = kas.UserCredential.from_json(_read(args.credential))
    key, path = kas.derive_with_path(pub, cred, args.target)
    print(key.hex())
    print(f"hops: {len(path) - 1}", file=sys.stderr)
    return 0


def _object_key(args, target: HyperRect) -> bytes:
    if args.key is not None:
        try:
            return bytes.fromhex(args.key)
        except ValueError:
            raise CommandError("--key must be hex") from None
    if args.secrets is not None:
        return kas.SecretStore.from_json(_read(args.secrets)).kappa(target)
    if args.public is None or args.credential is None:
        raise CommandError("give --key, --secrets, or both --public and --credential")
    pub = kas.PublicInfo.from_json(_read(args.public))
    cred = kas.UserCredential.from_json(_read(args.credential))
    return kas.derive(pub, cred, target)


def cmd_encrypt(args) -> int:
    payload = _read(args.input, binary=True)
    key = _object_key(args, args.target)
    blob = kas.encrypt_object(key, args.target, payload, kas.RandomSource(_seed(args)))
    _write(args.output, blob, binary=True)
    return 0


def cmd_decrypt(args) -> int:
    blob = _read(args.input, binary=True)
    key = _object_key(args, kas.object_target(blob))
    _write(args.output, kas.decrypt_object(key, blob), binary=True)
    return 0


def cmd_cover(args) -> int:
    for part in _build(args).cover(args.label):
        print(format_node_id(part))
    return 0


# -- parser ------------------------------------------------------------------------------


def _add_construction(p: argparse.ArgumentParser, flag: str = "--construction") -> None:
    names = ", ".join(catalog.names())
    p.add_argument(flag, "-c", dest="construction", required=True, metavar="NAME", help=f"one of: {names}")
    p.add_argument("--m", type=int, help="side length of a 1-d space or of a grid block")
    p.add_argument("--n", type=int, help="side length of a grid or cube")
    p.add_argument("--k", type=int, help="dimension (hyper) or block count (rect)")
    p.add_argument("--factors", type=parse_factors, help="factor schedule for mult, e.g. 3,4")


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help=f"deterministic randomness (falls back to ${SEED_ENV})")


def _add_key_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--key", help="object key as hex")
    p.add_argument("--secrets", type=Path, help="secret store; uses the target's key directly")
    p.add_argument("--public", type=Path, help="public info, used with --credential")
    p.add_argument("--credential", type=Path, help="user credential, used with --public")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ikas", description="Interval key assignment schemes.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("build", help="print a derivation graph, one edge per line")
    _add_construction(p)
    p.add_argument("--output", "-o", type=Path, help="write here instead of stdout")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("stats", help="node, edge, depth and component counts")
    _add_construction(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("verify", help="brute-force enforcement and closed-form checks")
    _add_construction(p)
    p.add_argument("--force", action="store_true", help="run beyond desk-scale limits")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="constructed counts next to their closed forms")
    p.add_argument("--family", choices=family_names(), metavar="FAMILY",
                   help="one family (default: the full report); one of " + ", ".join(family_names()))
    p.add_argument("--range", type=parse_range, metavar="A..B", help="parameter range (default 2..16)")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("setup", help="generate node secrets and public tokens")
    _add_construction(p)
    p.add_argument("--variant", choices=kas.VARIANTS, default=kas.INDISTINGUISHABILITY)
    p.add_argument("--public", type=Path, required=True, help="public info output (JSON)")
    p.add_argument("--secrets", type=Path, required=True, help="secret store output (JSON)")
    _add_seed(p)
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("issue", help="write a credential for a label")
    p.add_argument("--public", type=Path, required=True)
    p.add_argument("--secrets", type=Path, required=True)
    p.add_argument("--label", type=parse_label, required=True, help="e.g. 3-14 or d=2;1-2,3-4")
    p.add_argument("--output", "-o", type=Path, help="credential output (default stdout)")
    p.set_defaults(func=cmd_issue)

    p = sub.add_parser("derive", help="derive a target's object key from a credential")
    p.add_argument("--public", type=Path, required=True)
    p.add_argument("--credential", type=Path, required=True)
    p.add_argument("--target", type=parse_label, required=True)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("encrypt", help="encrypt a file for a target node")
    _add_key_source(p)
    p.add_argument("--target", type=parse_label, required=True)
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", dest="output", type=Path, help="ciphertext output (default stdout)")
    _add_seed(p)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt an object; the target is read from its header")
    _add_key_source(p)
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", dest="output", type=Path, help="plaintext output (default stdout)")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("cover", help="list the key nodes a label is split into")
    _add_construction(p, "--scheme")
    p.add_argument("--interval", "--label", dest="label", type=parse_label, required=True)
    p.set_defaults(func=cmd_cover)
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CommandError, kas.KasError, catalog.UnknownConstructionError, ValueError, ArithmeticError) as exc:
        print(f"ikas {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
