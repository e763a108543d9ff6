"""``mmil`` command line: validate, roundtrip, fuse, classify, scenario.

Exit codes: 0 ok, 1 findings or negative analysis, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from mmil.codec import parse_component, serialize_component
from mmil.fusion import DialogueHistory, fuse, load_history
from mmil.model import MmilError, structural_diff, structural_equals
from mmil.pipeline import ManifestError, TurnError, run_scenario
from mmil.registry import default_registry, load_registry
from mmil.speech_acts import BUILTIN_POLICIES, SpeechActError, analyze, load_policies
from mmil.validator import DEFAULT, STRICT, errors, validate

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"mmil: {msg}", file=sys.stderr)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _UsageError(f"cannot read {path}: {getattr(exc, 'strerror', None) or exc}") from exc


def _registry(path: str | None):
    if path is None:
        return default_registry()
    try:
        return load_registry(path)
    except OSError as exc:
        raise _UsageError(f"cannot read registry {path}: {exc.strerror or exc}") from exc
    except MmilError as exc:
        raise _UsageError(f"registry {path}: {exc}") from exc


def cmd_validate(args: argparse.Namespace) -> int:
    registry = _registry(args.registry)
    text = _read(args.file)
    component, parse_diags = parse_component(text, registry)
    if component is None:
        for d in parse_diags:
            print(d)
        return EXIT_FINDINGS
    diags = validate(component, registry, STRICT if args.strict else DEFAULT)
    for d in diags:
        print(d.render())
    return EXIT_FINDINGS if errors(diags) else EXIT_OK


def cmd_roundtrip(args: argparse.Namespace) -> int:
    registry = _registry(args.registry)
    component, diags = parse_component(_read(args.file), registry)
    if component is None:
        for d in diags:
            _err(str(d))
        return EXIT_USAGE
    again, _ = parse_component(serialize_component(component), registry)
    if again is not None and structural_equals(component, again):
        return EXIT_OK
    if again is None:
        print("serialized output failed to reparse")
    else:
        for line in structural_diff(component, again):
            print(line)
    return EXIT_FINDINGS


def _load_checked(path: str, registry, what: str):
    component, diags = parse_component(_read(path), registry)
    if component is None:
        raise _UsageError(f"{what} {path}: " + "; ".join(str(d) for d in diags if d.severity == "error"))
    found = errors(validate(component, registry, DEFAULT))
    if found:
        raise _UsageError(f"{what} {path}: " + "; ".join(d.render() for d in found))
    return component


def cmd_fuse(args: argparse.Namespace) -> int:
    registry = _registry(args.registry)
    speech = _load_checked(args.speech, registry, "speech")
    gesture = _load_checked(args.gesture, registry, "gesture")
    history = DialogueHistory()
    if args.history:
        try:
            history = load_history(args.history)
        except OSError as exc:
            raise _UsageError(f"cannot read history {args.history}: {exc.strerror or exc}") from exc
        except MmilError as exc:
            raise _UsageError(f"history {args.history}: {exc}") from exc
    try:
        out = fuse(speech, gesture, history)
    except SpeechActError as exc:
        raise _UsageError(f"speech {args.speech}: {exc}") from exc
    sys.stdout.write(serialize_component(out.fused))
    for r in out.results:
        print(r.summary())
    return EXIT_OK if out.all_resolved else EXIT_FINDINGS


def _policy(args: argparse.Namespace):
    policies = dict(BUILTIN_POLICIES)
    if args.policy_file:
        try:
            policies.update(load_policies(args.policy_file))
        except OSError as exc:
            raise _UsageError(f"cannot read policy file {args.policy_file}: {exc.strerror or exc}") from exc
        except MmilError as exc:
            raise _UsageError(f"policy file {args.policy_file}: {exc}") from exc
    if args.policy not in policies:
        raise _UsageError(f"unknown policy {args.policy!r} (known: {', '.join(sorted(policies))})")
    return policies[args.policy]


def cmd_classify(args: argparse.Namespace) -> int:
    registry = _registry(args.registry)
    policy = _policy(args)
    component, diags = parse_component(_read(args.file), registry)
    if component is None:
        for d in diags:
            _err(str(d))
        return EXIT_USAGE
    try:
        structure = analyze(component, policy)
    except SpeechActError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return EXIT_FINDINGS
    print(structure.render())
    return EXIT_OK


def cmd_scenario(args: argparse.Namespace) -> int:
    try:
        state = run_scenario(args.manifest, args.out)
    except ManifestError as exc:
        raise _UsageError(str(exc)) from exc
    except TurnError as exc:
        _err(str(exc))
        return EXIT_FINDINGS
    except OSError as exc:
        raise _UsageError(f"cannot write to {args.out}: {exc.strerror or exc}") from exc
    for rec in state.transcript:
        kind = "gesture-only" if rec.gesture_only else f"act={rec.planned_act} modality={rec.chosen_modality}"
        print(f"turn {rec.turn_index}: {kind}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmil", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a component against a registry")
    p.add_argument("file")
    p.add_argument("--registry", metavar="PATH")
    p.add_argument("--strict", action="store_true", help="unknown categories/relations are errors")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("roundtrip", help="parse, serialize, reparse and compare")
    p.add_argument("file")
    p.add_argument("--registry", metavar="PATH")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("fuse", help="resolve speech references against a gesture")
    p.add_argument("speech")
    p.add_argument("gesture")
    p.add_argument("--history", metavar="PATH")
    p.add_argument("--registry", metavar="PATH")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("classify", help="event structure, utterance form and dialogue act")
    p.add_argument("file")
    p.add_argument("--policy", metavar="NAME", default="miamm")
    p.add_argument("--policy-file", metavar="PATH")
    p.add_argument("--registry", metavar="PATH")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scenario", help="replay a scripted multi-turn scenario")
    p.add_argument("manifest")
    p.add_argument("--out", metavar="DIR", required=True)
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
