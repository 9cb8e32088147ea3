"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure (transport, state, hard errors
during eval), 2 usage / config / input errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import yaml

from . import __version__
from .client import ClientConfig, HTTPChatClient, ReplayChatClient
from .curator import CurationConfig, build_corpus
from .errors import GraphReasonError, InputError, StateError, TransportError
from .evaluator import EvalConfig, eval_run, group_instances, render_table, write_reports
from .graph import extract_khop, load_graph, save_graph
from .grpo import DEFAULT_BETA, DEFAULT_EPSILON, grpo_objective, read_score_file
from .linearize import linearize
from .parsing import parse_response
from .prompts import TaskKind, Variant, build_prompt, iter_instances, sample_label_subset
from .rewards import reward

log = logging.getLogger("graphreason")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "graph": None,
    "instances": None,
    "out": None,
    "variant": "normal",
    "task": "node_classification",
    "k_way": None,
    "seed": 0,
    "hops": 1,
    "target_count": 10_000,
    "candidate_count": 3,
    "endpoint": None,
    "model": "deepseek-reasoner",
    "max_concurrency": 8,
    "epsilon": DEFAULT_EPSILON,
    "beta": DEFAULT_BETA,
    "mock": None,
    # config-file-only settings
    "api_key_env": "OPENAI_API_KEY",
    "temperature": 0.6,
    "max_tokens": 2048,
    "max_retries": 3,
    "timeout": 120.0,
    "min_nodes": 2,
    "min_edges": 1,
    "min_words": 30,
    "max_words": 2000,
    "require_markers": True,
    "blocklist": [],
    "summarize": False,
    "regression_penalty": "exclude",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, *names):
    opts = {
        "graph": dict(help="graph JSON file"),
        "instances": dict(help="task instances JSONL file"),
        "out": dict(help="output path"),
        "variant": dict(choices=[v.value for v in Variant], help="template variant"),
        "task": dict(help="task kind, e.g. node_classification"),
        "k_way": dict(type=int, help="restrict each instance to k labels"),
        "seed": dict(type=int, help="seed for all randomness"),
        "hops": dict(type=int, help="subgraph radius"),
        "target_count": dict(type=int, help="stop after this many accepted records"),
        "endpoint": dict(help="chat-completions URL"),
        "model": dict(help="model name sent to the endpoint"),
        "max_concurrency": dict(type=int, help="max in-flight requests"),
        "epsilon": dict(type=float, help="clip range"),
        "beta": dict(type=float, help="KL coefficient"),
        "mock": dict(metavar="FIXTURE", help="replay replies from a fixture file instead of the network"),
    }
    for name in names:
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, **opts[name])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphreason", description="Graph-to-text reasoning pipeline tools.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="YAML or JSON config file; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a graph or instances file")
    _common(p, "graph", "instances", "out")

    p = sub.add_parser("linearize", help="print the node and connection blocks of a subgraph")
    _common(p, "graph", "hops")
    p.add_argument("--targets", type=int, nargs="+", required=True)

    p = sub.add_parser("prompt", help="render prompts for instances")
    _common(p, "instances", "out", "variant", "k_way", "seed", "hops")
    p.add_argument("--candidate-count", dest="candidate_count", type=int, default=None)

    p = sub.add_parser("curate", help="build a filtered reasoning corpus")
    _common(p, "instances", "out", "variant", "hops", "target_count", "endpoint", "model",
            "max_concurrency", "mock")

    p = sub.add_parser("parse", help="parse a model reply")
    _common(p, "variant", "task")
    p.add_argument("--response", required=True, help="file holding the reply text ('-' for stdin)")

    p = sub.add_parser("score", help="reward for one reply")
    _common(p, "variant", "task")
    p.add_argument("--response", required=True, help="file holding the reply text ('-' for stdin)")
    p.add_argument("--gold", required=True)
    p.add_argument("--label", dest="labels", action="append", default=None,
                   help="one label of the label space (repeatable)")

    p = sub.add_parser("grpo-check", help="advantages and objective per group of a score file")
    _common(p, "epsilon", "beta")
    p.add_argument("--scores", required=True, help="score JSONL file")

    p = sub.add_parser("eval", help="zero-shot evaluation")
    _common(p, "instances", "out", "variant", "k_way", "seed", "hops", "endpoint", "model",
            "max_concurrency", "mock")
    return parser


def load_config(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve(args) -> dict:
    """Defaults < config file < flags."""
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(load_config(args.config))
    for key, value in vars(args).items():
        if value is not None:
            settings[key] = value
    validate(settings)
    return settings


def validate(s: dict) -> None:
    try:
        _validate(s)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config value: {exc}") from exc


def _validate(s: dict) -> None:
    def check(ok, msg):
        if not ok:
            raise UsageError(msg)

    try:
        s["variant"] = Variant.parse(s["variant"])
        s["task"] = TaskKind.parse(s["task"])
    except InputError as exc:
        raise UsageError(str(exc)) from exc
    check(s["k_way"] is None or int(s["k_way"]) >= 2, "--k-way must be >= 2")
    check(int(s["hops"]) >= 0, "--hops must be >= 0")
    check(int(s["target_count"]) >= 1, "--target-count must be >= 1")
    check(int(s["candidate_count"]) >= 2, "candidate_count must be >= 2")
    check(int(s["max_concurrency"]) >= 1, "--max-concurrency must be >= 1")
    check(0.0 < float(s["epsilon"]) < 1.0, "--epsilon must lie in (0, 1)")
    check(float(s["beta"]) >= 0.0, "--beta must be >= 0")
    check(float(s["temperature"]) >= 0.0, "temperature must be >= 0")
    check(int(s["max_tokens"]) >= 1, "max_tokens must be >= 1")
    check(int(s["max_retries"]) >= 0, "max_retries must be >= 0")
    check(1 <= int(s["min_nodes"]) and int(s["min_edges"]) >= 0, "min_nodes >= 1 and min_edges >= 0 required")
    check(0 <= int(s["min_words"]) <= int(s["max_words"]), "need 0 <= min_words <= max_words")
    penalty = s["regression_penalty"]
    check(penalty == "exclude" or isinstance(penalty, (int, float)),
          "regression_penalty must be 'exclude' or a number")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _require(s, *names):
    for name in names:
        if not s.get(name):
            raise UsageError(f"--{name.replace('_', '-')} is required")


def make_client(s):
    cfg = ClientConfig(
        endpoint_url=s["endpoint"] or "",
        model_name=s["model"],
        api_key_env=s["api_key_env"],
        temperature=float(s["temperature"]),
        max_tokens=int(s["max_tokens"]),
        max_retries=int(s["max_retries"]),
        timeout=float(s["timeout"]),
        max_concurrency=int(s["max_concurrency"]),
    )
    if s["mock"]:
        return ReplayChatClient.from_file(s["mock"], cfg)
    if not s["endpoint"]:
        raise UsageError("either --endpoint or --mock is required")
    return HTTPChatClient(cfg)


def _load_instances(s, errors=None):
    _require(s, "instances")
    return list(iter_instances(s["instances"], errors))


def cmd_ingest(s, out):
    if not s.get("graph") and not s.get("instances"):
        raise UsageError("ingest needs --graph or --instances")
    if s.get("graph"):
        g = load_graph(s["graph"])
        print(f"graph: {len(g.nodes)} nodes, {len(g.edges)} edges, directed={str(g.directed).lower()}", file=out)
        if s.get("out"):
            save_graph(g, s["out"])
    if s.get("instances"):
        insts = _load_instances(s)
        counts = Counter((i.dataset, i.kind.value) for i in insts)
        print(f"instances: {len(insts)}", file=out)
        for (dataset, kind), n in sorted(counts.items()):
            print(f"  {dataset or '-'} {kind}: {n}", file=out)
    return EXIT_OK


def cmd_linearize(s, out):
    _require(s, "graph")
    sub = extract_khop(load_graph(s["graph"]), s["targets"], int(s["hops"]))
    lin = linearize(sub)
    print("Node description:", file=out)
    print(lin.node_block, file=out)
    print("Connection relationship among the nodes:", file=out)
    print(lin.edge_block, file=out)
    return EXIT_OK


def cmd_prompt(s, out):
    insts = _load_instances(s)
    records = []
    for idx, inst in enumerate(insts):
        labels = None
        if s["k_way"] and inst.kind.is_classification and inst.label_space:
            labels = sample_label_subset(inst.label_space, int(s["k_way"]), inst.gold, int(s["seed"]) + idx)
        lin = linearize(inst.subgraph(int(s["hops"])))
        bundle = build_prompt(inst, lin, s["variant"], int(s["candidate_count"]), labels)
        records.append({"id": inst.id, "variant": bundle.variant.value, "full_text": bundle.full_text})
    if s.get("out"):
        with open(s["out"], "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    else:
        for rec in records:
            print(f"### {rec['id']}", file=out)
            print(rec["full_text"], file=out)
    return EXIT_OK


def cmd_curate(s, out):
    _require(s, "out")
    errors: list = []
    insts = _load_instances(s, errors)
    for lineno, msg in errors:
        log.warning("skipping unreadable instance at line %d: %s", lineno, msg)
    cfg = CurationConfig(
        hops=int(s["hops"]),
        min_nodes=int(s["min_nodes"]),
        min_edges=int(s["min_edges"]),
        min_words=int(s["min_words"]),
        max_words=int(s["max_words"]),
        require_markers=bool(s["require_markers"]),
        blocklist=tuple(s["blocklist"]),
        target_count=int(s["target_count"]),
        variant=s["variant"],
        candidate_count=int(s["candidate_count"]),
        summarize=bool(s["summarize"]),
        max_concurrency=int(s["max_concurrency"]),
    )
    out_path = Path(s["out"])
    stats_path = out_path.with_name(out_path.stem + ".stats.json")
    stats = build_corpus(insts, cfg, make_client(s), out_path)
    stats.unreadable += len(errors)
    stats.total += len(errors)
    stats_path.write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(json.dumps(stats.to_dict()), file=out)
    return EXIT_OK


def cmd_parse(s, out):
    parsed = parse_response(_read_text(s["response"]), s["variant"], s["task"])
    print(json.dumps(parsed.to_dict(), indent=2, ensure_ascii=False), file=out)
    return EXIT_OK


def cmd_score(s, out):
    parsed = parse_response(_read_text(s["response"]), s["variant"], s["task"])
    r = reward(parsed, s["gold"], s.get("labels"), s["variant"], s["task"])
    print(f"{r:g}", file=out)
    return EXIT_OK


def cmd_grpo_check(s, out):
    eps, beta = float(s["epsilon"]), float(s["beta"])
    for group in read_score_file(s["scores"]):
        group = group.with_advantages()
        obj = round(grpo_objective(group, eps, beta), 12) + 0.0
        adv = ", ".join(f"{round(a, 12) + 0.0:.6f}" for a in group.advantages)
        print(f"{group.query_id}\tg={group.g}\tadvantages=[{adv}]\tobjective={obj:.6f}", file=out)
    return EXIT_OK


def cmd_eval(s, out):
    insts = _load_instances(s)
    client = make_client(s)
    cfg = EvalConfig(
        variant=s["variant"],
        k_way=int(s["k_way"]) if s["k_way"] else None,
        seed=int(s["seed"]),
        hops=int(s["hops"]),
        candidate_count=int(s["candidate_count"]),
        regression_penalty=s["regression_penalty"],
        max_concurrency=int(s["max_concurrency"]),
    )
    reports = [eval_run(batch, cfg, client) for batch in group_instances(insts)]
    if s.get("out"):
        write_reports(reports, s["out"])
    print(render_table(reports), file=out)
    return EXIT_RUNTIME if any(r.hard_errors for r in reports) else EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "linearize": cmd_linearize,
    "prompt": cmd_prompt,
    "curate": cmd_curate,
    "parse": cmd_parse,
    "score": cmd_score,
    "grpo-check": cmd_grpo_check,
    "eval": cmd_eval,
}


def dispatch(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"graphreason: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = resolve(args)
        return COMMANDS[args.command](settings, out)
    except (UsageError, InputError) as exc:
        print(f"graphreason: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TransportError, StateError, GraphReasonError) as exc:
        print(f"graphreason: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
