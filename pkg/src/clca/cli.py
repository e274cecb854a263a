"""Command-line entry point.

Subcommands cover the whole pipeline: gen-data, train, eval, chat, serve.
Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys

from .a2c import A2CConfig, evaluate_policy, train, uniform_random_actor
from .checkpoint import load_checkpoint, save_checkpoint
from .datasets import build_dataset, generate_records, load_dataset, save_dataset
from .env import EnvConfig, SalesEnv
from .errors import ClcaError, GenerationInterrupted
from .nets import predict
from .rng import derive_seed
from .schemas import CompanyProfile, TextProviderSpec, canonical_json
from .selection import ChatState, SelectionConfig, select_response

PROVIDER_KINDS = {"builtin": "builtin_template", "http": "http_chat"}


def _load_profile(path: str) -> CompanyProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return CompanyProfile.from_dict(json.load(fh))


def _provider_spec(name: str) -> TextProviderSpec:
    return TextProviderSpec(kind=PROVIDER_KINDS[name])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clca",
        description="Dialogue dataset generation, actor-critic training, and chat serving.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-data", help="generate a dialogue dataset")
    p.add_argument("--profile", required=True, help="company profile JSON file")
    p.add_argument("--n", required=True, type=int, help="number of records")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--provider", choices=sorted(PROVIDER_KINDS), default="builtin")
    p.set_defaults(func=_run_gen_data, _parser=p)

    p = sub.add_parser("train", help="train the actor-critic agent")
    p.add_argument("--data", required=True, help="dataset JSONL path")
    p.add_argument("--steps", required=True, type=int, help="total environment steps")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--config", help="JSON file with training-config overrides")
    p.add_argument("--report-dir", help="also write the training curve as CSV and PNG here")
    p.set_defaults(func=_run_train, _parser=p)

    p = sub.add_parser("eval", help="evaluate a checkpoint against a random baseline")
    p.add_argument("--data", required=True, help="dataset JSONL path")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--episodes", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--report-dir", help="also write the summary as CSV and PNG here")
    p.set_defaults(func=_run_eval, _parser=p)

    p = sub.add_parser("chat", help="chat with the agent on the terminal")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--profile", required=True, help="company profile JSON file")
    p.add_argument("--provider", choices=sorted(PROVIDER_KINDS), default="builtin")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_run_chat, _parser=p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static-dir", help="directory with the web UI build")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_run_serve, _parser=p)

    return parser


def _run_gen_data(args: argparse.Namespace) -> int:
    if args.n < 1:
        args._parser.error("--n must be >= 1")
    profile = _load_profile(args.profile)
    provider = _provider_spec(args.provider)
    try:
        records = generate_records(profile, args.n, provider, args.seed)
    except GenerationInterrupted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save_dataset(build_dataset(records), args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _train_config(args: argparse.Namespace) -> A2CConfig:
    overrides: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise ClcaError(f"{args.config}: expected a JSON object")
    overrides["total_timesteps"] = args.steps
    overrides["seed"] = args.seed
    return A2CConfig.from_dict(overrides)


def _run_train(args: argparse.Namespace) -> int:
    if args.steps < 1:
        args._parser.error("--steps must be >= 1")
    dataset = load_dataset(args.data)
    config = _train_config(args)
    env = SalesEnv(dataset, EnvConfig(seed=args.seed))
    model, stats = train(env, config)
    save_checkpoint(model, args.out)
    print("steps,mean_reward")
    for steps, mean_reward in stats:
        print(f"{steps},{mean_reward}")
    if args.report_dir:
        from .report import write_train_report

        for path in write_train_report(args.report_dir, stats):
            print(f"report: {path}", file=sys.stderr)
    return 0


def _run_eval(args: argparse.Namespace) -> int:
    if args.episodes < 1:
        args._parser.error("--episodes must be >= 1")
    dataset = load_dataset(args.data)
    model = load_checkpoint(args.model)
    env = SalesEnv(dataset, model.env_config)

    def policy_act(obs):
        return predict(model.params, obs, deterministic=True)

    policy = evaluate_policy(env, policy_act, args.episodes, args.seed)
    baseline = evaluate_policy(env, uniform_random_actor(args.seed), args.episodes, args.seed)
    print(canonical_json({"policy": policy, "random_baseline": baseline}))
    if args.report_dir:
        from .report import write_eval_report

        for path in write_eval_report(args.report_dir, policy, baseline):
            print(f"report: {path}", file=sys.stderr)
    return 0


def _run_chat(args: argparse.Namespace) -> int:
    model = load_checkpoint(args.model)
    profile = _load_profile(args.profile)
    provider = _provider_spec(args.provider)
    selection = SelectionConfig()
    chat = ChatState(profile=profile)
    exchange = 0
    while True:
        sys.stdout.write("you: ")
        sys.stdout.flush()
        line = sys.stdin.readline()
        if not line:
            print()
            return 0
        text = line.strip()
        if text == "/quit":
            return 0
        if not text:
            continue
        result = select_response(
            chat, text, model, provider, selection, derive_seed(args.seed, exchange)
        )
        chat = result.chat
        exchange += 1
        print(f"agent: {result.response}")
        print(f"action: {canonical_json(list(result.action.as_tuple()))}")
    return 0


def _run_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    model = load_checkpoint(args.model)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    finally:
        probe.close()
    app = create_app(model=model, model_path=args.model, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ClcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())
