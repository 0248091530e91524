"""Command-line entry point.

Exit codes: 0 success, 1 invariant violation (unexpected rejection, accepted
attack, digest mismatch), 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, RunInvariantError, SerializationError, VflError


def _cmd_run(args) -> int:
    from .experiment import ExperimentConfig, run_experiment

    cfg = ExperimentConfig.from_json_file(args.config)
    report = run_experiment(cfg)
    summary = report.summary
    print(f"cycles run:        {summary['cycles_run']}")
    print(f"updates accepted:  {summary['accept_tally']}")
    print(f"final accuracy:    {summary['final_accuracy']}")
    print(f"final version:     {summary['final_model_version']}")
    print(f"state digest:      {summary['final_state_digest']}")
    if cfg.output_dir:
        print(f"outputs written to {cfg.output_dir}/")
    return 0


def _cmd_attack_suite(args) -> int:
    from .attacks import run_attack_suite

    results = run_attack_suite(batch_size=args.batch_size, seed=args.seed)
    print(f"{'fixture':24} {'objective':9} {'stage':8} {'outcome':10} code")
    control = "PASS" if results["control_accepted"] else "FAIL"
    print(f"{'honest-control':24} {'control':9} {'ledger':8} {control:10} accepted run")
    for outcome in results["fixtures"]:
        verdict = "REJECTED" if outcome.rejected else "ACCEPTED"
        print(f"{outcome.name:24} {outcome.objective:9} {outcome.stage:8} "
              f"{verdict:10} {outcome.code}")
    print("objective coverage:",
          ", ".join(f"{k}={'ok' if v else 'BROKEN'}"
                    for k, v in results["objectives"].items()))
    if not results["control_accepted"] or not results["all_rejected"]:
        print("ATTACK SUITE FAILED", file=sys.stderr)
        return 1
    return 0


def _cmd_replay(args) -> int:
    from .ledger import replay_log

    ledger = replay_log(args.log)
    digest = ledger.state_digest()
    print(f"replayed to height {ledger.get_block_height()}")
    print(f"state digest: {digest}")
    if args.expect_digest is not None and int(args.expect_digest) != digest:
        print("digest mismatch", file=sys.stderr)
        return 1
    return 0


def _cmd_dump_circuit(args) -> int:
    from .circuits import build_learning_circuit, build_registration_circuit

    if args.label == "registration":
        cs = build_registration_circuit()
    elif args.label.startswith("learning-"):
        try:
            batch_size = int(args.label.split("-", 1)[1])
        except ValueError:
            raise ConfigError(f"bad circuit label: {args.label}")
        cs = build_learning_circuit(batch_size)
    else:
        raise ConfigError(f"unknown circuit label: {args.label}")
    data = cs.to_bytes()
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"{cs.label}: {cs.n_constraints} constraints, {len(data)} bytes, "
          f"digest {cs.digest().hex()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vflsim",
        description="Verifiable decentralized federated learning simulator.")
    parser.add_argument("--dump-poseidon-params", action="store_true",
                        help="print the Poseidon parameter table as JSON and exit")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="execute an experiment from a JSON config")
    p_run.add_argument("--config", required=True)

    p_attack = sub.add_parser("attack-suite",
                              help="run the adversarial fixtures and print the matrix")
    p_attack.add_argument("--batch-size", type=int, default=10)
    p_attack.add_argument("--seed", type=int, default=1337)

    p_replay = sub.add_parser("replay", help="re-apply a persisted transaction log")
    p_replay.add_argument("--log", required=True)
    p_replay.add_argument("--expect-digest", default=None,
                          help="fail unless the final state digest equals this value")

    p_dump = sub.add_parser("dump-circuit", help="serialize a circuit to a file")
    p_dump.add_argument("--label", required=True,
                        help='"registration" or "learning-<batch_size>"')
    p_dump.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.dump_poseidon_params:
            from .poseidon import params_to_json
            print(params_to_json())
            return 0
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "attack-suite":
            return _cmd_attack_suite(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "dump-circuit":
            return _cmd_dump_circuit(args)
        parser.print_help()
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RunInvariantError, SerializationError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except VflError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
