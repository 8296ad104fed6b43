"""Training CLI: train-drcfix, train-placer, train-routability, eval-drcfix."""

from __future__ import annotations

import argparse
import json
import subprocess
import sys


def _primary(*argv):
    """Invoke the layout tool's CLI."""
    out = subprocess.run([sys.executable, "-m", "cellgen", *argv],
                         capture_output=True, text=True)
    if out.returncode not in (0, 1):
        raise RuntimeError(f"cellgen {' '.join(argv)} failed: {out.stderr}")
    return out.stdout


def cmd_train_drcfix(args):
    from .ppo import PpoConfig, train_drcfix
    cfg = PpoConfig(cell=args.cell, iterations=args.iterations,
                    n_envs=args.envs, seed=args.seed,
                    place_steps=args.place_steps)
    _model, curve = train_drcfix(cfg, out_path=args.out)
    print(json.dumps({"iterations": len(curve),
                      "final_reward": curve[-1]["mean_reward"]}))
    return 0


def cmd_eval_drcfix(args):
    import torch
    from .models import FixPolicy
    from .ppo import evaluate_model, evaluate_random
    from .weights_io import load_weights
    seeds = list(range(args.seed_start, args.seed_start + args.episodes))
    if args.weights:
        model = FixPolicy().load_tensors(load_weights(args.weights))
        residuals, initials = evaluate_model(model, args.cell, seeds,
                                             step_cap=args.step_cap)
    else:
        residuals, initials = evaluate_random(args.cell, seeds,
                                              step_cap=args.step_cap)
    mean = sum(residuals) / max(len(residuals), 1)
    print(json.dumps({"cell": args.cell, "episodes": len(residuals),
                      "mean_initial": sum(initials) / max(len(initials), 1),
                      "mean_residual": mean}))
    return 0


def cmd_train_placer(args):
    import tempfile
    from .placer_rl import train_placer
    from .weights_io import save_weights
    lib = json.loads(_primary("library", "--library-seed", "1"))
    pairs = []
    with tempfile.TemporaryDirectory() as tmp:
        for name in args.cells.split(","):
            entry = next(c for c in lib if c["name"] == name)
            netlist = {k: entry[k] for k in ("name", "devices", "pins")}
            path = f"{tmp}/{name}.json"
            with open(path, "w") as f:
                json.dump(netlist, f)
            rep = json.loads(_primary("place", "--netlist", path,
                                      "--steps", str(args.sa_steps),
                                      "--seed", f"placer-data/{name}"))
            pairs.append((netlist, rep))
    policy, curve = train_placer(pairs, epochs=args.epochs,
                                 finetune_episodes=args.finetune)
    if args.out:
        save_weights(args.out, {name: p.detach().numpy()
                                for name, p in policy.state_dict().items()})
    print(json.dumps({"imitation_nll": curve[-1]}))
    return 0


def cmd_train_routability(args):
    from .routability_train import load_dataset, train_routability
    records = load_dataset(args.dataset)
    _net, accuracy = train_routability(records, epochs=args.epochs,
                                       out_path=args.out, seed=args.seed)
    print(json.dumps({"records": len(records), "holdout_accuracy": accuracy}))
    return 0


def main(argv=None) -> int:
    top = argparse.ArgumentParser(prog="celltrainer", description=__doc__)
    sub = top.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("train-drcfix", help="PPO against the env protocol")
    p.add_argument("--cell", default="latch")
    p.add_argument("--iterations", type=int, default=36)
    p.add_argument("--envs", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--place-steps", type=int, default=4000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_drcfix)

    p = sub.add_parser("eval-drcfix", help="mean residual DRCs on held-out episodes")
    p.add_argument("--cell", default="latch")
    p.add_argument("--weights", help="policy weight file; omit for the random baseline")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed-start", type=int, default=10_000)
    p.add_argument("--step-cap", type=int, default=64)
    p.set_defaults(func=cmd_eval_drcfix)

    p = sub.add_parser("train-placer", help="imitation + policy-gradient placement")
    p.add_argument("--cells", default="inv,nand2,nor2")
    p.add_argument("--sa-steps", type=int, default=4000)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--finetune", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_placer)

    p = sub.add_parser("train-routability", help="1D-conv classifier on gen-dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_routability)

    args = top.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
