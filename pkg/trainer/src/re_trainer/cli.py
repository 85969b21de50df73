"""CLI: train a checkpoint from a flat config file, emit prediction files."""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, TrainConfig
from .data import EncodingError
from .train import predict, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="re-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fine-tune a marker classifier")
    p_train.add_argument("--config", required=True, help="flat key=value config file")

    p_predict = sub.add_parser("predict", help="write (instance_id, label) predictions")
    p_predict.add_argument("--checkpoint", required=True)
    p_predict.add_argument("--corpus", required=True)
    p_predict.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            checkpoint = train(TrainConfig.from_file(args.config))
            print(f"checkpoint written to {checkpoint}")
        else:
            out = predict(args.checkpoint, args.corpus, args.out)
            print(f"predictions written to {out}")
    except (ConfigError, EncodingError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
