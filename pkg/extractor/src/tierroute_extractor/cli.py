"""Command-line entry: run one extraction described by a config file."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import load_config
from .extract import extract


def main(argv: list[str] | None = None) -> int:
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(
        os.environ.get("TIERROUTE_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="tierroute-extract",
        description="Fine-tune a small multi-exit encoder and write a trace file "
                    "in the tierroute JSON-Lines format.")
    parser.add_argument("--config", required=True, metavar="PATH",
                        help="extractor config JSON document")
    args = parser.parse_args(argv)
    try:
        summary = extract(load_config(args.config))
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    print(f"wrote {summary.n_records} records to {summary.traces}")
    print(f"  D={summary.D} E={summary.E} classes={summary.num_classes} "
          f"splits={summary.split_sizes}")
    print(f"  selected bs={summary.batch_size} lr={summary.lr} "
          f"best_epoch={summary.best_epoch} val_acc={summary.best_val_acc:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
