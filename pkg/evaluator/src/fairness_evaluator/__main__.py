"""Entry point: ``python -m fairness_evaluator <config.json>``."""

from __future__ import annotations

import json
import sys

from .protocol import ServiceConfig, serve


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m fairness_evaluator <config.json>", file=sys.stderr)
        return 2
    try:
        with open(argv[0]) as fh:
            config = ServiceConfig.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    serve(config, sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
