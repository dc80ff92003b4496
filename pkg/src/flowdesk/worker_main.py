"""Entry point for process-mode workers: ``python -m flowdesk.worker_main``.

Spawned by the launcher, one process per granted worker. Builds its own
HTTP client, runs the worker loop to completion, and exits.
"""

from __future__ import annotations

import argparse
import logging

from .client import HttpApi
from .launcher import worker_loop


def main(argv: list | None = None) -> int:
    parser = argparse.ArgumentParser(prog="flowdesk-worker")
    parser.add_argument("--api", required=True)
    parser.add_argument("--worker-id", required=True)
    parser.add_argument("--token", default=None)
    parser.add_argument("--poll-interval", type=float, default=2.0)
    parser.add_argument("--runner-override", default=None)
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    api = HttpApi(args.api, token=args.token)
    try:
        worker_loop(
            args.worker_id,
            api,
            poll_interval=args.poll_interval,
            runner_override=args.runner_override,
        )
    finally:
        api.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
