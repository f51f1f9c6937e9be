"""`mt-model-server serve --config server.toml`"""

from __future__ import annotations

import argparse
import sys

from .app import create_app
from .config import ServerConfig


def main(argv=None):
    parser = argparse.ArgumentParser(prog="mt-model-server")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("serve", help="run the HTTP sidecar")
    sp.add_argument("--config", help="TOML config file")
    sp.add_argument("--host", default=None)
    sp.add_argument("--port", type=int, default=None)
    sp.add_argument("--backend", choices=["builtin", "transformers"], default=None)
    args = parser.parse_args(argv)

    cfg = ServerConfig.load(args.config) if args.config else ServerConfig()
    if args.host is not None:
        cfg.host = args.host
    if args.port is not None:
        cfg.port = args.port
    if args.backend is not None:
        cfg.backend = args.backend

    import uvicorn
    print("serving %s backend on http://%s:%d" % (cfg.backend, cfg.host, cfg.port),
          file=sys.stderr)
    uvicorn.run(create_app(cfg), host=cfg.host, port=cfg.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
