"""labctl: headless driver for the virtual laboratory.

Subcommands: run (config file to CSV, offline), serve (HTTP service),
seed (demo data into an empty data directory), check (smoke-test a live
deployment).  Exit codes: 0 success, 1 runtime/IO failure, 2 validation
failure.  Errors go to stderr one per line, machine-parseable; data goes
to stdout or files.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import yaml

from . import scheme
from .service import config as service_config

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _err(code: str, message: str) -> None:
    print(f"error: {code}: {message}", file=sys.stderr)


def _violations(violations) -> None:
    for v in violations:
        print(f"violation: slot={v.slot} param={v.param or '-'} "
              f"reason={v.reason} detail={v.detail}", file=sys.stderr)


def _load_template(ref: str) -> scheme.SchemeTemplate:
    for template in scheme.builtin_templates():
        if template.template_id == ref:
            return template
    return scheme.load_template(ref)


def cmd_run(args) -> int:
    try:
        template = _load_template(args.template)
    except OSError as exc:
        _err("io", f"cannot read template: {exc}")
        return EXIT_RUNTIME
    except scheme.TemplateError as exc:
        _err("template", str(exc))
        return EXIT_VALIDATION

    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        _err("io", f"cannot read config: {exc}")
        return EXIT_RUNTIME
    except yaml.YAMLError as exc:
        _err("config", f"unparseable config: {exc}")
        return EXIT_VALIDATION

    try:
        config = scheme.config_from_doc(doc)
    except scheme.ConfigDocumentError as exc:
        _err("config", str(exc))
        return EXIT_VALIDATION

    if args.samples is not None:
        if args.samples < 2:
            _err("config", "--samples must be at least 2")
            return EXIT_VALIDATION
        fixed = {**template.fixed_structure, "samples": args.samples}
        template = dataclasses.replace(template, fixed_structure=fixed)

    try:
        violations = scheme.validate_config(template, config)
    except scheme.TemplateError as exc:
        _err("config", str(exc))
        return EXIT_VALIDATION
    if violations:
        _err("config", "config failed validation")
        _violations(violations)
        return EXIT_VALIDATION

    try:
        series = scheme.run_config(template, config)
    except Exception as exc:
        _err("solver", f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME

    csv = series.to_csv()
    if args.out:
        try:
            Path(args.out).write_text(csv, encoding="utf-8")
        except OSError as exc:
            _err("io", f"cannot write {args.out}: {exc}")
            return EXIT_RUNTIME
    else:
        sys.stdout.write(csv)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.api import create_app

    try:
        cfg = service_config.from_env(
            addr=args.addr, workers=args.workers,
            session_ttl_h=args.session_ttl_h,
            data_dir=Path(args.data) if args.data else None,
            ui_dir=Path(args.ui) if args.ui else None)
    except ValueError as exc:
        _err("config", str(exc))
        return EXIT_VALIDATION
    app = create_app(cfg)
    print(f"serving on http://{cfg.addr} (data: {cfg.data_dir})", file=sys.stderr)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
    return EXIT_OK


def cmd_seed(args) -> int:
    from .scheme import builtin_templates
    from .service.seed import seed_demo
    from .service.store import Store

    data_dir = Path(args.data) if args.data \
        else service_config.from_env().data_dir
    if data_dir.exists() and any(data_dir.iterdir()):
        _err("data_dir_not_empty",
             f"{data_dir} already contains files; refusing to overwrite")
        return EXIT_RUNTIME

    store = Store(data_dir)
    try:
        templates = {t.template_id: t for t in builtin_templates()}
        credentials = seed_demo(store, templates)
    finally:
        store.close()
    for cred in credentials:
        print(f"login={cred['login']} password={cred['password']} "
              f"role={cred['role']}")
    return EXIT_OK


def cmd_check(args) -> int:
    import httpx

    addr = args.addr or service_config.from_env().addr
    base = f"http://{addr}/api/v1"
    try:
        with httpx.Client(timeout=10.0) as client:
            health = client.get(f"{base}/health")
            if health.status_code != 200:
                _err("health", f"GET /health returned {health.status_code}")
                return EXIT_RUNTIME

            session = client.post(f"{base}/session", json={
                "login": args.login, "password": args.password})
            if session.status_code != 200:
                _err("auth", f"authentication failed: {session.status_code} "
                             f"{session.text}")
                return EXIT_RUNTIME
            headers = {"Authorization": f"Bearer {session.json()['token']}"}

            template_id = args.template
            doc = client.get(f"{base}/templates/{template_id}", headers=headers)
            if doc.status_code != 200:
                _err("template", f"GET /templates/{template_id} returned "
                                 f"{doc.status_code}")
                return EXIT_RUNTIME
            template = doc.json()

            config = {
                "template": template_id,
                "selections": {s["slot"]: s["default"] for s in template["slots"]},
                "params": {
                    s["slot"]: {p["name"]: p["default"]
                                for k in s["kinds"] if k["kind"] == s["default"]
                                for p in k["params"]}
                    for s in template["slots"]
                },
                "sim": {p["name"]: p["default"] for p in template["sim"]},
            }
            posted = client.post(f"{base}/runs", json=config, headers=headers)
            if posted.status_code != 201:
                _err("run", f"POST /runs returned {posted.status_code}: "
                            f"{posted.text}")
                return EXIT_RUNTIME
            run_id = posted.json()["run_id"]

            deadline = time.monotonic() + args.timeout
            while True:
                run = client.get(f"{base}/runs/{run_id}", headers=headers).json()
                if run["status"] in ("Done", "Failed"):
                    break
                if time.monotonic() > deadline:
                    _err("timeout", f"run {run_id} still {run['status']} after "
                                    f"{args.timeout}s")
                    return EXIT_RUNTIME
                time.sleep(0.3)
            if run["status"] != "Done":
                _err("run_failed", run.get("error") or "run failed")
                return EXIT_RUNTIME

            declared = [o["channel"] for o in template["outputs"]]
            produced = list(run["result"]["channels"])
            for channel in declared:
                if channel not in produced:
                    _err("channel_missing", channel)
                    return EXIT_RUNTIME
            if set(produced) - set(declared):
                _err("channel_extra",
                     ",".join(sorted(set(produced) - set(declared))))
                return EXIT_RUNTIME
    except httpx.HTTPError as exc:
        _err("network", f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    print(f"ok: {addr} ran {args.template} with channels {declared}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labctl", description="virtual laboratory control tool")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="run a scheme config to CSV (offline)")
    p_run.add_argument("template", help="built-in template id or template file")
    p_run.add_argument("config", help="config document (YAML or JSON)")
    p_run.add_argument("--out", help="CSV output path (default: stdout)")
    p_run.add_argument("--samples", type=int, default=None,
                       help="override the template's output sample count")
    p_run.set_defaults(fn=cmd_run)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--addr", help="bind address host:port")
    p_serve.add_argument("--data", help="data directory")
    p_serve.add_argument("--workers", type=int, default=None,
                         help="simulation worker threads")
    p_serve.add_argument("--session-ttl-h", type=float, default=None,
                         help="session lifetime in hours")
    p_serve.add_argument("--ui", default=None,
                         help="directory with the built browser client")
    p_serve.set_defaults(fn=cmd_serve)

    p_seed = sub.add_parser("seed", help="write demo data into an empty data dir")
    p_seed.add_argument("--data", help="data directory")
    p_seed.set_defaults(fn=cmd_seed)

    p_check = sub.add_parser("check", help="smoke-test a running service")
    p_check.add_argument("--addr", help="service address host:port")
    p_check.add_argument("--login", required=True)
    p_check.add_argument("--password", required=True)
    p_check.add_argument("--template", default="vacuum-station",
                         help="template to exercise")
    p_check.add_argument("--timeout", type=float, default=60.0,
                         help="seconds to wait for the run")
    p_check.set_defaults(fn=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
