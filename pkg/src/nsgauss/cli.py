"""Command-line driver.

    nsgauss <experiment> [--flag value]... --out DIR [--config cfg.json]
    nsgauss run <experiment> ...            (same as above)
    nsgauss accept [--out DIR] [--only 1,3]
    nsgauss plotdata RUN_DIR... --out FILE

Values from ``--config`` override flags.  Exit codes: 0 success, 2 invalid
configuration, 3 numerical guard, 4 failed checks.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import __version__, experiments
from .action import GuardError
from .report import emit_plotdata, write_result

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_FAIL = 0, 2, 3, 4


class ConfigError(Exception):
    def __init__(self, where: str, line: int | None, message: str):
        super().__init__(message)
        self.where, self.line, self.message = where, line, message

    def __str__(self):
        loc = self.where if self.line is None else f"{self.where}:{self.line}"
        return f"{loc}: {self.message}"


def _key_line(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def load_config(path: str) -> tuple[dict, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(path, None, f"cannot read config: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(path, exc.lineno, f"invalid JSON: {exc.msg} (column {exc.colno})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(path, 1, "config must be a JSON object")
    params = cfg.get("parameters", cfg)
    if not isinstance(params, dict):
        raise ConfigError(path, _key_line(text, "parameters"), "'parameters' must be an object")
    return params, text


def _param_name(message: str) -> str | None:
    m = re.search(r"'([A-Za-z_0-9]+)'", message)
    return m.group(1) if m else None


def _experiment_parser(experiment: str) -> argparse.ArgumentParser:
    schema, _ = experiments.EXPERIMENTS[experiment]
    ap = argparse.ArgumentParser(prog=f"nsgauss {experiment}")
    for name, spec in schema.items():
        flags = {f"--{name}", f"--{name.replace('_', '-')}"}
        default = "required" if spec.default is experiments.REQUIRED else repr(spec.default)
        ap.add_argument(*sorted(flags), dest=name, default=None, metavar=spec.kind.upper(),
                        help=f"{spec.help} (default {default})")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--config", help="JSON config; its values override flags")
    return ap


def _resolve(experiment: str, flags: dict, cfg_path: str | None) -> dict:
    given = {k: v for k, v in flags.items() if v is not None}
    text, where = None, "<cli>"
    if cfg_path:
        cfg, text = load_config(cfg_path)
        cexp = cfg.pop("experiment", experiment)
        if cexp != experiment:
            raise ConfigError(cfg_path, _key_line(text, "experiment"),
                              f"config is for {cexp!r}, not {experiment!r}")
        cfg.pop("output", None)
        given.update(cfg)
    try:
        return experiments.resolve(experiment, given)
    except (KeyError, ValueError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        name = _param_name(msg)
        if text is not None and name is not None and name in cfg:
            where, line = cfg_path, _key_line(text, name)
        elif text is not None and name is not None and name not in given:
            where, line = cfg_path, 1   # missing everywhere: report against the config
        else:
            line = None
        raise ConfigError(where, line, msg) from None


def cmd_experiment(experiment: str, argv: list[str]) -> int:
    if experiment not in experiments.EXPERIMENTS:
        print(f"nsgauss: config error: <cli>: unknown experiment {experiment!r}; "
              f"choose from {', '.join(sorted(experiments.EXPERIMENTS))}", file=sys.stderr)
        return EXIT_CONFIG
    ns = _experiment_parser(experiment).parse_args(argv)
    flags = {k: v for k, v in vars(ns).items() if k not in ("out", "config")}
    try:
        params = _resolve(experiment, flags, ns.config)
    except ConfigError as exc:
        print(f"nsgauss: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = experiments.run(experiment, params)
    except GuardError as exc:
        print(f"nsgauss: numerical guard '{exc.guard}' tripped: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"nsgauss: config error: <cli>: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(ns.out)
    man = write_result(result, params, out, experiments.seeds_of(params))
    print(f"{experiment}: wrote {len(man.files)} files to {out} (config {man.config_sha256[:12]})")
    if result.passed is False:
        print(f"{experiment}: checks failed, see {out / 'summary.json'}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_accept(argv: list[str]) -> int:
    from .acceptance import run_acceptance

    ap = argparse.ArgumentParser(prog="nsgauss accept")
    ap.add_argument("--out", help="directory for per-criterion CSVs")
    ap.add_argument("--only", help="comma-separated criterion numbers")
    ap.add_argument("--no-determinism", action="store_true", help="skip the thread-count rerun")
    ns = ap.parse_args(argv)
    only = None
    if ns.only:
        try:
            only = {int(v) for v in ns.only.split(",")}
        except ValueError:
            print(f"nsgauss: config error: <cli>: bad --only {ns.only!r}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        results = run_acceptance(Path(ns.out) if ns.out else None, not ns.no_determinism, only=only)
    except GuardError as exc:
        print(f"nsgauss: numerical guard '{exc.guard}' tripped: {exc}", file=sys.stderr)
        return EXIT_GUARD
    ok = all(r.passed for r in results)
    print(f"acceptance: {sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_plotdata(argv: list[str]) -> int:
    ap = argparse.ArgumentParser(prog="nsgauss plotdata")
    ap.add_argument("runs", nargs="*", help="run output directories")
    ap.add_argument("--out", required=True, help="long-format CSV to write")
    ns = ap.parse_args(argv)
    try:
        n = emit_plotdata(ns.runs, Path(ns.out))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"nsgauss: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"plotdata: {n} rows from {len(ns.runs)} runs to {ns.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__.strip())
        print("\nexperiments: " + ", ".join(sorted(experiments.EXPERIMENTS)))
        return EXIT_OK if argv else EXIT_CONFIG
    if argv[0] == "--version":
        print(__version__)
        return EXIT_OK
    head, rest = argv[0], argv[1:]
    try:
        if head == "accept":
            return cmd_accept(rest)
        if head == "plotdata":
            return cmd_plotdata(rest)
        if head == "run":
            if not rest:
                print("nsgauss: config error: <cli>: 'run' needs an experiment name", file=sys.stderr)
                return EXIT_CONFIG
            head, rest = rest[0], rest[1:]
        return cmd_experiment(head, rest)
    except SystemExit as exc:      # argparse usage errors already exit with 2
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
