"""
Command-line harness.

    qfock run --config run.json [--seed N] [--out report.json] [--suite NAME ...]
    qfock kernel --kind constant|anyon_fermion --q RE,IM --d D [--out kernel.json]

A run config is a JSON object::

    {
      "kernel": {"kind": "anyon_fermion", "q": [0.0, 1.0], "d": 3} | "kernel.json",
      "n_max": 3,
      "d": 3,
      "suites": ["braid", {"name": "exclusion", "m": 3}],
      "tolerances": {"modulus_one": 1e-12, "projector": 1e-10, "spectral_zero": 1e-8},
      "seed": 0,
      "size_cap": 4096
    }

Exit status is 0 when every suite passes (or is skipped), 1 when a suite
fails and 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any

from . import qsym, suites
from .kernel import (
    KernelError,
    QKernel,
    anyon_fermion_kernel,
    constant_kernel,
    kernel_from_dict,
    kernel_to_dict,
    load_kernel,
)
from .permgroup import SizeLimitError

SCHEMA = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    kernel: QKernel
    n_max: int
    suites: list[tuple[str, dict[str, Any]]]
    tolerances: suites.Tolerances = field(default_factory=suites.Tolerances)
    seed: int = 0
    size_cap: int = qsym.SIZE_CAP

    @property
    def d(self) -> int:
        return self.kernel.d

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: str | os.PathLike = ".") -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"kernel", "n_max", "d", "suites", "tolerances", "seed", "size_cap"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kernel" not in data or "n_max" not in data:
            raise ConfigError("config needs 'kernel' and 'n_max'")

        spec = data["kernel"]
        try:
            if isinstance(spec, str):
                K = load_kernel(os.path.join(base_dir, spec))
            else:
                K = kernel_from_dict(spec)
        except OSError as exc:
            raise ConfigError(f"cannot read kernel file: {exc}") from exc
        except KernelError as exc:
            raise ConfigError(f"kernel: {exc}") from exc

        if "d" in data and int(data["d"]) != K.d:
            raise ConfigError(f"config d = {data['d']} but kernel has d = {K.d}")
        n_max = int(data["n_max"])
        if n_max < 1:
            raise ConfigError("n_max must be at least 1")
        size_cap = int(data.get("size_cap", qsym.SIZE_CAP))
        if K.d**n_max > size_cap:
            raise SizeLimitError(f"d**n_max = {K.d}**{n_max} = {K.d**n_max} exceeds size cap {size_cap}")

        try:
            tol = suites.Tolerances.from_dict(data.get("tolerances"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"tolerances: {exc}") from exc

        return cls(
            kernel=K,
            n_max=n_max,
            suites=parse_suites(data.get("suites", list(suites.SUITES))),
            tolerances=tol,
            seed=int(data.get("seed", 0)),
            size_cap=size_cap,
        )


def parse_suites(items) -> list[tuple[str, dict[str, Any]]]:
    if not isinstance(items, list) or not items:
        raise ConfigError("'suites' must be a nonempty list")
    out = []
    for item in items:
        if isinstance(item, str):
            name, params = item, {}
        elif isinstance(item, dict) and isinstance(item.get("name"), str):
            params = {k: v for k, v in item.items() if k != "name"}
            name = item["name"]
        else:
            raise ConfigError(f"bad suite entry {item!r}")
        try:
            out.append((suites.resolve(name), params))
        except KeyError:
            raise ConfigError(
                f"unknown suite {name!r}; known: {', '.join(suites.SUITES)}"
            ) from None
    return out


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return RunConfig.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


@contextlib.contextmanager
def _size_cap(cap: int):
    old = qsym.SIZE_CAP
    qsym.SIZE_CAP = cap
    try:
        yield
    finally:
        qsym.SIZE_CAP = old


def run(config: RunConfig, *, timings: bool = False) -> dict[str, Any]:
    """Run every configured suite and assemble the report dictionary."""
    results = []
    with _size_cap(config.size_cap):
        for name, params in config.suites:
            ctx = suites.SuiteContext(
                kernel=config.kernel,
                n_max=config.n_max,
                tol=config.tolerances,
                seed=config.seed,
                params=params,
            )
            start = time.perf_counter()
            res = suites.SUITES[name](ctx).to_json()
            if params:
                res["params"] = params
            if timings:
                res["wall_time"] = time.perf_counter() - start
            results.append(res)
    return {
        "schema": SCHEMA,
        "seed": config.seed,
        "kernel": kernel_to_dict(config.kernel),
        "n_max": config.n_max,
        "tolerances": vars(config.tolerances),
        "size_cap": config.size_cap,
        "suites": results,
        "passed": all(r["status"] != "fail" for r in results),
    }


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfock", description="Q-deformed Fock space verification harness")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run verification suites from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out", default=None, help="write the JSON report here (default: stdout)")
    r.add_argument("--suite", action="append", default=None, help="run only these suites (repeatable)")
    r.add_argument("--timings", action="store_true", help="record wall time per suite")

    k = sub.add_parser("kernel", help="write a named kernel as JSON")
    k.add_argument("--kind", choices=["constant", "anyon_fermion"], required=True)
    k.add_argument("--q", type=_parse_complex, required=True, metavar="RE,IM")
    k.add_argument("--d", type=int, required=True)
    k.add_argument("--out", default=None)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.suite:
            config.suites = parse_suites(args.suite)
        report = run(config, timings=args.timings)
    except (ConfigError, SizeLimitError, KernelError) as exc:
        kind = "size error" if isinstance(exc, SizeLimitError) else "config error"
        print(f"qfock: {kind}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    for r in report["suites"]:
        print(f"{r['status'].upper():8s} {r['name']:16s} max residual {r['max_residual']:.3e}", file=sys.stderr)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def _cmd_kernel(args) -> int:
    try:
        if args.kind == "constant":
            if args.q.imag != 0:
                raise KernelError("constant kernel needs a real q")
            K = constant_kernel(args.q.real, args.d)
        else:
            K = anyon_fermion_kernel(args.q, args.d)
    except KernelError as exc:
        print(f"qfock: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(json.dumps(kernel_to_dict(K), indent=2) + "\n", args.out)
    return EXIT_PASS


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_kernel(args)


if __name__ == "__main__":
    sys.exit(main())
