"""Command-line driver: ``shellentropy <command> [options]``.

Settings are layered: built-in defaults, then ``--preset``, then a
``key = value`` config file (``--config``), then explicit flags.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .analysis import estimate_gamma, fit_entropy_vs_lndos, volume_law_scan
from .cache import default_cache_dir, load_or_solve
from .entanglement import page_average
from .errors import DomainError, ShellEntropyError
from .hamiltonian import CouplingParams
from .report import write_csv, write_manifest
from .shell import (ByCenter, ByWindow, PeakDos, build_product_shell, eigenstate_shell_average,
                    haar_shell_average, select_shell, spectrum_entropies,
                    typical_product_state_average, window_averages)
from .spectral import default_window_count, estimate_dos, merge_spectra
from .spinbasis import MAX_SITES, ChainGeometry

COMMANDS = ("spectrum", "entropy", "shells", "fit", "volume", "page")

PRESETS = {
    "paper-n16": {"n": 16, "l1": 6, "delta2": (0.0, 0.2, 0.5), "l1_range": tuple(range(1, 9))},
}

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_NUMERICAL, EXIT_DOMAIN = 0, 1, 2, 3, 4


class UsageError(ShellEntropyError):
    exit_code = EXIT_USAGE


@dataclass(frozen=True)
class ExperimentConfig:
    n: int | None = None
    l1: int | None = None
    l1_range: tuple[int, ...] | None = None
    delta2: tuple[float, ...] = (0.5,)
    window_count: int | None = None
    edge_trim: float = 0.02
    shell: str = "peak"
    samples: int = 500
    seed: int | None = None
    out: str = "results"
    cache_dir: str | None = None
    no_cache: bool = False
    d1: int | None = None
    d2: int | None = None

    @property
    def cut(self) -> int:
        return self.l1 if self.l1 is not None else self.n // 2

    @property
    def cuts(self) -> tuple[int, ...]:
        return self.l1_range if self.l1_range is not None else tuple(range(1, self.n // 2 + 1))

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("cache_dir")
        out.pop("no_cache")
        out["l1"] = self.cut if self.n is not None else self.l1
        return out


def _parse_int_list(text: str) -> tuple[int, ...]:
    values = []
    for part in str(text).replace(" ", "").split(","):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    return tuple(values)


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in str(text).replace(" ", "").split(",") if p)


_CONVERTERS = {
    "n": int, "l1": int, "l1_range": _parse_int_list, "delta2": _parse_float_list,
    "window_count": int, "edge_trim": float, "shell": str, "samples": int, "seed": int,
    "out": str, "cache_dir": str, "d1": int, "d2": int,
    "no_cache": lambda s: str(s).strip().lower() in ("1", "true", "yes", "on"),
}


def _convert(key: str, value) -> object:
    if key not in _CONVERTERS:
        raise UsageError(f"unknown setting {key!r}")
    try:
        return _CONVERTERS[key](value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{key}: cannot parse {value!r}") from exc


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"config: cannot read {path} ({exc.strerror})") from exc
    settings = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key = key.strip().replace("-", "_")
        settings[key] = value.strip() if key == "preset" else _convert(key, value.strip())
    return settings


def _preset(name: str) -> dict:
    if name not in PRESETS:
        raise UsageError(f"preset: unknown preset {name!r} (choose from {', '.join(PRESETS)})")
    return dict(PRESETS[name])


def parse_shell_policy(text: str) -> tuple:
    """``peak``, ``central``, ``all``, ``window:K`` or ``center:E:W``."""
    parts = text.split(":")
    try:
        if parts[0] in ("peak", "central", "all") and len(parts) == 1:
            return (parts[0],)
        if parts[0] == "window" and len(parts) == 2:
            return ("window", int(parts[1]))
        if parts[0] == "center" and len(parts) == 3:
            return ("center", float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise UsageError(f"shell: cannot parse policy {text!r}")


def validate(config: ExperimentConfig, command: str) -> ExperimentConfig:
    if command == "page":
        for key in ("d1", "d2"):
            value = getattr(config, key)
            if value is None or value < 1:
                raise UsageError(f"{key}: required positive integer, got {value}")
        return config
    if config.seed is None:
        raise UsageError("seed: required (pass --seed or set 'seed' in the config file)")
    if config.n is None:
        raise UsageError("n: required (pass --n, --preset or set 'n' in the config file)")
    if not 2 <= config.n <= MAX_SITES:
        raise UsageError(f"n: must be in [2, {MAX_SITES}], got {config.n}")
    if not 1 <= config.cut < config.n:
        raise UsageError(f"l1: must satisfy 1 <= l1 < n={config.n}, got {config.cut}")
    cuts = config.cuts
    if command == "volume":
        if len(set(cuts)) < 2 or min(cuts) < 1 or max(cuts) > config.n // 2:
            raise UsageError(f"l1_range: need >= 2 distinct cuts in [1, {config.n // 2}], got {cuts}")
    if not config.delta2 or not all(math.isfinite(d) for d in config.delta2):
        raise UsageError(f"delta2: need finite values, got {config.delta2}")
    if config.window_count is not None and config.window_count < 2:
        raise UsageError(f"window_count: must be >= 2, got {config.window_count}")
    if not 0.0 <= config.edge_trim < 0.5:
        raise UsageError(f"edge_trim: must be in [0, 0.5), got {config.edge_trim}")
    if config.samples < 1:
        raise UsageError(f"samples: must be >= 1, got {config.samples}")
    policy = parse_shell_policy(config.shell)
    if command == "volume" and policy[0] == "all":
        raise UsageError("shell: the volume scan needs a single shell, not 'all'")
    return config


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("experiment")
    g.add_argument("--config", help="key = value settings file (flags override it)")
    g.add_argument("--preset", help=f"named parameter set: {', '.join(PRESETS)}")
    g.add_argument("--n", type=int, help="chain length N (required)")
    g.add_argument("--l1", type=int, help="subsystem-1 size (default N // 2)")
    g.add_argument("--l1-range", help="cuts for 'volume', e.g. 1-7 or 1,2,4 (default 1..N//2)")
    g.add_argument("--delta2", help="comma-separated NNN couplings (default 0.5)")
    g.add_argument("--window-count", type=int,
                   help="equal-count DOS windows (default max(20, states // 300))")
    g.add_argument("--edge-trim", type=float, help="fraction trimmed at each spectrum edge (default 0.02)")
    g.add_argument("--shell", help="peak | central | all | window:K | center:E:W (default peak)")
    g.add_argument("--samples", type=int, help="Monte-Carlo samples per shell (default 500)")
    g.add_argument("--seed", type=int, help="random seed (required)")
    g.add_argument("--out", help="output directory (default ./results)")
    g.add_argument("--cache-dir", help="spectrum cache (default $SHELLENTROPY_CACHE or ~/.cache/shellentropy)")
    g.add_argument("--no-cache", action="store_true", default=None, help="diagonalize in memory, bypass the cache")

    parser = argparse.ArgumentParser(prog="shellentropy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="merged spectrum and DOS windows")
    sub.add_parser("entropy", parents=[common], help="entropy of every eigenstate")
    sub.add_parser("shells", parents=[common], help="shell averages by all three methods")
    sub.add_parser("fit", parents=[common], help="entropy vs ln(DOS) fits and gamma")
    sub.add_parser("volume", parents=[common], help="entropy vs l1 at a fixed shell")
    page = sub.add_parser("page", help="Page average for (D1, D2)")
    page.add_argument("--d1", type=int, required=True)
    page.add_argument("--d2", type=int, required=True)
    return parser


def parse_config(argv=None) -> tuple[str, ExperimentConfig]:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise UsageError("invalid command line") from None
    settings = {}
    file_settings = read_config_file(args.config) if getattr(args, "config", None) else {}
    preset = getattr(args, "preset", None) or file_settings.pop("preset", None)
    if preset:
        settings.update(_preset(preset))
    settings.update(file_settings)
    for key in _CONVERTERS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = _convert(key, value) if isinstance(value, str) else value
    try:
        config = ExperimentConfig(**settings)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    return args.command, validate(config, args.command)


class _Run:
    """Per-invocation bookkeeping: current stage, timings, emitted files."""

    def __init__(self, command: str, config: ExperimentConfig):
        self.command = command
        self.config = config
        self.out = Path(config.out)
        self.stage = "setup"
        self.timings: dict[str, float] = {}
        self.files: list[Path] = []
        self.cache = None if config.no_cache else (config.cache_dir or default_cache_dir())

    @contextmanager
    def stage_of(self, name: str):
        self.stage = name
        start = time.perf_counter()
        yield
        self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start

    def meta(self, delta2: float, **extra) -> dict:
        c = self.config
        meta = {
            "command": self.command, "version": __version__, "N": c.n, "delta2": delta2,
            "window_rule": "equal-count", "window_count": c.window_count if c.window_count else "auto",
            "edge_trim": c.edge_trim, "seed": c.seed,
        }
        meta.update(extra)
        return meta

    def emit(self, relpath: str, columns, rows, meta) -> None:
        self.files.append(write_csv(self.out / relpath, columns, rows, meta))

    def solve(self, delta2: float):
        with self.stage_of(f"diagonalize[delta2={delta2!r}]"):
            decomps = load_or_solve(self.config.n, CouplingParams(delta2), self.cache)
            spectrum = merge_spectra(decomps)
        with self.stage_of(f"dos[delta2={delta2!r}]"):
            wc = self.config.window_count or default_window_count(len(spectrum))
            dos = estimate_dos(spectrum, wc, self.config.edge_trim)
        return decomps, spectrum, dos

    def shells(self, spectrum, dos) -> list:
        policy = parse_shell_policy(self.config.shell)
        kind = policy[0]
        if kind == "all":
            return [select_shell(spectrum, ByWindow(dos, i)) for i in range(len(dos))]
        if kind == "peak":
            return [select_shell(spectrum, PeakDos(dos))]
        if kind == "central":
            return [select_shell(spectrum, ByWindow(dos, dos.central))]
        if kind == "window":
            return [select_shell(spectrum, ByWindow(dos, policy[1]))]
        return [select_shell(spectrum, ByCenter(policy[1], policy[2]))]


def _subdir(delta2: float) -> str:
    return f"delta2={delta2!r}"


def _cmd_spectrum(run: _Run) -> None:
    for d2 in run.config.delta2:
        _, spectrum, dos = run.solve(d2)
        meta = run.meta(d2, window_count_used=len(dos))
        with run.stage_of("write"):
            run.emit(f"{_subdir(d2)}/spectrum.csv", ("energy", "n_up", "sector_index"),
                     zip(spectrum.energies, spectrum.n_up, spectrum.index), meta)
            run.emit(f"{_subdir(d2)}/dos.csv", ("center", "width", "count", "dos", "ln_dos"),
                     ((w.center, w.width, w.count, w.dos, w.ln_dos) for w in dos.windows), meta)


def _cmd_entropy(run: _Run) -> None:
    geometry = ChainGeometry(run.config.n, run.config.cut)
    for d2 in run.config.delta2:
        decomps, spectrum, _ = run.solve(d2)
        with run.stage_of(f"entropy[delta2={d2!r}]"):
            ent = spectrum_entropies(spectrum, decomps, geometry)
        with run.stage_of("write"):
            run.emit(f"{_subdir(d2)}/eigenstate_entropy.csv",
                     ("energy", "n_up", "sector_index", "S1_nats"),
                     zip(spectrum.energies, spectrum.n_up, spectrum.index, ent),
                     run.meta(d2, l1=geometry.l1))


def _cmd_shells(run: _Run) -> None:
    c = run.config
    geometry = ChainGeometry(c.n, c.cut)
    params_note = "d1, d2 = distinct participating subsystem levels; exp_S1_mean = exp(S1_mean)"
    for d2 in c.delta2:
        decomps, spectrum, dos = run.solve(d2)
        avg_rows, prod_rows = [], []
        with run.stage_of(f"shells[delta2={d2!r}]"):
            for shell in run.shells(spectrum, dos):
                eig = eigenstate_shell_average(shell, decomps, geometry)
                haar = haar_shell_average(shell, decomps, geometry, c.samples, c.seed)
                pshell = build_product_shell(geometry, CouplingParams(d2), shell.interval)
                prod = typical_product_state_average(pshell, c.samples, c.seed)
                for avg in (eig, haar, prod):
                    samples = avg.samples if avg.samples is not None else avg.count
                    avg_rows.append((shell.center, shell.width, shell.d_e, avg.method, samples,
                                     c.seed, avg.mean, avg.std, math.exp(avg.mean)))
                ratio = (math.log(pshell.d1 * pshell.d2) / math.log(shell.d_e)
                         if shell.d_e > 1 else float("nan"))
                prod_rows.append((shell.center, shell.width, shell.d_e, len(pshell),
                                  pshell.d1, pshell.d2, ratio))
        meta = run.meta(d2, l1=geometry.l1, shell=c.shell, samples=c.samples, note=params_note)
        with run.stage_of("write"):
            run.emit(f"{_subdir(d2)}/shell_average.csv",
                     ("center", "width", "d_E", "method", "samples", "seed", "S1_mean", "S1_std",
                      "exp_S1_mean"), avg_rows, meta)
            run.emit(f"{_subdir(d2)}/product_shell.csv",
                     ("center", "width", "d_E", "pairs", "d1", "d2", "ln_d1d2_over_ln_dE"),
                     prod_rows, meta)


def _cmd_fit(run: _Run) -> None:
    c = run.config
    geometry = ChainGeometry(c.n, c.cut)
    for d2 in c.delta2:
        decomps, spectrum, dos = run.solve(d2)
        with run.stage_of(f"fit[delta2={d2!r}]"):
            ent = spectrum_entropies(spectrum, decomps, geometry)
            averages = window_averages(dos, ent)
            fit_rows = []
            for half in ("left", "right", "both"):
                try:
                    fit = fit_entropy_vs_lndos(dos, averages, half)
                except DomainError:
                    if half == "both":
                        raise
                    continue
                fit_rows.append((half, fit.slope, fit.intercept, fit.r2, fit.n_points,
                                 geometry.l1, c.n, d2, geometry.l1 / c.n))
            gamma_rows = []
            for i, avg in enumerate(averages):
                shell = select_shell(spectrum, ByWindow(dos, i))
                g = estimate_gamma(avg, shell, geometry)
                gamma_rows.append((g.center, g.d_e, g.gamma_measured, g.gamma_predicted, g.eta_measured))
        meta = run.meta(d2, l1=geometry.l1, peak_window=dos.peak)
        with run.stage_of("write"):
            run.emit(f"{_subdir(d2)}/fit_lndos.csv",
                     ("half", "slope", "intercept", "r2", "n_points", "l1", "N", "delta2",
                      "predicted_slope"), fit_rows, meta)
            run.emit(f"{_subdir(d2)}/gamma.csv",
                     ("center", "d_E", "gamma_measured", "gamma_predicted", "eta_measured"),
                     gamma_rows, meta)


def _cmd_volume(run: _Run) -> None:
    c = run.config
    cuts = sorted(set(c.cuts))
    for d2 in c.delta2:
        decomps, spectrum, dos = run.solve(d2)
        with run.stage_of(f"volume[delta2={d2!r}]"):
            (shell,) = run.shells(spectrum, dos)
            scan = volume_law_scan(shell, decomps, c.n, cuts)
            rows = [(l1, a.mean, a.std) for l1, a in zip(scan.l1, scan.averages)]
            fit = scan.fit
        meta = run.meta(d2, shell=c.shell, shell_center=shell.center, shell_width=shell.width,
                        d_E=shell.d_e, fit_slope=fit.slope, fit_intercept=fit.intercept, fit_r2=fit.r2)
        with run.stage_of("write"):
            run.emit(f"{_subdir(d2)}/volume_law.csv", ("l1", "S1_mean", "S1_std"), rows, meta)


def _cmd_page(run: _Run) -> None:
    c = run.config
    exact = page_average(c.d1, c.d2, "exact")
    asym = page_average(c.d1, c.d2, "asymptotic")
    print(f"exact {exact:.6f}")
    print(f"asymptotic {asym:.6f}")


_HANDLERS = {"spectrum": _cmd_spectrum, "entropy": _cmd_entropy, "shells": _cmd_shells,
             "fit": _cmd_fit, "volume": _cmd_volume, "page": _cmd_page}


def run(command: str, config: ExperimentConfig) -> int:
    """Execute one command; returns the process exit status."""
    job = _Run(command, config)
    try:
        _HANDLERS[command](job)
        if command != "page":
            write_manifest(job.out, {"command": command, **config.echo()}, __version__,
                           job.files, job.timings)
    except ShellEntropyError as exc:
        print(f"error [{job.stage}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print(f"error [{job.stage}]: out of memory", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error [{job.stage}]: {exc}", file=sys.stderr)
        return EXIT_DOMAIN if isinstance(exc, ValueError) else EXIT_USAGE
    return EXIT_OK


def main(argv=None) -> int:
    try:
        command, config = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(command, config)


if __name__ == "__main__":
    sys.exit(main())
