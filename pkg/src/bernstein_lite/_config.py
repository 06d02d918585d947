from __future__ import annotations

import configparser
import dataclasses
import pathlib
import typing

from bernstein_lite import _params as blt_params
from bernstein_lite import _symbolic as blt_symbolic
from bernstein_lite import _util as blt_util

SAMPLE_CONFIG_NAME = "sample.cfg"

_CONSTRUCTION = "construction"
_RUN = "run"
_LITERAL_KEYS = ("p", "q", "eps0", "c")
_CONSTRUCTION_KEYS = ("a", "b", "s", "mode", "eps_sharp", "n1_hint", "search_bound")
_CONSTRUCTION_KEYS += _LITERAL_KEYS


class ConfigError(blt_util.BernsteinLiteError):
    module = "config"


@dataclasses.dataclass(slots=True)
class RunConfig:
    """everything a pipeline run depends on

    Notes
    -----
    window_radius is the half-width of the spectral window, coeff_radius the
    number of lattice nodes either side of 0 in a synthesised signal.
    tol_band is the least acceptable band-energy ratio.
    """

    params: blt_params.ConstructionParams
    kmax: int = 2
    seed: int = 0
    outdir: pathlib.Path = pathlib.Path("blt_out")
    n1_hint: int = 3
    search_bound: int = 64
    window_radius: float = 100.0
    sample_step: float = 0.1
    coeff_radius: int = 200
    tol_band: float = 0.99
    tol_roundtrip: float = 1e-3
    tol_symbol: float = 1e-9
    exp_sign: int = 1
    trials: int = 1000
    symbol_cap: int = blt_symbolic.DEFAULT_CAP
    derived: bool = False

    def __post_init__(self):
        self.outdir = pathlib.Path(self.outdir)
        if failed := self.validate():
            raise ConfigError("invalid config: " + "; ".join(failed))

    def validate(self) -> list[str]:
        """names of every failing check"""
        failed = [
            f"params: {c.name} (residual {c.residual})"
            for c in blt_params.failed_checks(blt_params.validate_params(self.params))
        ]
        if self.kmax < 1:
            failed.append(f"kmax={self.kmax} < 1")
        for name in ("window_radius", "sample_step", "tol_band", "tol_roundtrip"):
            if getattr(self, name) <= 0:
                failed.append(f"{name} must be > 0")
        if self.tol_symbol <= 0:
            failed.append("tol_symbol must be > 0")
        if self.tol_band > 1:
            failed.append(f"tol_band={self.tol_band} > 1")
        if self.exp_sign not in (1, -1):
            failed.append(f"exp_sign={self.exp_sign} not in {{1, -1}}")
        if self.coeff_radius < 1 or self.trials < 1 or self.n1_hint < 1:
            failed.append("coeff_radius, trials and n1_hint must be >= 1")
        return failed

    def to_dict(self) -> dict[str, dict[str, str]]:
        construction = self.params.to_dict()
        construction["n1_hint"] = str(self.n1_hint)
        construction["search_bound"] = str(self.search_bound)
        run = {
            "kmax": str(self.kmax),
            "seed": str(self.seed),
            "outdir": str(self.outdir),
            "window_radius": repr(self.window_radius),
            "sample_step": repr(self.sample_step),
            "coeff_radius": str(self.coeff_radius),
            "tol_band": repr(self.tol_band),
            "tol_roundtrip": repr(self.tol_roundtrip),
            "tol_symbol": repr(self.tol_symbol),
            "exp_sign": str(self.exp_sign),
            "trials": str(self.trials),
            "symbol_cap": str(self.symbol_cap),
        }
        return {_CONSTRUCTION: construction, _RUN: run}

    def write(self, path: blt_util.PathType) -> pathlib.Path:
        """writes the config as an ini, construction parameters literal"""
        parser = configparser.ConfigParser()
        for section, settings in self.to_dict().items():
            parser.add_section(section)
            for option, val in settings.items():
                parser.set(section, option=option, value=val)
        path = pathlib.Path(path)
        with blt_util.atomic_write(path, mode="w", encoding="utf8") as out:
            parser.write(out, space_around_delimiters=True)
        return path


_RUN_TYPES: dict[str, typing.Callable] = {
    "kmax": int,
    "seed": int,
    "outdir": pathlib.Path,
    "window_radius": float,
    "sample_step": float,
    "coeff_radius": int,
    "tol_band": float,
    "tol_roundtrip": float,
    "tol_symbol": float,
    "exp_sign": int,
    "trials": int,
    "symbol_cap": int,
}


def _make_params(construction: dict[str, typing.Any]) -> tuple[blt_params.ConstructionParams, bool]:
    """literal parameters when p, q, eps0 and c are all given, else derived"""
    missing = [k for k in ("a", "b", "s") if construction.get(k) in (None, "")]
    if missing:
        raise ConfigError(f"construction section lacks {missing}")

    mode = str(construction.get("mode") or blt_params.STRICT)
    eps_sharp = construction.get("eps_sharp")
    eps_sharp = None if eps_sharp in (None, "") else float(eps_sharp)
    if all(construction.get(k) not in (None, "") for k in _LITERAL_KEYS):
        data = dict(construction, mode=mode, eps_sharp=eps_sharp)
        try:
            return blt_params.ConstructionParams.from_dict(data), False
        except ValueError as err:
            raise ConfigError(str(err)) from err

    params = blt_params.derive_params(
        float(construction["a"]),
        float(construction["b"]),
        float(construction["s"]),
        mode=mode,
        search_bound=int(construction.get("search_bound") or 64),
        eps_sharp=eps_sharp,
    )
    return params, True


def make_config(
    construction: dict[str, typing.Any],
    run: dict[str, typing.Any] | None = None,
) -> RunConfig:
    """builds a RunConfig from section dicts, values may be strings

    Raises
    ------
    ConfigError, Infeasible
    """
    run = {k: v for k, v in (run or {}).items() if v is not None}
    unknown = set(run) - set(_RUN_TYPES)
    if unknown:
        raise ConfigError(f"unknown run keys {sorted(unknown)}")
    unknown = set(construction) - set(_CONSTRUCTION_KEYS)
    if unknown:
        raise ConfigError(f"unknown construction keys {sorted(unknown)}")

    try:
        kwargs = {k: _RUN_TYPES[k](v) for k, v in run.items()}
    except ValueError as err:
        raise ConfigError(str(err)) from err

    params, derived = _make_params(construction)
    for key in ("n1_hint", "search_bound"):
        if construction.get(key) not in (None, ""):
            kwargs[key] = int(construction[key])
    return RunConfig(params=params, derived=derived, **kwargs)


def read_config(
    config_path: blt_util.PathType,
    overrides: dict[str, typing.Any] | None = None,
) -> RunConfig:
    """reads the ini at config_path

    Parameters
    ----------
    config_path
        path to an ini with [construction] and [run] sections
    overrides
        key value pairs from the command line, None values are ignored.
        Overriding any of a, b, s or mode discards literal p, q, eps0, c.
    """
    config_path = pathlib.Path(config_path).expanduser()
    if not config_path.exists():
        raise ConfigError(f"File not found {config_path.resolve()!s}")

    parser = configparser.ConfigParser()
    with config_path.open() as infile:
        parser.read_file(infile)

    if not parser.has_section(_CONSTRUCTION):
        raise ConfigError(f"{config_path} has no [{_CONSTRUCTION}] section")

    construction = dict(parser.items(_CONSTRUCTION))
    run = dict(parser.items(_RUN)) if parser.has_section(_RUN) else {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if any(k in overrides for k in ("a", "b", "s", "mode")):
        for key in _LITERAL_KEYS:
            construction.pop(key, None)
    for key, value in overrides.items():
        section = construction if key in _CONSTRUCTION_KEYS else run
        section[key] = value

    outdir = run.get("outdir")
    if outdir is not None and "outdir" not in overrides:
        outdir = pathlib.Path(outdir).expanduser()
        run["outdir"] = outdir if outdir.is_absolute() else config_path.parent / outdir
    return make_config(construction, run)
