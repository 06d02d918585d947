import contextlib
import pathlib
import shutil

import click
from scitrack import CachingLogger
from trogon import tui

from bernstein_lite import __version__
from bernstein_lite import _config as blt_config
from bernstein_lite import _params as blt_params
from bernstein_lite import _pipeline as blt_pipeline
from bernstein_lite import _util as blt_util

# pipeline status when a property suite fails
SUITE_FAILED = 2


def _error_exit(err: blt_util.BernsteinLiteError):
    click.secho(f"ERROR: {err.code}: {err}", fg="red")
    exit(1)


@contextlib.contextmanager
def _progress():
    from rich import progress

    with progress.Progress(
        progress.TextColumn("[progress.description]{task.description}"),
        progress.BarColumn(),
        progress.TaskProgressColumn(),
        progress.TimeRemainingColumn(),
        progress.TimeElapsedColumn(),
    ) as bar:
        yield bar


# defining some of the options
_cfgpath = click.option(
    "-c",
    "--configpath",
    type=pathlib.Path,
    default=None,
    help="Path to config file. If omitted, --a, --b and --s are required or "
    "the built in sample config is used.",
)
_a = click.option("--a", type=float, default=None, help="Left end of the band.")
_b = click.option("--b", type=float, default=None, help="Right end of the band.")
_s = click.option(
    "--s",
    type=float,
    default=None,
    help="Target mean dimension, 0 <= s < 2(b-a).",
)
_mode = click.option(
    "--mode",
    type=click.Choice(blt_params.MODES),
    default=None,
    help="'strict' couples the kernel sharpness to p/q, 'relaxed' does not.",
)
_kmax = click.option("--kmax", type=int, default=None, help="Depth of the tower.")
_seed = click.option("--seed", type=int, default=None, help="Run seed.")
_out = click.option(
    "-o",
    "--out",
    type=pathlib.Path,
    default=None,
    help="Output directory.",
)
_tol_band = click.option(
    "--tol-band",
    type=float,
    default=None,
    help="Least acceptable band-energy ratio.",
)
_tol_roundtrip = click.option(
    "--tol-roundtrip",
    type=float,
    default=None,
    help="Largest acceptable coefficient round trip error.",
)
_window_radius = click.option(
    "--window-radius",
    type=float,
    default=None,
    help="Half-width of the spectral window.",
)
_exp_sign = click.option(
    "--exp-sign",
    type=click.Choice(["1", "-1"]),
    default=None,
    help="Sign of the phase term exponent, +1 puts the line at +c.",
)
_verbose = click.option(
    "-v",
    "--verbose",
    is_flag=True,
)
_dbrc_out = click.option(
    "-o",
    "--outpath",
    type=pathlib.Path,
    help="Path to directory to export all rc contents.",
)
_nprocs = click.option(
    "-np",
    "--num_procs",
    type=int,
    default=1,
    help="Number of procs to use.",
    show_default=True,
)


def _run_options(func):
    for option in reversed(
        (
            _cfgpath,
            _a,
            _b,
            _s,
            _mode,
            _kmax,
            _seed,
            _out,
            _tol_band,
            _tol_roundtrip,
            _window_radius,
            _exp_sign,
            _verbose,
        ),
    ):
        func = option(func)
    return func


def _load_config(
    configpath,
    a,
    b,
    s,
    mode,
    kmax,
    seed,
    out,
    tol_band,
    tol_roundtrip,
    window_radius,
    exp_sign,
) -> blt_config.RunConfig:
    overrides = {
        "a": a,
        "b": b,
        "s": s,
        "mode": mode,
        "kmax": kmax,
        "seed": seed,
        "outdir": out,
        "tol_band": tol_band,
        "tol_roundtrip": tol_roundtrip,
        "window_radius": window_radius,
        "exp_sign": None if exp_sign is None else int(exp_sign),
    }
    if configpath is None and None in (a, b, s):
        click.secho("WARN: using the built in sample config", fg="yellow")
        configpath = blt_util.get_resource_path(blt_config.SAMPLE_CONFIG_NAME)
        overrides["outdir"] = out or pathlib.Path("blt_out")

    try:
        if configpath is None:
            construction = {"a": a, "b": b, "s": s, "mode": mode}
            construction = {k: v for k, v in construction.items() if v is not None}
            run = {
                k: v for k, v in overrides.items() if k not in ("a", "b", "s", "mode")
            }
            return blt_config.make_config(construction, run)
        return blt_config.read_config(configpath, overrides=overrides)
    except blt_util.BernsteinLiteError as err:
        _error_exit(err)


def _start_log(config: blt_config.RunConfig, command: str) -> CachingLogger:
    LOGGER = CachingLogger()
    LOGGER.log_args()
    config.outdir.mkdir(parents=True, exist_ok=True)
    LOGGER.log_file_path = config.outdir / f"{command}.log"
    for note in blt_pipeline.deviations(config):
        LOGGER.log_message(note, label="deviation")
        click.secho(f"NOTE: {note}", fg="yellow")
    return LOGGER


def _finish_log(LOGGER: CachingLogger, config: blt_config.RunConfig, stages: dict):
    for name, stage in stages.items():
        LOGGER.log_message(
            f"{name} passed={stage['passed']} {stage.get('error', '')}".strip(),
            label="stage",
        )
        for relpath in stage.get("outputs", []):
            LOGGER.output_file(config.outdir / relpath)
    LOGGER.shutdown()


def _report(name: str, stage: dict):
    if stage["passed"]:
        click.secho(f"{name}: passed", fg="green")
        return
    for violation in stage.get("violations", []):
        click.secho(f"{name}: {violation}", fg="red")
    if "error" in stage:
        click.secho(f"{name}: {stage['error']}: {stage['message']}", fg="red")
    if "skipped" in stage:
        click.secho(f"{name}: skipped, {stage['skipped']}", fg="yellow")


@tui()
@click.group()
@click.version_option(__version__)
def main():
    """Minimal subshifts of prescribed mean dimension embedded as band-limited signals."""


@main.command(no_args_is_help=True)
@_dbrc_out
def exportrc(outpath):
    """exports the sample config to the nominated path"""

    outpath = outpath.expanduser()

    shutil.copytree(blt_util.BERNSTEINLITERC, outpath)
    # we assume all files starting with alphabetical characters are valid
    for fn in pathlib.Path(outpath).glob("*"):
        if not fn.stem.isalpha():
            if fn.is_file():
                fn.unlink()
            else:
                # __pycache__ directory
                shutil.rmtree(fn)
    click.secho(f"Contents written to {outpath}", fg="green")


@main.command(no_args_is_help=True)
@click.option("--a", type=float, required=True, help="Left end of the band.")
@click.option("--b", type=float, required=True, help="Right end of the band.")
@click.option("--s", type=float, required=True, help="Target mean dimension.")
@click.option(
    "--mode",
    type=click.Choice(blt_params.MODES),
    default=blt_params.STRICT,
    show_default=True,
)
@click.option("--search-bound", type=int, default=64, show_default=True)
@click.option(
    "--eps-sharp",
    type=float,
    default=None,
    help="Kernel sharpness for relaxed mode.",
)
def plan(a, b, s, mode, search_bound, eps_sharp):
    """derive and validate the construction parameters"""
    try:
        result = blt_pipeline.plan(
            a,
            b,
            s,
            mode=mode,
            search_bound=search_bound,
            eps_sharp=eps_sharp,
        )
    except blt_util.BernsteinLiteError as err:
        _error_exit(err)

    blt_util.rich_display(blt_pipeline.params_table(result["params"]))
    blt_util.rich_display(blt_params.checks_table(result["checks"]))
    for note in result["notes"]:
        click.secho(f"NOTE: {note}", fg="yellow")
    if not result["passed"]:
        exit(1)


@main.command()
@_run_options
def construct(configpath, verbose, **kwargs):
    """build the pattern words up to kmax and write them"""
    config = _load_config(configpath, **kwargs)
    LOGGER = _start_log(config, "construct")
    try:
        tower, stage = blt_pipeline.construct(config, verbose=verbose)
    except blt_util.BernsteinLiteError as err:
        _finish_log(LOGGER, config, {"construct": blt_pipeline._failed(err)})
        _error_exit(err)

    blt_util.rich_display(tower.proportion_table())
    _report("construct", stage)
    _finish_log(LOGGER, config, {"construct": stage})
    if not stage["passed"]:
        exit(SUITE_FAILED)


def _tower_stage(command: str, runner, configpath, verbose, kwargs, **runner_kw):
    config = _load_config(configpath, **kwargs)
    LOGGER = _start_log(config, command)
    try:
        tower = blt_pipeline.make_tower(config)
        with _progress() as progress:
            result = runner(
                config,
                tower,
                verbose=verbose,
                progress=progress,
                **runner_kw,
            )
    except blt_util.BernsteinLiteError as err:
        _finish_log(LOGGER, config, {command: blt_pipeline._failed(err)})
        _error_exit(err)
    return config, LOGGER, result


@main.command()
@_run_options
def synth(configpath, verbose, **kwargs):
    """synthesise F and G images, check round trip and equivariance"""
    config, LOGGER, stage = _tower_stage(
        "synth",
        blt_pipeline.synth,
        configpath,
        verbose,
        kwargs,
    )
    _report("synth", stage)
    _finish_log(LOGGER, config, {"synth": stage})
    if not stage["passed"]:
        exit(SUITE_FAILED)


@main.command()
@_run_options
def spectrum(configpath, verbose, **kwargs):
    """band-energy report for the F, G and realified images"""
    config, LOGGER, stage = _tower_stage(
        "spectrum",
        blt_pipeline.spectrum,
        configpath,
        verbose,
        kwargs,
    )
    _report("spectrum", stage)
    _finish_log(LOGGER, config, {"spectrum": stage})
    if not stage["passed"]:
        exit(SUITE_FAILED)


@main.command()
@_run_options
@_nprocs
def certify(configpath, verbose, num_procs, **kwargs):
    """mean dimension certificates and minimality evidence for k <= kmax"""
    from bernstein_lite import _mdim as blt_mdim

    config, LOGGER, (reports, stage) = _tower_stage(
        "certify",
        blt_pipeline.certify,
        configpath,
        verbose,
        kwargs,
        max_workers=num_procs,
    )
    blt_util.rich_display(blt_mdim.certificate_table(reports))
    _report("certify", stage)
    _finish_log(LOGGER, config, {"certify": stage})
    if not stage["passed"]:
        exit(SUITE_FAILED)


@main.command()
@_run_options
@_nprocs
def pipeline(configpath, verbose, num_procs, **kwargs):
    """run every stage and write summary.json"""
    config = _load_config(configpath, **kwargs)
    LOGGER = _start_log(config, "pipeline")
    with _progress() as progress:
        summary = blt_pipeline.pipeline(
            config,
            max_workers=num_procs,
            verbose=verbose,
            progress=progress,
        )

    for name, stage in summary["stages"].items():
        _report(name, stage)
    _finish_log(LOGGER, config, summary["stages"])
    click.secho(f"Summary written to {config.outdir / blt_pipeline.SUMMARY_NAME}")
    if not summary["passed"]:
        exit(SUITE_FAILED)


if __name__ == "__main__":
    main()
