from __future__ import annotations

import dataclasses
import datetime
import functools
import pathlib
import typing

import click
import numpy
from rich.progress import Progress

from bernstein_lite import _config as blt_config
from bernstein_lite import _kernel as blt_kernel
from bernstein_lite import _mdim as blt_mdim
from bernstein_lite import _params as blt_params
from bernstein_lite import _spectral as blt_spectral
from bernstein_lite import _symbolic as blt_symbolic
from bernstein_lite import _synthesis as blt_synthesis
from bernstein_lite import _util as blt_util

SUMMARY_NAME = "summary.json"
PATTERNS_DIR = "patterns"
SIGNALS_DIR = "signals"
SPECTRA_DIR = "spectra"
CERTIFICATES_DIR = "certificates"

# epsilon and window multiples used by the upper certificates
UPPER_EPSILONS = (0.5, 0.1)
UPPER_MULTIPLES = (1, 2)
# sampling family used for the integer-sampling check
SAMPLING_HALF_BAND = 0.4
SAMPLING_STEP = 1.0
SAMPLING_TRIALS = 100
# extent of the exported sample grids and of the equivariance draws
DUMP_EXTENT = 50.0
DUMP_STEP = 0.25
EQUIVARIANCE_POINTS = 1000
METRIC_NMAX = 20
METRIC_GRID = 0.002
LATTICE_POINTS = 2000
LINE_POWER = 0.25
LINE_TOL = 0.02
SYMMETRY_TOL = 1e-6
PARSEVAL_TOL = 1e-9


def _write_table(outdir: pathlib.Path, relpath: str, data: dict, title: str) -> str:
    from cogent3 import make_table

    path = outdir / relpath
    path.parent.mkdir(parents=True, exist_ok=True)
    make_table(data=data, title=title).write(str(path))
    return relpath


def _write_json(outdir: pathlib.Path, relpath: str, data: dict) -> str:
    blt_util.write_json(outdir / relpath, data)
    return relpath


def plan(
    a: float,
    b: float,
    s: float,
    mode: str = blt_params.STRICT,
    search_bound: int = 64,
    eps_sharp: float | None = None,
) -> dict:
    """derives and validates the construction parameters

    Raises
    ------
    Infeasible
    """
    params = blt_params.derive_params(
        a,
        b,
        s,
        mode=mode,
        search_bound=search_bound,
        eps_sharp=eps_sharp,
    )
    checks = blt_params.validate_params(params)
    return {
        "params": params,
        "checks": checks,
        "notes": blt_params.deviation_notes(params),
        "passed": not blt_params.failed_checks(checks),
    }


def params_table(params: blt_params.ConstructionParams, title: str = "Construction parameters"):
    from cogent3 import make_table

    data = params.to_dict()
    data["r"] = str(params.r)
    data["q/p"] = str(params.ratio)
    names = list(data)
    return make_table(
        data={"parameter": names, "value": [data[n] for n in names]},
        title=title,
    )


def deviations(config: blt_config.RunConfig) -> list[str]:
    """departures from a literal reading of the construction"""
    notes = blt_params.deviation_notes(config.params)
    if config.derived:
        notes.insert(0, "p, q, eps0, c derived by search, not given")
    return notes


def make_tower(config: blt_config.RunConfig) -> blt_symbolic.PatternTower:
    return blt_symbolic.build_tower(
        config.params,
        config.kmax,
        n1_hint=config.n1_hint,
        cap=config.symbol_cap,
    )


def construct(
    config: blt_config.RunConfig,
    verbose: bool = False,
    progress: typing.Optional[Progress] = None,
) -> tuple[blt_symbolic.PatternTower, dict]:
    """builds the tower, writes each level word, audits the nesting"""
    outdir = config.outdir
    tower = make_tower(config)
    r = config.params.r
    levels = []
    outputs = []
    msg = "Writing patterns"
    if progress is not None:
        writing = progress.add_task(total=tower.depth, description=msg)

    for word in tower.words:
        outputs.append(
            _write_json(outdir, f"{PATTERNS_DIR}/level-{word.level}.json", word.to_dict())
        )
        levels.append(
            {
                "k": word.level,
                "N_k": word.length,
                "n_k": word.multiplier,
                "stars": word.num_stars,
                "proportion": word.proportion,
                "trimmed": word.trimmed,
                "holds": blt_symbolic.proportion_holds(word, r),
            }
        )
        if progress is not None:
            progress.update(writing, description=msg, advance=1)

    top = tower.level(tower.depth)
    nesting = {}
    for fill_mode in ("zero", "random"):
        segment = blt_symbolic.generate_segment(
            tower,
            tower.depth,
            3 * top.length,
            seed=blt_util.stage_rng(config.seed, "construct"),
            fill_mode=fill_mode,
            cap=config.symbol_cap,
        )
        nesting[fill_mode] = [
            blt_symbolic.window_admissible(segment, word, config.tol_symbol)
            for word in tower.words
        ]

    violations = [f"proportion fails at level {lv['k']}" for lv in levels if not lv["holds"]]
    for fill_mode, alignments in nesting.items():
        for k, m in enumerate(alignments, start=1):
            if m != 0:
                violations.append(f"{fill_mode} segment not aligned at 0 for level {k}")

    if verbose:
        click.secho(f"constructed {tower.depth} levels, N = {top.length}", fg="green")

    return tower, {
        "levels": levels,
        "nesting": nesting,
        "violations": violations,
        "passed": not violations,
        "outputs": outputs,
    }


@dataclasses.dataclass(slots=True)
class ReferenceImages:
    """the reference point and its images under F and G"""

    kernel: blt_kernel.InterpolationKernel
    norm_C: float
    point: blt_symbolic.SkewPoint
    f_image: blt_synthesis.BandSignal
    g_image: blt_synthesis.BandSignal


def reference_images(
    config: blt_config.RunConfig,
    tower: blt_symbolic.PatternTower,
) -> ReferenceImages:
    """a random point of Y_kmax x Z_p and its F and G images"""
    params = config.params
    radius = config.coeff_radius
    rng = blt_util.stage_rng(config.seed, "synth")
    n = tower.level(tower.depth).length
    segment = blt_symbolic.generate_segment(
        tower,
        tower.depth,
        max(2 * radius + 3, n),
        seed=rng,
        start=-(radius + 1),
        cap=config.symbol_cap,
    )
    point = blt_symbolic.SkewPoint(segment, int(rng.integers(params.p)), params.p)
    kernel = blt_kernel.make_kernel(params)
    norm_C = blt_kernel.normalization_C(kernel)
    f_image = blt_synthesis.synth_F(point, kernel, norm_C, radius=radius)
    g_image = blt_synthesis.apply_G(f_image, point.i, params.c, sign=config.exp_sign)
    return ReferenceImages(kernel, norm_C, point, f_image, g_image)


def _signal_dump(signal, xs: numpy.ndarray) -> dict:
    values = numpy.asarray(signal(xs))
    return {
        "x": xs,
        "re": numpy.real(values),
        "im": numpy.imag(values),
        "err_bound": signal.truncation_bound(xs),
    }


def equivariance_distance(
    g1: blt_synthesis.BandSignal,
    g2: blt_synthesis.BandSignal,
    nmax: int = METRIC_NMAX,
) -> tuple[float, float]:
    """D(g1, g2) and the most it can be when g1, g2 truncate the same signal

    Notes
    -----
    The allowance is the metric's own error bound plus the largest summed
    truncation bound on [-nmax, nmax], the weights 2^-n sum to below 1.
    """
    value, err = blt_synthesis.metric_D(g1, g2, nmax=nmax, grid_step=METRIC_GRID)
    xs = numpy.linspace(-nmax, nmax, 8 * nmax + 1)
    slack = float((g1.truncation_bound(xs) + g2.truncation_bound(xs)).max())
    return value, err + slack


def synth(
    config: blt_config.RunConfig,
    tower: blt_symbolic.PatternTower,
    verbose: bool = False,
    progress: typing.Optional[Progress] = None,
) -> dict:
    """unit ball, round trip, equivariance and injectivity checks on F and G"""
    outdir = config.outdir
    params = config.params
    images = reference_images(config, tower)
    g = images.f_image
    point = images.point
    radius = config.coeff_radius
    rng = blt_util.stage_rng(config.seed, "synth-x")
    violations = []
    msg = "Synthesis checks"
    if progress is not None:
        checking = progress.add_task(total=6, description=msg)

    def advance():
        if progress is not None:
            progress.update(checking, description=msg, advance=1)

    extent = radius * params.p
    xs = rng.uniform(-extent, extent, size=10 * config.trials)
    sup_f = float(numpy.abs(g(xs)).max())
    sup_g = float(numpy.abs(images.g_image(xs)).max())
    if sup_f > 1 + 1e-9 or sup_g > 1 + 1e-9:
        violations.append(f"unit ball exceeded, sup |F| = {sup_f}, sup |G| = {sup_g}")
    lattice_sum = blt_kernel.lattice_abs_sum(images.kernel, xs[:LATTICE_POINTS])
    if (lattice_sum > images.norm_C * (1 + 1e-9)).any():
        violations.append(f"lattice sum {float(lattice_sum.max())} exceeds C = {images.norm_C}")
    advance()

    expected = point.segment.at(-radius, radius)
    expected = expected[..., 0] + 1j * expected[..., 1]
    recovered = blt_synthesis.recover_coeffs(g)
    errors = numpy.abs(recovered - expected)
    lo, hi = g.flat_range
    nodes = g.spacing * numpy.arange(lo, hi + 1) - g.shift
    bounds = (images.norm_C * g.truncation_bound(nodes)).reshape(errors.shape)
    roundtrip = float(errors.max())
    if roundtrip >= config.tol_roundtrip or (errors > bounds + 1e-12).any():
        violations.append(f"round trip error {roundtrip} exceeds bound")
    advance()

    xs = rng.uniform(-DUMP_EXTENT, DUMP_EXTENT, size=EQUIVARIANCE_POINTS)
    moved = blt_symbolic.skew_S(point, require=(-radius, radius))
    f_moved = blt_synthesis.synth_F(moved, images.kernel, images.norm_C, radius=radius)
    t_image = blt_synthesis.skew_T(g)
    slack = f_moved.truncation_bound(xs) + t_image.truncation_bound(xs) + 1e-12
    diff_fs = numpy.abs(f_moved(xs) - t_image(xs))
    if f_moved.phase_i != t_image.phase_i or (diff_fs > slack).any():
        violations.append(f"F S != T F, max difference {float(diff_fs.max())}")
    c, sign = params.c, config.exp_sign
    g_t = blt_synthesis.apply_G(t_image, t_image.phase_i, c, sign=sign)
    sigma_g = images.g_image.shifted(1)
    diff_gt = numpy.abs(g_t(xs) - sigma_g(xs))
    if (diff_gt > slack).any():
        violations.append(f"G T != sigma G, max difference {float(diff_gt.max())}")
    metric, metric_err = equivariance_distance(f_moved, t_image)
    if metric > metric_err:
        violations.append(f"D(F S, T F) = {metric} exceeds {metric_err}")
    advance()

    # equal i, one coefficient changed at n = 0
    symbol = point.segment.at(0, 0)
    other_symbol = numpy.where(symbol < 0.5, 1.0, 0.0)
    delta = float(blt_symbolic.symbol_distance(symbol, other_symbol).max())
    other = blt_symbolic.SkewPoint(point.segment.with_entries(0, other_symbol), point.i, params.p)
    g_other = blt_synthesis.synth_F(other, images.kernel, images.norm_C, radius=radius)
    node_x = g.spacing * numpy.arange(params.q) - g.shift
    separation = float(numpy.abs(g(node_x) - g_other(node_x)).max())
    if separation < delta / images.norm_C - 1e-12:
        violations.append(f"F images separated by {separation} < {delta / images.norm_C}")
    # distinct i, the phase term identifies i
    phases = []
    for i in range(params.p):
        shifted = blt_synthesis.synth_F(
            dataclasses.replace(point, i=i),
            images.kernel,
            images.norm_C,
            radius=radius,
        )
        image = blt_synthesis.apply_G(shifted, i, c, sign=sign)
        phases.append(blt_synthesis.demodulate_phase(image, c, params.p, sign=sign))
    if phases != list(range(params.p)):
        violations.append(f"demodulated phases {phases} != {list(range(params.p))}")
    advance()

    real = blt_synthesis.realify(g)
    real_other = blt_synthesis.realify(g_other)
    if numpy.iscomplexobj(real(xs)):
        violations.append("realified signal is not real")
    real_sep = float(numpy.abs(real(node_x) - real_other(node_x)).max())
    if real_sep == 0:
        violations.append("realify identifies distinct F images")
    n_range = (-int(DUMP_EXTENT), int(DUMP_EXTENT) + 1)
    rescaled, raw = blt_synthesis.integer_sampling(real, n_range)
    if rescaled.min() < 0 or rescaled.max() > 1:
        violations.append("integer samples leave [0, 1]")
    advance()

    grid = numpy.arange(-DUMP_EXTENT, DUMP_EXTENT + DUMP_STEP / 2, DUMP_STEP)
    outputs = [
        _write_table(outdir, f"{SIGNALS_DIR}/f_image.csv", _signal_dump(g, grid), "F image"),
        _write_table(
            outdir,
            f"{SIGNALS_DIR}/g_image.csv",
            _signal_dump(images.g_image, grid),
            "G image",
        ),
        _write_table(
            outdir,
            f"{SIGNALS_DIR}/real_image.csv",
            _signal_dump(real, grid),
            "realified F image",
        ),
        _write_table(
            outdir,
            f"{SIGNALS_DIR}/integer_samples.csv",
            {"n": numpy.arange(*n_range), "raw": raw, "rescaled": rescaled},
            "integer samples",
        ),
    ]
    records = g.coefficient_records()
    coefficients = {
        "kernel": images.kernel.to_dict(),
        "norm_C": images.norm_C,
        "phase_i": point.i,
        "n_min": g.n_min,
        "coefficients": [list(row) for row in records],
    }
    outputs.append(_write_json(outdir, f"{SIGNALS_DIR}/coefficients.json", coefficients))
    advance()

    continuity = blt_synthesis.continuity_radius(
        images.kernel,
        images.norm_C,
        config.tol_roundtrip,
        DUMP_EXTENT,
    )
    if verbose:
        click.secho(f"C1 = {images.kernel.C1}, C = {images.norm_C}", fg="green")

    return {
        "C1": images.kernel.C1,
        "C": images.norm_C,
        "phase_i": point.i,
        "sup_F": sup_f,
        "sup_G": sup_g,
        "roundtrip_error": roundtrip,
        "equivariance_F": float(diff_fs.max()),
        "equivariance_G": float(diff_gt.max()),
        "equivariance_D": metric,
        "equivariance_D_error": metric_err,
        "separation_equal_i": separation,
        "demodulated_phases": phases,
        "realified_separation": real_sep,
        "continuity_radius": continuity,
        "violations": violations,
        "passed": not violations,
        "outputs": outputs,
    }


def spectrum(
    config: blt_config.RunConfig,
    tower: blt_symbolic.PatternTower,
    verbose: bool = False,
    progress: typing.Optional[Progress] = None,
) -> dict:
    """band-energy checks on the F image, the G image and the realified image

    Raises
    ------
    NyquistViolation
    """
    outdir = config.outdir
    params = config.params
    images = reference_images(config, tower)
    real = blt_synthesis.realify(images.f_image)
    line = config.exp_sign * params.c
    bands = {
        "f_image": (params.t1, params.b),
        "g_image": (min(params.a, line), params.b),
        "real_image": real.band(),
    }
    signals = {"f_image": images.f_image, "g_image": images.g_image, "real_image": real}
    violations = []
    report = {}
    outputs = []
    msg = "Spectra"
    if progress is not None:
        estimating = progress.add_task(total=len(signals) + 1, description=msg)

    for name, signal in signals.items():
        est = blt_spectral.spectrum_estimate(
            signal,
            window_radius=config.window_radius,
            sample_step=config.sample_step,
        )
        ratio = blt_spectral.band_energy_ratio(est, bands[name])
        parseval = est.parseval_error()
        entry = {"band": bands[name], "ratio": ratio, "parseval_error": parseval}
        if ratio < config.tol_band:
            violations.append(f"{name} band ratio {ratio} < {config.tol_band}")
        if parseval >= PARSEVAL_TOL:
            violations.append(f"{name} Parseval error {parseval}")
        if name == "g_image":
            entry["line"] = line
            entry["line_power"] = blt_spectral.line_power_ratio(est, line)
            if abs(entry["line_power"] - LINE_POWER) > LINE_TOL:
                violations.append(f"line power {entry['line_power']} not near {LINE_POWER}")
        if name == "real_image":
            entry["symmetry_error"] = blt_spectral.symmetry_error(est)
            if entry["symmetry_error"] > SYMMETRY_TOL:
                violations.append(f"realified spectrum asymmetric {entry['symmetry_error']}")
        report[name] = entry
        outputs.append(
            _write_table(
                outdir,
                f"{SPECTRA_DIR}/{name}.csv",
                {"freq": est.freqs, "power": est.power},
                name,
            )
        )
        if progress is not None:
            progress.update(estimating, description=msg, advance=1)

    sampling = blt_spectral.sampling_injectivity_check(
        SAMPLING_HALF_BAND,
        SAMPLING_STEP,
        trials=min(config.trials, SAMPLING_TRIALS),
        seed=config.seed,
    )
    report["sampling"] = sampling.to_dict()
    if not sampling.passed:
        violations.append(f"{sampling.violations} sample-indistinguishable pairs")
    if progress is not None:
        progress.update(estimating, description=msg, advance=1)

    if verbose:
        for name, entry in report.items():
            click.secho(f"{name}: {entry}", fg="green")

    report.update({"violations": violations, "passed": not violations, "outputs": outputs})
    return report


def certify_level(
    k: int,
    tower: blt_symbolic.PatternTower,
    trials: int,
    seed: int,
    tol: float,
) -> blt_mdim.CertificateReport:
    """lower, upper and minimality evidence for level k"""
    n = tower.level(k).length
    lower = blt_mdim.lower_certificate(tower, k, trials, seed)
    uppers = [
        blt_mdim.upper_certificate(tower, k, mult * n, eps, trials=trials, seed=seed)
        for eps in UPPER_EPSILONS
        for mult in UPPER_MULTIPLES
    ]
    segment = blt_symbolic.generate_segment(
        tower,
        k,
        10 * n,
        seed=blt_util.stage_rng(seed, f"minimality-k{k}"),
    )
    minimality = blt_symbolic.minimality_evidence(tower, k, segment, tol=tol)
    return blt_mdim.mdim_report(tower, k, lower=lower, uppers=uppers, minimality=minimality)


def certify(
    config: blt_config.RunConfig,
    tower: blt_symbolic.PatternTower,
    max_workers: int | None = 1,
    verbose: bool = False,
    progress: typing.Optional[Progress] = None,
) -> tuple[list[blt_mdim.CertificateReport], dict]:
    """certificates for every level, computed in parallel across levels"""
    outdir = config.outdir
    levels = list(range(1, tower.depth + 1))
    if max_workers:
        max_workers = min(len(levels), max_workers)

    msg = "Certifying levels"
    if progress is not None:
        certifying = progress.add_task(total=len(levels), description=msg)

    func = functools.partial(
        certify_level,
        tower=tower,
        trials=config.trials,
        seed=config.seed,
        tol=config.tol_symbol,
    )
    reports = []
    for report in blt_util.get_iterable_tasks(
        func=func,
        series=levels,
        max_workers=max_workers,
    ):
        reports.append(report)
        if verbose:
            click.secho(f"level {report.k} passed={report.passed}", fg="green")
        if progress is not None:
            progress.update(certifying, description=msg, advance=1)

    reports.sort(key=lambda r: r.k)
    trend = blt_mdim.gap_trend(reports, config.params)
    violations = [f"level {r.k}: {v}" for r in reports for v in r.violations] + trend
    outputs = [
        _write_json(
            outdir,
            f"{CERTIFICATES_DIR}/certificates.json",
            {"levels": [r.to_dict() for r in reports], "gap_trend": trend},
        ),
    ]
    table = blt_mdim.certificate_table(reports)
    path = outdir / CERTIFICATES_DIR / "certificates.tsv"
    table.write(str(path))
    outputs.append(f"{CERTIFICATES_DIR}/certificates.tsv")
    return reports, {
        "levels": [
            {
                "k": r.k,
                "N_k": r.N_k,
                "stars": r.stars,
                "lower": r.lower_k,
                "upper": r.upper_k,
                "gap": r.gap,
                "passed": r.passed,
            }
            for r in reports
        ],
        "gap_trend": trend,
        "violations": violations,
        "passed": not violations,
        "outputs": outputs,
    }


def _failed(err: blt_util.BernsteinLiteError) -> dict:
    return {"passed": False, "error": err.code, "message": str(err), "outputs": []}


def _skipped(reason: str) -> dict:
    return {"passed": False, "skipped": reason, "outputs": []}


def pipeline(
    config: blt_config.RunConfig,
    max_workers: int | None = 1,
    verbose: bool = False,
    progress: typing.Optional[Progress] = None,
) -> dict:
    """runs every stage, a failing stage does not stop the independent ones

    Notes
    -----
    The summary is written to outdir/summary.json. Apart from timestamp it
    depends only on the config (outdir excluded).
    """
    stages = {}
    tower = None
    try:
        tower, stages["construct"] = construct(config, verbose=verbose, progress=progress)
    except blt_util.BernsteinLiteError as err:
        stages["construct"] = _failed(err)

    runners = {
        "synth": functools.partial(synth, verbose=verbose, progress=progress),
        "spectrum": functools.partial(spectrum, verbose=verbose, progress=progress),
        "certify": functools.partial(
            certify,
            max_workers=max_workers,
            verbose=verbose,
            progress=progress,
        ),
    }
    for name, runner in runners.items():
        if tower is None:
            stages[name] = _skipped("construct failed")
            continue
        try:
            result = runner(config, tower)
        except blt_util.BernsteinLiteError as err:
            result = _failed(err)
        stages[name] = result[1] if isinstance(result, tuple) else result

    settings = config.to_dict()
    settings["run"].pop("outdir")
    summary = {
        "config": settings,
        "deviations": deviations(config),
        "stages": stages,
        "passed": all(stage["passed"] for stage in stages.values()),
        "timestamp": datetime.datetime.now().isoformat(timespec="seconds"),
    }
    blt_util.write_json(config.outdir / SUMMARY_NAME, summary)
    return summary


def without_timestamp(summary: dict) -> dict:
    return {k: v for k, v in summary.items() if k != "timestamp"}
