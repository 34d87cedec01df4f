"""Command line interface for the errorfloor toolkit."""

import dataclasses
import functools
import json
from collections import Counter
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import click
import numpy as np

from errorfloor import __version__
from errorfloor.channel import ChannelKind, ChannelModel, sigma_from_ebno_db
from errorfloor.code_design import (ConstructionConfig, ConstructionLog,
                                    check_degree_spread, parse_forbidden,
                                    peg_construct)
from errorfloor.code_model import (census_trapping_subgraphs, census_to_json,
                                   code_rate, gf2_rank, girth, load_code,
                                   save_alist)
from errorfloor.config import Config
from errorfloor.constants import (DEFAULT_FLIPS, DEFAULT_NOISE_STRENGTH,
                                  DEFAULT_TRIALS, EXIT_ALGORITHM,
                                  SEARCH_METHODS, TANNER_155_NAME)
from errorfloor.decoder_base import (BaseDecoder, IterativeDecoder,
                                     SupportOracleDecoder)
from errorfloor.errors import ErrorfloorError, ErrorfloorGroup, ErrorHandler
from errorfloor.fer import (FerPoint, InstantonSpectrum, StopRule, fer_csv,
                            fit_loglog_slope, load_spectrum, mc_fer,
                            parse_sweep, predict_fer_awgn_ebno,
                            predict_fer_bsc, prediction_csv, save_spectrum,
                            spectrum_from_instantons)
from errorfloor.instanton_search import (AmoebaConfig, InstantonSet,
                                         SearchSpec,
                                         critical_numbers_for_census,
                                         dominant_support, run_trials)
from errorfloor.iter_decode import Algorithm, IterConfig
from errorfloor.logging_config import get_logger, setup_logging, timer
from errorfloor.lp_decode import LpDecoder
from errorfloor.manifest import RunManifest
from errorfloor.workers import default_workers

DECODERS = ["lp"] + [a.value for a in Algorithm]


def _handled(fn: Callable[..., None]) -> Callable[..., None]:
    """Turn toolkit, file and config errors into messages and exit codes."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        try:
            fn(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException, click.Abort):
            raise
        except ErrorfloorError as e:
            ErrorHandler.handle_toolkit_error(e)
        except OSError as e:
            ErrorHandler.handle_file_error(e)
        except ValueError as e:
            ErrorHandler.handle_config_error(e)
        except Exception as e:
            ErrorHandler.handle_unexpected_error(e)

    return wrapper


def _config(ctx: click.Context) -> Config:
    return ctx.obj["config"]


def _manifest(
    ctx: click.Context, command: str, seed: Optional[int] = None
) -> RunManifest:
    return RunManifest(
        command=command,
        options={k: _plain(v) for k, v in ctx.params.items()},
        seed=seed,
        config=_config(ctx).as_dict(),
    )


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def _code_inputs(code: str) -> List[Path]:
    return [] if code == TANNER_155_NAME else [Path(code)]


def _make_decoder(
    g: Any,
    name: str,
    iterations: int,
    backend: str,
    degree_cap: int,
    oracle: Optional[str] = None,
) -> BaseDecoder:
    if oracle:
        support = [int(v) for v in oracle.split(",") if v.strip()]
        return SupportOracleDecoder(g, support)
    if name == "lp":
        return LpDecoder(g, backend, degree_cap)
    return IterativeDecoder(
        g, IterConfig(Algorithm(name), max_iterations=iterations)
    )


def _single_sigma(
    sigma: Optional[float], snr_db: Optional[str], rate: float
) -> Optional[float]:
    if sigma is not None:
        return sigma
    if snr_db is None:
        return None
    values = parse_sweep(snr_db)
    if len(values) != 1:
        raise click.UsageError("--snr-db takes a single value here")
    return sigma_from_ebno_db(values[0], rate)


@click.group(cls=ErrorfloorGroup)
@click.option("--debug", is_flag=True, help="Enable debug mode with verbose logging")
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    help="Configuration file (default errorfloor.yaml)",
)
@click.version_option(__version__, prog_name="errorfloor")
@click.pass_context
def main(ctx: click.Context, debug: bool, config_path: Optional[Path]) -> None:
    """Instanton search and error-floor analysis of LDPC codes."""
    try:
        config = Config(config_path)
        setup_logging(debug=debug, level=config.get_log_level())
    except ValueError as e:
        ErrorHandler.handle_config_error(e)
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


@main.command("graph-info")
@click.option("--code", default=TANNER_155_NAME, show_default=True, help="alist file or built-in code name")
@click.pass_context
@_handled
def graph_info(ctx: click.Context, code: str) -> None:
    """Print size, degrees, girth, rank and rate of a code."""
    logger = get_logger(__name__)
    with timer(logger, f"graph diagnostics of {code}"):
        g = load_code(code)
        g_girth = girth(g)
        rank = gf2_rank(g)
    girth_text = "inf" if g_girth == float("inf") else str(int(g_girth))
    click.echo(
        f"n={g.n} m={g.m} girth={girth_text} rank={rank} "
        f"rate={code_rate(g):.4f}"
    )
    var_profile = dict(sorted(Counter(int(d) for d in g.var_degrees).items()))
    click.echo(f"variable degrees: {var_profile}")
    click.echo(f"check degrees: {check_degree_spread(g)}")


@main.command()
@click.option("--code", default=TANNER_155_NAME, show_default=True)
@click.option("--a", "a", type=int, required=True, help="Set size")
@click.option("--b", "b", type=int, required=True, help="Odd induced checks")
@click.option("--all-subsets", is_flag=True, help="Include disconnected sets")
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option("--out", type=click.Path(path_type=Path), help="JSON output file")
@click.pass_context
@_handled
def census(
    ctx: click.Context,
    code: str,
    a: int,
    b: int,
    all_subsets: bool,
    workers: Optional[int],
    out: Optional[Path],
) -> None:
    """Count variable sets of size a with b odd induced checks."""
    manifest = _manifest(ctx, "census")
    manifest.add_inputs(_code_inputs(code))
    g = load_code(code)
    result = census_trapping_subgraphs(
        g, a, b, workers or default_workers(), connected=not all_subsets
    )
    text = census_to_json(result)
    if out is None:
        click.echo(text)
        return
    out.write_text(text + "\n", encoding="utf-8")
    manifest.outputs.append(str(out))
    manifest.write(out)
    click.echo(f"({a},{b}) count={result.count}")


@main.command()
@click.option("--code", default=TANNER_155_NAME, show_default=True)
@click.option("--method", type=click.Choice(SEARCH_METHODS), required=True)
@click.option("--trials", type=int, default=None, help=f"Independent starts (default {DEFAULT_TRIALS}); critical: census sample size (default all members)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--flips", type=int, default=DEFAULT_FLIPS, show_default=True, help="ISA initial flips")
@click.option("--strength", type=float, default=DEFAULT_NOISE_STRENGTH, show_default=True, help="PCS initial noise strength")
@click.option("--decoder", type=click.Choice(DECODERS[1:]), default="min-sum", show_default=True, help="Iterative decoder (amoeba, critical)")
@click.option("--iterations", type=int, default=None, help="Iteration count D")
@click.option("--sigma", type=float, default=None, help="AWGN sigma (amoeba)")
@click.option("--snr-db", type=str, default=None, help="Eb/N0 in dB instead of --sigma")
@click.option("--seed-record", type=click.Path(exists=True, path_type=Path), help="Instanton JSONL whose first record seeds the amoeba")
@click.option("--restrict", is_flag=True, help="Restrict the amoeba to the seed record's dominant support")
@click.option("--a", "a", type=int, default=5, show_default=True, help="Census set size (critical)")
@click.option("--b", "b", type=int, default=3, show_default=True, help="Census odd checks (critical)")
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True, help="JSON-lines output")
@click.pass_context
@_handled
def search(
    ctx: click.Context,
    code: str,
    method: str,
    trials: Optional[int],
    seed: int,
    flips: int,
    strength: float,
    decoder: str,
    iterations: Optional[int],
    sigma: Optional[float],
    snr_db: Optional[str],
    seed_record: Optional[Path],
    restrict: bool,
    a: int,
    b: int,
    workers: Optional[int],
    out: Path,
) -> None:
    """Run an instanton search and write the instanton set."""
    config = _config(ctx)
    defaults = config.get_decoder_defaults()
    tolerances = config.get_search_defaults()
    manifest = _manifest(ctx, "search", seed)
    manifest.add_inputs(_code_inputs(code))
    g = load_code(code)
    workers = workers or default_workers()
    iter_cfg = IterConfig(
        Algorithm(decoder),
        max_iterations=iterations or defaults["max_iterations"],
    )

    if method == "critical":
        _search_critical(
            g, iter_cfg, a, b, trials, seed, workers, tolerances, out
        )
    else:
        trials = DEFAULT_TRIALS if trials is None else trials
        seed_point = None
        amoeba = AmoebaConfig(
            tau_stop=tolerances["tau_stop"],
            tau_surf=tolerances["tau_surf"],
            delta=tolerances["delta"],
            scale_cap=tolerances["scale_cap"],
        )
        if seed_record is not None:
            manifest.add_inputs([seed_record])
            first = InstantonSet.read_jsonl(seed_record).records[0]
            if first.noise is None:
                raise click.UsageError("--seed-record needs an AWGN record")
            seed_point = first.noise
            if restrict:
                amoeba = dataclasses.replace(
                    amoeba, support=dominant_support(first.noise)
                )
        spec = SearchSpec(
            method=method,
            graph=g,
            flips=flips,
            noise_strength=strength,
            lp_backend=config.get_lp_backend(),
            degree_cap=defaults["degree_cap"],
            iter_cfg=iter_cfg if method == "amoeba" else None,
            sigma=_single_sigma(sigma, snr_db, code_rate(g)),
            amoeba=amoeba,
            seed_point=seed_point,
            retry_cap=int(tolerances["retry_cap"]),
            step_cap=int(tolerances["pcs_step_cap"]),
        )
        found = run_trials(spec, trials, seed, workers)
        found.write_jsonl(out)
        histogram = out.with_name(out.name + ".histogram.csv")
        histogram.write_text(found.histogram_csv(), encoding="utf-8")
        if len(found):
            save_spectrum(
                spectrum_from_instantons(found),
                out.with_name(out.name + ".spectrum.csv"),
            )
        click.echo(
            f"{method}: trials={trials} unique={len(found)} "
            f"min_weight={found.minimum_weight} "
            f"failed_trials={len(found.failures)}"
        )
        if not len(found):
            manifest.write(out)
            click.echo("Error: no trial produced an instanton", err=True)
            raise click.exceptions.Exit(EXIT_ALGORITHM)
    manifest.outputs.append(str(out))
    manifest.write(out)


def _search_critical(
    g: Any,
    iter_cfg: IterConfig,
    a: int,
    b: int,
    sample: Optional[int],
    seed: int,
    workers: int,
    tolerances: Dict[str, float],
    out: Path,
) -> None:
    members = census_trapping_subgraphs(g, a, b, workers)
    results = critical_numbers_for_census(
        IterativeDecoder(g, iter_cfg),
        members,
        sample=sample,
        rng=np.random.default_rng(seed),
        size_cap=int(tolerances["critical_size_cap"]),
        workers=workers,
    )
    out.write_text(
        "".join(json.dumps(r.to_dict()) + "\n" for r in results),
        encoding="utf-8",
    )
    found = Counter(
        r.critical_number for r in results if r.critical_number is not None
    )
    if found:
        save_spectrum(
            InstantonSpectrum.from_pairs(found.items()),
            out.with_name(out.name + ".spectrum.csv"),
        )
    exhausted = sum(1 for r in results if r.exhausted)
    click.echo(
        f"critical: sets={len(results)} numbers={dict(sorted(found.items()))} "
        f"exhausted={exhausted}"
    )


@main.command()
@click.option("--code", default=TANNER_155_NAME, show_default=True)
@click.option("--decoder", type=click.Choice(DECODERS), default="gallager-a", show_default=True)
@click.option("--iterations", type=int, default=None, help="Iteration count D")
@click.option("--oracle-support", type=str, default=None, help="Synthetic decoder failing on supersets of 'i,j,k'")
@click.option("--channel", type=click.Choice([k.value for k in ChannelKind]), default="bsc", show_default=True)
@click.option("--eps", type=str, default=None, help="Crossover sweep lo:hi:step")
@click.option("--snr-db", type=str, default=None, help="Eb/N0 sweep lo:hi:step")
@click.option("--min-errors", type=int, default=None)
@click.option("--max-frames", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True, help="CSV output")
@click.pass_context
@_handled
def fer(
    ctx: click.Context,
    code: str,
    decoder: str,
    iterations: Optional[int],
    oracle_support: Optional[str],
    channel: str,
    eps: Optional[str],
    snr_db: Optional[str],
    min_errors: Optional[int],
    max_frames: Optional[int],
    seed: int,
    workers: Optional[int],
    out: Path,
) -> None:
    """Monte-Carlo frame error rate over a channel sweep."""
    config = _config(ctx)
    defaults = config.get_decoder_defaults()
    manifest = _manifest(ctx, "fer", seed)
    manifest.add_inputs(_code_inputs(code))
    g = load_code(code)
    channels = _sweep_channels(channel, eps, snr_db, code_rate(g))
    dec = _make_decoder(
        g,
        decoder,
        iterations or defaults["max_iterations"],
        config.get_lp_backend(),
        defaults["degree_cap"],
        oracle_support,
    )
    stop = StopRule(
        min_errors=min_errors or defaults["min_errors"],
        max_frames=max_frames or StopRule().max_frames,
        batch_size=config.get_fer_batch_size(),
    )
    workers = workers or default_workers()
    points = []
    for param, ch in channels:
        point = mc_fer(dec, ch, stop, seed, workers)
        points.append(FerPoint(param, point.frames, point.errors))
        click.echo(
            f"{param:g}: frames={point.frames} errors={point.errors} "
            f"fer={point.fer:.4g}"
        )
    out.write_text(fer_csv(points), encoding="utf-8")
    usable = [(p.param, p.fer) for p in points if p.errors]
    if channel == "bsc" and len(usable) >= 2:
        click.echo(f"log-log slope={fit_loglog_slope(usable):.3f}")
    manifest.outputs.append(str(out))
    manifest.write(out)


def _sweep_channels(
    channel: str, eps: Optional[str], snr_db: Optional[str], rate: float
) -> List[Any]:
    if channel == "bsc":
        if eps is None or snr_db is not None:
            raise click.UsageError("the BSC sweep needs --eps only")
        return [(e, ChannelModel.bsc(e)) for e in parse_sweep(eps)]
    if snr_db is None or eps is not None:
        raise click.UsageError("the AWGN sweep needs --snr-db only")
    return [
        (s, ChannelModel.awgn_from_ebno_db(s, rate))
        for s in parse_sweep(snr_db)
    ]


@main.command()
@click.option("--spectrum", "spectrum_path", type=click.Path(exists=True, path_type=Path), required=True, help="weight,multiplicity CSV")
@click.option("--code", default=TANNER_155_NAME, show_default=True, help="Code supplying n and the rate")
@click.option("--channel", type=click.Choice([k.value for k in ChannelKind]), default="bsc", show_default=True)
@click.option("--eps", type=str, default=None, help="Crossover sweep lo:hi:step")
@click.option("--snr-db", type=str, default=None, help="Eb/N0 sweep lo:hi:step")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="CSV output")
@click.pass_context
@_handled
def predict(
    ctx: click.Context,
    spectrum_path: Path,
    code: str,
    channel: str,
    eps: Optional[str],
    snr_db: Optional[str],
    out: Path,
) -> None:
    """Leading-order FER prediction from an instanton spectrum."""
    manifest = _manifest(ctx, "predict")
    manifest.add_inputs([spectrum_path, *_code_inputs(code)])
    spectrum = load_spectrum(spectrum_path)
    g = load_code(code)
    if channel == "bsc":
        if eps is None or snr_db is not None:
            raise click.UsageError("the BSC sweep needs --eps only")
        curve = predict_fer_bsc(spectrum, g.n, parse_sweep(eps))
    else:
        if snr_db is None or eps is not None:
            raise click.UsageError("the AWGN sweep needs --snr-db only")
        curve = predict_fer_awgn_ebno(
            spectrum, code_rate(g), parse_sweep(snr_db)
        )
    out.write_text(prediction_csv(curve), encoding="utf-8")
    if channel == "bsc" and len(curve) >= 2:
        click.echo(f"log-log slope={fit_loglog_slope(curve):.3f}")
    click.echo(f"wrote {len(curve)} points to {out}")
    manifest.outputs.append(str(out))
    manifest.write(out)


@main.command()
@click.option("--n", "n", type=int, required=True, help="Block length")
@click.option("--dv", "d_v", type=int, default=3, show_default=True, help="Variable degree")
@click.option("--m", "m", type=int, required=True, help="Number of checks")
@click.option("--forbid", multiple=True, help="'cycles<G' or 'ts:A,B', repeatable")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-backtracks", type=int, default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True, help="alist output")
@click.pass_context
@_handled
def construct(
    ctx: click.Context,
    n: int,
    d_v: int,
    m: int,
    forbid: Sequence[str],
    seed: int,
    max_backtracks: Optional[int],
    out: Path,
) -> None:
    """Build a code avoiding forbidden cycles and trapping sets."""
    manifest = _manifest(ctx, "construct", seed)
    patterns = [parse_forbidden(text) for text in forbid]
    cfg = ConstructionConfig(
        n=n,
        d_v=d_v,
        m=m,
        seed=seed,
        max_backtracks=(
            max_backtracks
            if max_backtracks is not None
            else _config(ctx).get_max_backtracks()
        ),
    )
    log = ConstructionLog(seed=seed)
    g = peg_construct(cfg, patterns, np.random.default_rng(seed), log)
    out.write_text(save_alist(g), encoding="utf-8")
    log_path = out.with_name(out.name + ".log.json")
    log.write(log_path)
    g_girth = girth(g)
    girth_text = "inf" if g_girth == float("inf") else str(int(g_girth))
    click.echo(
        f"n={g.n} m={g.m} girth={girth_text} "
        f"check degrees={check_degree_spread(g)}"
    )
    manifest.outputs.extend([str(out), str(log_path)])
    manifest.write(out)


if __name__ == "__main__":
    main()
