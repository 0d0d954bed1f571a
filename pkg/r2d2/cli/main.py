"""
r2d2 command-line interface.

Data (CSV, verdict lines, encode summaries) goes to stdout; diagnostics and
logs go to stderr. Exit codes: 0 success, 1 usage error, 2 input or parse
error, 3 numeric error.
"""

import csv
import io
import math
import time
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table
from rich.theme import Theme

from r2d2.config import Settings
from r2d2.corpus import default_families, generate_corpus, load_family_specs, load_split, read_manifest, resolve
from r2d2.distance import align_sizes, family_similarity, levenshtein, mse, similarity_from_mse
from r2d2.evaluation import parse_sweep, score_dataset, sweep_csv, threshold_sweep, write_gnuplot, write_sweep_csv
from r2d2.exceptions import (
    EXIT_INPUT,
    EXIT_OK,
    EXIT_USAGE,
    InputError,
    exit_code_for,
)
from r2d2.jobs import BatchEncodeJob
from r2d2.models import ScanFailure, Split
from r2d2.nn import Network, NetworkConfig, TrainConfig, load_checkpoint, save_checkpoint, train, write_training_log
from r2d2.observability import configure_logging, dump_metrics, logger
from r2d2.pixel import WidthPolicy, encode_bytes, resize_nearest, write_png
from r2d2.scan import KnownSampleCache, Scanner, encode_path, network_image


theme = Theme({
    "info": "dim cyan",
    "warning": "yellow",
    "error": "bold red",
    "success": "bold green",
})
console = Console(stderr=True, theme=theme)

app = typer.Typer(
    name="r2d2",
    help="Android malware detection on colour images of classes.dex.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)

METRICS = ("mse", "rms", "lev", "sim")
SCAN_CSV_COLUMNS = ["path", "sha256", "probability", "threshold", "verdict", "encode_ms", "infer_ms", "source", "error"]

_state: Dict[str, Optional[str]] = {"metrics_file": None}


def _exception_base(cls: type, name: str) -> type:
    for base in cls.__mro__:
        if base.__name__ == name:
            return base
    return cls


# Usage errors come from whichever click typer is built on
UsageFailure = _exception_base(typer.BadParameter, "ClickException")


# ============================================================================
# HELPERS
# ============================================================================

def _settings(ctx: typer.Context, **overrides) -> Settings:
    """Settings for one invocation: flags > R2D2_* env > .env > defaults."""
    values = dict(ctx.obj or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        settings = Settings(**values)
    except ValidationError as e:
        raise typer.BadParameter(str(e))
    configure_logging(settings)
    _state["metrics_file"] = settings.metrics_file
    return settings


def _parse_size(value: str) -> tuple:
    try:
        width, height = (int(part) for part in value.lower().split("x"))
    except ValueError:
        raise typer.BadParameter(f"expected WxH, got {value!r}", param_hint="--resize")
    if width < 1 or height < 1:
        raise typer.BadParameter("dimensions must be >= 1", param_hint="--resize")
    return width, height


def _fail(message: str):
    console.print(f"[error]error:[/error] {escape(message)}")


# ============================================================================
# COMMANDS
# ============================================================================

@app.callback()
def main_callback(
    ctx: typer.Context,
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR."),
    json_logs: Optional[bool] = typer.Option(None, "--json-logs/--console-logs", help="Structured JSON logs on stderr."),
    metrics_file: Optional[Path] = typer.Option(None, "--metrics-file", help="Write Prometheus metrics here on exit."),
):
    """Android malware detection on colour images of classes.dex."""
    obj = {}
    if log_level is not None:
        obj["log_level"] = log_level
    if json_logs is not None:
        obj["structured_logging"] = json_logs
    if metrics_file is not None:
        obj["metrics_file"] = str(metrics_file)
    ctx.obj = obj


@app.command("encode")
def encode_cmd(
    ctx: typer.Context,
    input_path: Path = typer.Argument(..., help="APK, ZIP or DEX file (any file with --raw)."),
    output: Path = typer.Argument(..., help="PNG file to write."),
    width: Optional[str] = typer.Option(None, "--width", help="'auto' or a fixed pixel width."),
    resize: Optional[str] = typer.Option(None, "--resize", help="Nearest-neighbour resize to WxH."),
    raw: bool = typer.Option(False, "--raw", help="Encode the file bytes without DEX validation."),
):
    """Encode classes.dex (or any binary with --raw) as a colour PNG."""
    settings = _settings(ctx, width_policy=width)
    size = _parse_size(resize) if resize else None
    start = time.perf_counter()

    if raw:
        try:
            data = input_path.read_bytes()
        except OSError as e:
            raise InputError(f"Cannot read {input_path}: {e}") from e
        image = encode_bytes(data, WidthPolicy.parse(settings.get_width()))
    else:
        prepared = encode_path(input_path, settings.get_width(), settings.strict_dex)
        if prepared.kind == "png":
            raise InputError(f"{input_path} is already a PNG image")
        image = prepared.image

    if size:
        image = resize_nearest(image, *size)
    write_png(image, output, settings.png_compress_level)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    logger.info("encoded", input=str(input_path), output=str(output), width=image.width, height=image.height)
    typer.echo(f"{output}: {image.width}x{image.height} in {elapsed_ms:.1f} ms")


@app.command("encode-batch")
def encode_batch_cmd(
    ctx: typer.Context,
    inputs: List[Path] = typer.Argument(..., help="APK, ZIP or DEX files."),
    out: Path = typer.Option(..., "--out", help="Directory receiving <sha256>.png files."),
    width: Optional[str] = typer.Option(None, "--width", help="'auto' or a fixed pixel width."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1),
):
    """Encode many inputs concurrently into content-addressed PNG files."""
    settings = _settings(ctx, width_policy=width, scan_workers=workers)
    results = BatchEncodeJob(out, settings).run([str(p) for p in inputs])
    for result in results:
        if result.error:
            typer.echo(f"{result.source}: error {result.error}")
        else:
            typer.echo(f"{result.source}: {result.output} {result.width}x{result.height}")
    if any(r.error for r in results):
        raise typer.Exit(EXIT_INPUT)


@app.command("train")
def train_cmd(
    ctx: typer.Context,
    manifest: Path = typer.Argument(..., help="Corpus manifest CSV."),
    optimizer: Optional[str] = typer.Option(None, "--optimizer", help="sgd, nag, adagrad or adadelta."),
    lr: Optional[float] = typer.Option(None, "--lr", help="Learning rate (ignored by adadelta)."),
    epochs: Optional[int] = typer.Option(None, "--epochs", min=1),
    batch: Optional[int] = typer.Option(None, "--batch", min=1),
    seed: Optional[int] = typer.Option(None, "--seed"),
    input_size: Optional[int] = typer.Option(None, "--input-size"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Gradient shards per batch."),
    out: Path = typer.Option(Path("model.r2d2"), "--out", help="Checkpoint file."),
    log: Optional[Path] = typer.Option(None, "--log", help="Training log CSV (default: <out>.csv)."),
):
    """Train the network on the train split of a corpus manifest."""
    settings = _settings(
        ctx,
        optimizer=optimizer,
        learning_rate=lr,
        epochs=epochs,
        batch_size=batch,
        seed=seed,
        input_size=input_size,
        train_workers=workers,
    )

    def load_image(path):
        return network_image(path, settings)

    train_set = load_split(manifest, Split.TRAIN, load_image)
    test_set = load_split(manifest, Split.TEST, load_image)

    network = Network(NetworkConfig(input_size=settings.input_size, seed=settings.seed))
    config = TrainConfig(
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        optimizer=settings.optimizer,
        learning_rate=settings.learning_rate,
        momentum=settings.momentum,
        rho=settings.rho,
        eps=settings.eps,
        seed=settings.seed,
        workers=settings.train_workers,
    )
    result = train(
        network,
        [(image, label.index) for image, label in train_set],
        config,
        eval_set=[(image, label.index) for image, label in test_set] or None,
    )

    save_checkpoint(network, out)
    log_path = write_training_log(result.log, log or out.with_suffix(".csv"))

    table = Table(title=f"{settings.optimizer} lr={settings.learning_rate:g}")
    for column in ("epoch", "loss", "train_acc", "eval_acc"):
        table.add_column(column, justify="right")
    for entry in result.log:
        table.add_row(
            str(entry.epoch), f"{entry.loss:.4f}", f"{entry.train_acc:.4f}",
            "n/a" if entry.eval_acc is None else f"{entry.eval_acc:.4f}",
        )
    console.print(table)

    final = result.log[-1]
    typer.echo(
        f"{out}: {network.parameter_count} parameters, loss {final.loss:.4f}, "
        f"train_acc {final.train_acc:.4f}, "
        f"eval_acc {'n/a' if final.eval_acc is None else f'{final.eval_acc:.4f}'}, log {log_path}"
    )


@app.command("scan")
def scan_cmd(
    ctx: typer.Context,
    model: Path = typer.Argument(..., help="Checkpoint written by train."),
    inputs: List[Path] = typer.Argument(..., help="APK, ZIP, DEX or PNG files."),
    threshold: Optional[float] = typer.Option(None, "--threshold", help="Malicious iff probability >= threshold."),
    as_csv: bool = typer.Option(False, "--csv", help="CSV output instead of text lines."),
    cache: Optional[Path] = typer.Option(None, "--cache", help="Known-sample JSON cache."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1),
):
    """Classify inputs; one verdict per input, in input order."""
    settings = _settings(ctx, threshold=threshold, scan_workers=workers)
    network = load_checkpoint(model)
    known = KnownSampleCache(cache) if cache else None
    results = Scanner(network, settings, cache=known).scan_many([str(p) for p in inputs])

    if as_csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SCAN_CSV_COLUMNS)
        for r in results:
            if isinstance(r, ScanFailure):
                writer.writerow([r.path, "", "", "", "", "", "", "", f"{r.error_type}: {r.message}"])
            else:
                writer.writerow([
                    r.path, r.sha256, f"{r.probability:.6f}", f"{r.threshold:g}", r.verdict.value,
                    f"{r.encode_ms:.2f}", f"{r.infer_ms:.2f}", r.source, "",
                ])
        typer.echo(buf.getvalue(), nl=False)
    else:
        for r in results:
            if isinstance(r, ScanFailure):
                typer.echo(f"{r.path}: error {r.error_type}: {r.message}")
            else:
                typer.echo(
                    f"{r.path}: {r.verdict.value} p={r.probability:.4f} threshold={r.threshold:g} "
                    f"sha256={r.sha256} encode_ms={r.encode_ms:.1f} infer_ms={r.infer_ms:.1f} source={r.source}"
                )

    failures = [r for r in results if isinstance(r, ScanFailure)]
    if failures:
        raise typer.Exit(max(f.exit_code for f in failures))


@app.command("eval")
def eval_cmd(
    ctx: typer.Context,
    model: Path = typer.Argument(..., help="Checkpoint written by train."),
    manifest: Path = typer.Argument(..., help="Corpus manifest CSV."),
    sweep: str = typer.Option("0:0.1:1", "--sweep", help="Threshold grid start:step:end."),
    split: str = typer.Option("test", "--split", help="train, test or all."),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the CSV here instead of stdout."),
    gnuplot: Optional[Path] = typer.Option(None, "--gnuplot", help="Also write a gnuplot data file."),
):
    """Threshold sweep of detection metrics over a manifest split."""
    if split not in ("train", "test", "all"):
        raise typer.BadParameter("must be train, test or all", param_hint="--split")
    grid = parse_sweep(sweep)
    network = load_checkpoint(model)
    settings = _settings(ctx, input_size=network.config.input_size)

    dataset = load_split(
        manifest,
        None if split == "all" else Split(split),
        lambda path: network_image(path, settings),
    )
    rows = threshold_sweep(score_dataset(network, dataset), grid)

    if out:
        write_sweep_csv(rows, out)
    else:
        typer.echo(sweep_csv(rows), nl=False)
    if gnuplot:
        write_gnuplot(rows, gnuplot)


def _pair_value(metric: str, a, b, settings: Settings, skip_over_cap: bool) -> str:
    if metric == "lev":
        a_bytes = a.raw if a.raw is not None else a.image.pixels.tobytes()
        b_bytes = b.raw if b.raw is not None else b.image.pixels.tobytes()
        value = levenshtein(
            a_bytes, b_bytes,
            cap=settings.levenshtein_cap,
            strict=skip_over_cap,
            band=settings.levenshtein_band,
        )
        return "n/a" if value is None else str(value)
    ia, ib = align_sizes(a.image, b.image)
    value = mse(ia, ib)
    if metric == "mse":
        return f"{value:.4f}"
    if metric == "rms":
        return f"{math.sqrt(value):.4f}"
    return f"{similarity_from_mse(value):.2f}"


@app.command("distance")
def distance_cmd(
    ctx: typer.Context,
    inputs: Optional[List[Path]] = typer.Argument(None, help="Two or more APK, ZIP, DEX or PNG files."),
    metric: str = typer.Option("sim", "--metric", help="mse, rms, lev or sim."),
    manifest: Optional[Path] = typer.Option(None, "--manifest", help="Report intra/inter-family similarity."),
    per_family: int = typer.Option(10, "--per-family", min=1, help="Samples per family with --manifest."),
    cap: Optional[int] = typer.Option(None, "--cap", help="Levenshtein byte cap."),
    band: Optional[int] = typer.Option(None, "--band", help="Levenshtein diagonal band."),
    skip_over_cap: bool = typer.Option(False, "--skip-over-cap", help="Report n/a instead of truncating."),
):
    """Pairwise distance matrix, or family similarity with --manifest."""
    if metric not in METRICS:
        raise typer.BadParameter(f"must be one of {', '.join(METRICS)}", param_hint="--metric")
    settings = _settings(ctx, levenshtein_cap=cap, levenshtein_band=band)

    if manifest:
        groups = defaultdict(list)
        for row in read_manifest(manifest):
            if len(groups[row.family]) < per_family:
                groups[row.family].append(
                    encode_path(resolve(manifest, row), settings.get_width(), settings.strict_dex).image)
        report = family_similarity(groups)
        typer.echo("intra_mean,inter_mean,intra_pairs,inter_pairs")
        typer.echo(",".join([
            "n/a" if report.intra_mean is None else f"{report.intra_mean:.4f}",
            "n/a" if report.inter_mean is None else f"{report.inter_mean:.4f}",
            str(report.intra_pairs),
            str(report.inter_pairs),
        ]))
        return

    if not inputs or len(inputs) < 2:
        raise typer.BadParameter("at least two inputs are required", param_hint="INPUTS")

    samples = [encode_path(p, settings.get_width(), settings.strict_dex) for p in inputs]
    n = len(samples)
    matrix = [[""] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            matrix[i][j] = matrix[j][i] = _pair_value(metric, samples[i], samples[j], settings, skip_over_cap)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([metric] + [str(p) for p in inputs])
    for path, values in zip(inputs, matrix):
        writer.writerow([str(path)] + values)
    typer.echo(buf.getvalue(), nl=False)


@app.command("gen-corpus")
def gen_corpus_cmd(
    ctx: typer.Context,
    spec: Optional[Path] = typer.Argument(None, help="Family spec file (default: built-in two-family spec)."),
    out: Path = typer.Option(..., "--out", help="Corpus directory."),
    count: int = typer.Option(250, "--count", min=1, help="Samples per family."),
    split: float = typer.Option(0.8, "--split", min=0.0, max=1.0, help="Train fraction."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1),
):
    """Generate a deterministic synthetic corpus and its manifest."""
    settings = _settings(ctx, scan_workers=workers)
    specs = load_family_specs(spec) if spec else default_families()
    rows = generate_corpus(specs, out, count, (split, 1.0 - split), workers=settings.scan_workers)
    n_train = sum(row.split is Split.TRAIN for row in rows)
    typer.echo(f"{out}: {len(rows)} samples ({n_train} train / {len(rows) - n_train} test)")


# ============================================================================
# ENTRY POINT
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and map failures to the exit-code contract."""
    _state["metrics_file"] = None
    try:
        rv = app(args=argv, prog_name="r2d2", standalone_mode=False)
        code = rv if isinstance(rv, int) else EXIT_OK
    except typer.Exit as e:
        code = e.exit_code
    except typer.Abort:
        code = EXIT_USAGE
    except UsageFailure as e:
        e.show()
        code = EXIT_USAGE
    except ValidationError as e:
        _fail(str(e))
        code = EXIT_USAGE
    except Exception as e:
        _fail(f"{type(e).__name__}: {e}")
        code = exit_code_for(e)
    finally:
        try:
            dump_metrics(_state["metrics_file"])
        except OSError as e:
            _fail(f"cannot write metrics: {e}")
    return code
