"""Command line front end: ``bitw extract``, ``bitw eval`` and ``bitw cv``.

Every option can also be set through an environment variable named
``BITW_<OPTION>`` (for example ``BITW_THREADS=4``). Exit status is 0 on
success, 2 on usage errors and 3 on data errors.
"""

from __future__ import annotations

import csv
import logging
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from .descriptor import DEFAULT_BINS, extract_bitw, feature_count, feature_names
from .dwt import FAMILIES, WaveletConfig
from .errors import BitwError, DataError
from .evaluation import Holdout, KFold, make_splits, parse_split, run_protocol
from .raster import load_image, scan_dataset

log = logging.getLogger("bitw")

EXIT_DATA = 3


class SplitType(click.ParamType):
    name = "split"

    def convert(self, value, param, ctx):
        if isinstance(value, (Holdout, KFold)):
            return value
        try:
            return parse_split(value)
        except ValueError as exc:
            self.fail(str(exc), param, ctx)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.stem + ".names.txt")


def error_log_path(out: Path) -> Path:
    return out.with_name(out.stem + ".errors.log")


def _extract_manifest(manifest, config, bins, threads):
    """Return ``(rows, errors)`` in manifest order; rows are ``(path, label, values)``."""
    def one(item):
        path, label = item
        try:
            return extract_bitw(load_image(path, label), config, bins).values, None
        except DataError as exc:
            return None, str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, manifest.samples))
    else:
        results = [one(s) for s in manifest.samples]

    root = Path(manifest.root)
    rows, errors = [], []
    for (path, label), (values, err) in zip(manifest.samples, results):
        rel = Path(path).relative_to(root).as_posix()
        if err is None:
            rows.append((rel, label, values))
        else:
            errors.append((rel, err))
    return rows, errors


def write_feature_csv(out: Path, rows, levels: int):
    n = feature_count(levels)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "label"] + [f"f{i:03d}" for i in range(n)])
        for rel, label, values in rows:
            writer.writerow([rel, label] + [_fmt(v) for v in values])
    with open(sidecar_path(out), "w", encoding="utf-8", newline="\n") as fh:
        for i, name in enumerate(feature_names(levels)):
            fh.write(f"f{i:03d}\t{name}\n")


def read_feature_csv(path: Path):
    """Load ``(paths, labels, matrix)`` from a file written by ``extract``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty feature file") from None
        if header[:2] != ["path", "label"] or not all(re.fullmatch(r"f\d{3,}", h) for h in header[2:]):
            raise DataError(f"{path}: header must be path,label,f000,...")
        paths, labels, values = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            paths.append(row[0])
            labels.append(row[1])
            try:
                values.append([float(v) for v in row[2:]])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not paths:
        raise DataError(f"{path}: no samples")
    return paths, labels, np.array(values, dtype=float)


def _wavelet_options(f):
    f = click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True, envvar="BITW_THREADS", help="Worker threads.")(f)
    f = click.option("--bins", type=click.IntRange(min=2), default=DEFAULT_BINS, show_default=True, envvar="BITW_BINS", help="Quantization levels for subbands.")(f)
    f = click.option("--levels", type=click.IntRange(min=1), default=3, show_default=True, envvar="BITW_LEVELS", help="Wavelet decomposition depth.")(f)
    f = click.option("--wavelet", type=click.Choice(FAMILIES), default="haar", show_default=True, envvar="BITW_WAVELET")(f)
    f = click.option("--boundary", type=click.Choice(["symmetric", "periodic"]), default="symmetric", show_default=True, envvar="BITW_BOUNDARY")(f)
    f = click.option("--ext", default="png,tif,tiff,jpg,jpeg", show_default=True, envvar="BITW_EXT", help="Comma separated image extensions (case-insensitive).")(f)
    return f


def _run(fn):
    """Translate data errors into exit status 3."""
    try:
        return fn()
    except BitwError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
def main(verbose):
    """BiTW texture descriptor: feature extraction and evaluation."""
    logging.basicConfig(level=logging.WARNING - 10 * verbose, format="%(levelname)s %(message)s")


@main.command()
@click.option("--dataset", type=click.Path(path_type=Path), required=True, envvar="BITW_DATASET", help="Root with one subdirectory per class.")
@click.option("--out", type=click.Path(path_type=Path), required=True, envvar="BITW_OUT", help="Feature CSV to write.")
@_wavelet_options
def extract(dataset, out, wavelet, boundary, levels, bins, threads, ext):
    """Extract BiTW features of every image under DATASET into a CSV file."""
    def go():
        config = WaveletConfig(wavelet, levels, boundary)
        manifest = scan_dataset(dataset, ext)
        rows, errors = _extract_manifest(manifest, config, bins, threads)
        write_feature_csv(out, rows, levels)
        elog = error_log_path(out)
        if errors:
            with open(elog, "w", encoding="utf-8", newline="\n") as fh:
                for rel, msg in errors:
                    fh.write(f"{rel}\t{msg}\n")
        elif elog.exists():
            elog.unlink()
        click.echo(f"extracted {len(rows)} of {len(manifest)} images, skipped {len(errors)}", err=True)
        if errors:
            click.echo(f"see {elog}", err=True)
            sys.exit(EXIT_DATA)

    _run(go)


def _load_features(dataset: Path, config, bins, threads, ext):
    if dataset.is_file():
        return read_feature_csv(dataset)
    manifest = scan_dataset(dataset, ext)
    rows, errors = _extract_manifest(manifest, config, bins, threads)
    for rel, msg in errors:
        log.warning("skipped %s: %s", rel, msg)
    if not rows:
        raise DataError(f"{dataset}: no image could be decoded")
    return [r[0] for r in rows], [r[1] for r in rows], np.array([r[2] for r in rows])


def _groups(paths, pattern):
    if not pattern:
        return None
    rx = re.compile(pattern)
    out = []
    for p in paths:
        m = rx.search(p)
        if m is None:
            raise DataError(f"group pattern {pattern!r} does not match {p!r}")
        out.append(m.group(1) if rx.groups else m.group(0))
    return out


def format_report(report, header: list[tuple[str, str]]) -> str:
    lines = [" ".join(f"{k}={v}" for k, v in header)]
    if report.fold_accuracies:
        lines.append(f"accuracy: {report.accuracy_mean:.4f} (sd {report.accuracy_sd:.4f} over {len(report.fold_accuracies)} folds)")
    else:
        lines.append(f"accuracy: {report.accuracy:.4f}")
    lines.append(f"macro AUC: {report.auc:.4f}")
    lines.append("confusion (rows: truth, columns: prediction)")
    names = [str(c) for c in report.classes]
    width = max(len(n) for n in names + [str(int(report.confusion.max()))])
    lines.append(" " * width + " " + " ".join(n.rjust(width) for n in names))
    for name, row in zip(names, report.confusion):
        lines.append(name.rjust(width) + " " + " ".join(str(int(v)).rjust(width) for v in row))
    return "\n".join(lines) + "\n"


def _evaluate(command, dataset, out, split, classifier, knn_k, seed, group_pattern, wavelet, boundary, levels, bins, threads, ext):
    def go():
        config = WaveletConfig(wavelet, levels, boundary)
        paths, labels, X = _load_features(dataset, config, bins, threads, ext)
        plan = make_splits(labels, split, seed, groups=_groups(paths, group_pattern))
        report = run_protocol(X, labels, plan, classifier, knn_k, threads)
        header = [("command", command), ("classifier", classifier)]
        if classifier == "knn":
            header.append(("knn_k", str(knn_k)))
        header += [("split", str(split)), ("seed", str(seed)), ("features", str(X.shape[1]))]
        if not dataset.is_file():
            header += [("wavelet", wavelet), ("boundary", boundary), ("levels", str(levels)), ("bins", str(bins))]
        click.echo(format_report(report, header), nl=False)
        if out is not None:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                for k, v in header + report.as_items():
                    fh.write(f"{k}={v}\n")

    _run(go)


def _eval_options(default_split):
    def deco(f):
        f = click.option("--group-pattern", default=None, envvar="BITW_GROUP_PATTERN", help="Regex on sample paths; samples sharing the match (or its first group) stay in one partition.")(f)
        f = click.option("--seed", type=int, default=0, show_default=True, envvar="BITW_SEED")(f)
        f = click.option("--knn-k", type=click.IntRange(min=1), default=5, show_default=True, envvar="BITW_KNN_K")(f)
        f = click.option("--classifier", type=click.Choice(["lda", "knn"]), default="lda", show_default=True, envvar="BITW_CLASSIFIER")(f)
        f = click.option("--split", type=SplitType(), default=default_split, show_default=True, envvar="BITW_SPLIT", help="holdout:F or kfold:K.")(f)
        f = click.option("--out", type=click.Path(path_type=Path), default=None, envvar="BITW_OUT", help="Write a key=value report here.")(f)
        f = click.option("--dataset", type=click.Path(exists=True, path_type=Path), required=True, envvar="BITW_DATASET", help="Feature CSV or image dataset root.")(f)
        return _wavelet_options(f)

    return deco


@main.command("eval")
@_eval_options("holdout:0.7")
def eval_cmd(**kwargs):
    """Train/test split evaluation."""
    _evaluate("eval", **kwargs)


@main.command("cv")
@_eval_options("kfold:10")
def cv_cmd(**kwargs):
    """Stratified k-fold cross-validation."""
    _evaluate("cv", **kwargs)


if __name__ == "__main__":
    main()
