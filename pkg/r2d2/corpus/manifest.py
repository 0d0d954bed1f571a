"""
Corpus generation and manifest I/O.

A corpus directory holds one sub-directory per family, a copy of the family
spec (families.txt) and manifest.csv with columns path, family, label, split.
Paths in the manifest are relative to the manifest's directory.
"""

import csv
import hashlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from r2d2.corpus.families import FamilySpec, write_family_specs
from r2d2.corpus.generator import generate_sample
from r2d2.exceptions import CorpusError, InputError
from r2d2.models import Label, ManifestRow, Split
from r2d2.observability import StageTimer, logger
from r2d2.pixel import RgbImage


MANIFEST_NAME = "manifest.csv"
SPEC_NAME = "families.txt"
MANIFEST_COLUMNS = ["path", "family", "label", "split"]


def _split_key(family: str, index: int) -> bytes:
    return hashlib.sha256(f"{family}:{index}".encode("utf-8")).digest()


def assign_splits(family: str, count: int, train_fraction: float) -> List[Split]:
    """
    Deterministic split per sample index.

    Indices are ranked by sha256('<family>:<index>') and the first
    round(count * train_fraction) become train, so each family splits exactly.
    """
    n_train = int(round(count * train_fraction))
    ranked = sorted(range(count), key=lambda i: _split_key(family, i))
    train = set(ranked[:n_train])
    return [Split.TRAIN if i in train else Split.TEST for i in range(count)]


def _sample_path(spec: FamilySpec, index: int) -> str:
    return f"{spec.name}/{spec.name}_{index:05d}.dex"


def generate_corpus(
    specs: Sequence[FamilySpec],
    out_dir: Union[str, Path],
    per_family_count: int,
    split: Tuple[float, float] = (0.8, 0.2),
    workers: int = 4
) -> List[ManifestRow]:
    """
    Generate DEX files for every family and write the manifest.

    Args:
        specs: Families to generate
        out_dir: Corpus directory (created if missing)
        per_family_count: Samples per family
        split: (train, test) fractions summing to 1
        workers: Threads used to generate samples

    Returns:
        Manifest rows in family then index order

    Raises:
        CorpusError: Invalid counts or fractions, or any I/O failure
    """
    if per_family_count < 1:
        raise CorpusError("per_family_count must be >= 1")
    train_fraction, test_fraction = split
    if min(split) < 0 or abs(train_fraction + test_fraction - 1.0) > 1e-9:
        raise CorpusError(f"Split fractions must be non-negative and sum to 1, got {split}")
    if not specs:
        raise CorpusError("No families to generate")

    out_dir = Path(out_dir)
    rows: List[ManifestRow] = []
    jobs = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for spec in specs:
            (out_dir / spec.name).mkdir(exist_ok=True)
            splits = assign_splits(spec.name, per_family_count, train_fraction)
            for index in range(per_family_count):
                rel = _sample_path(spec, index)
                rows.append(ManifestRow(path=rel, family=spec.name, label=spec.label, split=splits[index]))
                jobs.append((spec, index, out_dir / rel))

        def write_one(job):
            spec, index, path = job
            path.write_bytes(generate_sample(spec, index))

        with StageTimer("generate_corpus") as timer:
            with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
                list(pool.map(write_one, jobs))

        write_family_specs(specs, out_dir / SPEC_NAME)
        write_manifest(rows, out_dir / MANIFEST_NAME)
    except OSError as e:
        raise CorpusError(f"Cannot write corpus to {out_dir}: {e}") from e

    logger.info(
        "corpus_generated",
        out_dir=str(out_dir),
        families=len(specs),
        samples=len(rows),
        duration_ms=round(timer.elapsed_ms, 1),
    )
    return rows


def write_manifest(rows: Sequence[ManifestRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for row in rows:
            writer.writerow([row.path, row.family, row.label.value, row.split.value])
    return path


def read_manifest(path: Union[str, Path]) -> List[ManifestRow]:
    """
    Read a manifest CSV.

    Raises:
        CorpusError: Missing file, wrong header or invalid rows
    """
    path = Path(path)
    try:
        with path.open(newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != MANIFEST_COLUMNS:
                raise CorpusError(f"{path}: expected header {MANIFEST_COLUMNS}, got {reader.fieldnames}")
            rows = []
            for line_no, record in enumerate(reader, start=2):
                try:
                    rows.append(ManifestRow(**record))
                except (ValidationError, TypeError) as e:
                    raise CorpusError(f"{path}:{line_no}: invalid manifest row: {e}") from e
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise CorpusError(f"Cannot read manifest {path}: {e}") from e
    if not rows:
        raise CorpusError(f"Manifest {path} has no rows")
    return rows


def resolve(manifest_path: Union[str, Path], row: ManifestRow) -> Path:
    """Absolute location of a manifest row's file."""
    return Path(manifest_path).parent / row.path


def load_split(
    manifest_path: Union[str, Path],
    split: Optional[Split],
    load_image,
) -> List[Tuple[RgbImage, Label]]:
    """
    Images and labels of one split (or all rows when split is None).

    Args:
        manifest_path: Manifest CSV
        split: Split to keep
        load_image: Callable mapping a file path to a network-ready RgbImage

    Raises:
        CorpusError: If the manifest is malformed or a sample cannot be loaded
    """
    rows = [r for r in read_manifest(manifest_path) if split is None or r.split == split]
    dataset = []
    for row in rows:
        path = resolve(manifest_path, row)
        try:
            dataset.append((load_image(path), row.label))
        except InputError as e:
            raise CorpusError(f"{row.path}: {e}") from e
    return dataset
