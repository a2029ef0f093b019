"""Series files, group manifests and length equalization.

Tachogram format: one decimal value per line (milliseconds for RR
intervals), UTF-8, blank lines and ``#`` comment lines ignored::

    # id: subject-01
    812.0
    798.5
    805.0

Manifest format: CSV with header ``id,group`` and an optional ``path``
column. Without a path the series is looked up next to the manifest as
``<id>.txt`` (then ``<id>.csv``).
"""

import csv
import logging
import math
from pathlib import Path
from typing import Literal, Optional, Union

from opnet.errors import DatasetError, OpnetError, SeriesFormatError
from opnet.models import GroupedDataset, TimeSeries

logger = logging.getLogger(__name__)

SeriesFormat = Literal["plain", "csv"]


def _parse_value(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SeriesFormatError(f"cannot parse {text!r} as a number", line=line) from None
    if not math.isfinite(value):
        raise SeriesFormatError(f"non-finite value {text!r}", line=line)
    return value


def _read_plain(path: Path) -> list[float]:
    values: list[float] = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            values.append(_parse_value(text, line_no))
    return values


def _read_csv(path: Path, column: Union[int, str]) -> list[float]:
    values: list[float] = []
    index: Optional[int] = column if isinstance(column, int) else None
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        first_row = True
        for row in reader:
            line_no = reader.line_num
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if first_row:
                first_row = False
                if index is None:
                    # Named column: this row must be the header
                    names = [cell.strip() for cell in row]
                    if column not in names:
                        raise SeriesFormatError(f"column {column!r} not in header", line=line_no)
                    index = names.index(column)
                    continue
                try:
                    float(row[index])
                except (ValueError, IndexError):
                    continue  # header row
            if index >= len(row):
                raise SeriesFormatError(f"missing column {index}", line=line_no)
            values.append(_parse_value(row[index].strip(), line_no))
    return values


def load_series(
    path: Union[str, Path],
    format: Optional[SeriesFormat] = None,
    column: Union[int, str] = 0,
    group_label: Optional[str] = None,
) -> TimeSeries:
    """Load a series from a plain or CSV file.

    Args:
        path: File to read
        format: ``plain`` or ``csv``; inferred from the suffix when omitted
        column: CSV column index or header name
        group_label: Optional group to tag the series with

    Returns:
        TimeSeries with values in file order and id taken from the file stem
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "plain"
    if not path.exists():
        raise SeriesFormatError(f"no such file: {path}")

    values = _read_csv(path, column) if format == "csv" else _read_plain(path)
    if not values:
        raise SeriesFormatError(f"empty series: {path}")
    if len(values) < 2:
        raise SeriesFormatError(f"series needs at least 2 samples: {path}")
    return TimeSeries(values=tuple(values), id=path.stem, group_label=group_label)


def save_series(series: TimeSeries, path: Union[str, Path]) -> Path:
    """Write a series in the plain format.

    ``repr`` gives the shortest decimal that round-trips, so loading the
    file back yields bit-identical values.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# id: {series.id}"]
    if series.group_label:
        lines.append(f"# group: {series.group_label}")
    lines.extend(repr(float(v)) for v in series.values)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _resolve_series_path(base: Path, series_id: str, explicit: Optional[str]) -> Optional[Path]:
    if explicit:
        candidate = Path(explicit)
        if not candidate.is_absolute():
            candidate = base / candidate
        return candidate if candidate.exists() else None
    for suffix in (".txt", ".csv"):
        candidate = base / f"{series_id}{suffix}"
        if candidate.exists():
            return candidate
    return None


def load_dataset(manifest: Union[str, Path]) -> GroupedDataset:
    """Load every series named in a manifest.

    Raises:
        DatasetError: manifest malformed or series files missing (all
            missing ids are listed)
    """
    manifest = Path(manifest)
    if not manifest.exists():
        raise DatasetError(f"manifest not found: {manifest}")

    with open(manifest, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(row for row in f if not row.lstrip().startswith("#"))
        fields = [name.strip() for name in reader.fieldnames or []]
        if "id" not in fields or "group" not in fields:
            raise DatasetError("manifest header must contain 'id' and 'group'")
        rows = [{k.strip(): (v or "").strip() for k, v in row.items() if k} for row in reader]

    base = manifest.parent
    series: list[TimeSeries] = []
    missing: list[str] = []
    for row in rows:
        series_id = row["id"]
        if not series_id:
            continue
        path = _resolve_series_path(base, series_id, row.get("path"))
        if path is None:
            missing.append(series_id)
            continue
        loaded = load_series(path, group_label=row["group"] or None)
        series.append(loaded.model_copy(update={"id": series_id}))

    if missing:
        raise DatasetError("missing series files", missing=missing)
    if not series:
        raise DatasetError(f"manifest lists no series: {manifest}")

    logger.info("Loaded %d series from %s", len(series), manifest)
    try:
        return GroupedDataset.from_series(series)
    except ValueError as e:
        raise DatasetError(str(e)) from None


def write_manifest(dataset: GroupedDataset, path: Union[str, Path], series_dir: str = ".") -> Path:
    """Save every series of a dataset plus a manifest pointing at them."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = {i: label for label, members in dataset.groups.items() for i in members}
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["id", "group", "path"])
        for s in dataset.series:
            relative = Path(series_dir) / f"{s.id}.txt"
            save_series(s, path.parent / relative)
            writer.writerow([s.id, labels.get(s.id, s.group_label or ""), relative.as_posix()])
    return path


def truncate(series: TimeSeries, n: int) -> TimeSeries:
    """Keep the first ``n`` samples, e.g. 1490 RR intervals per subject."""
    if n < 2:
        raise OpnetError(f"cannot truncate to {n} samples (minimum 2)")
    if len(series) < n:
        raise OpnetError(f"series '{series.id}' has {len(series)} samples, fewer than {n}")
    if len(series) == n:
        return series
    return TimeSeries(values=series.values[:n], id=series.id, group_label=series.group_label)
