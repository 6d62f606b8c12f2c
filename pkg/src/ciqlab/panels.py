"""Return-panel and factor-table containers plus their CSV schemas.

Panel CSV:   header ``date,asset_id,ret,price,mktcap``; ``date`` is YYYY-MM;
             missing values are empty fields; one row per (date, asset).
Factors CSV: header ``date,mktrf,smb,hml,umd,rf`` plus arbitrary extra
             named columns usable as controls.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ciqlab.errors import SchemaError

__all__ = [
    "ObservedFactors",
    "PennyStockFilter",
    "ReturnPanel",
    "load_factors",
    "load_panel",
    "month_range",
    "next_month",
]

PANEL_HEADER = ["date", "asset_id", "ret", "price", "mktcap"]
FACTOR_BASE_HEADER = ["date", "mktrf", "smb", "hml", "umd", "rf"]


def _parse_month(text: str, path: str, line: int) -> str:
    text = text.strip()
    if len(text) != 7 or text[4] != "-" or not (text[:4] + text[5:]).isdigit():
        raise SchemaError(f"{path}:{line}: bad date {text!r}, expected YYYY-MM")
    month = int(text[5:])
    if not 1 <= month <= 12:
        raise SchemaError(f"{path}:{line}: month out of range in {text!r}")
    return text


def next_month(month: str) -> str:
    y, m = int(month[:4]), int(month[5:])
    y, m = (y + 1, 1) if m == 12 else (y, m + 1)
    return f"{y:04d}-{m:02d}"


def month_range(start: str, count: int) -> list[str]:
    out = [start]
    for _ in range(count - 1):
        out.append(next_month(out[-1]))
    return out


def _parse_float(text: str, path: str, line: int, col: str) -> float:
    text = text.strip()
    if text == "":
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"{path}:{line}: column {col!r} is not numeric: {text!r}") from None


@dataclass
class PennyStockFilter:
    """Returns observed at a sub-threshold price are treated as missing."""

    threshold: float = 1.0
    enabled: bool = True


@dataclass
class ReturnPanel:
    dates: list[str]
    assets: list[str]
    returns: np.ndarray            # (T, N) with NaN for missing
    market_caps: np.ndarray | None = None
    prices: np.ndarray | None = None

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        T, N = len(self.dates), len(self.assets)
        if self.returns.shape != (T, N):
            raise SchemaError("returns shape does not match date/asset labels")
        for i in range(1, T):
            if self.dates[i] != next_month(self.dates[i - 1]):
                raise SchemaError(
                    f"dates must be consecutive months; {self.dates[i-1]} -> {self.dates[i]}"
                )
        with np.errstate(invalid="ignore"):
            if np.any(self.returns <= -1.0):
                raise SchemaError("returns must exceed -1 where present")
        self._index = {d: i for i, d in enumerate(self.dates)}

    def date_index(self, month: str) -> int:
        try:
            return self._index[month]
        except KeyError:
            raise SchemaError(f"month {month} not covered by the panel") from None

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def excess_returns(self, risk_free: np.ndarray) -> np.ndarray:
        rf = np.asarray(risk_free, dtype=float)
        if rf.shape[0] != self.n_dates:
            raise SchemaError("risk-free series length does not match the panel")
        return self.returns - rf[:, None]


@dataclass
class ObservedFactors:
    dates: list[str]
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for name, series in self.columns.items():
            series = np.asarray(series, dtype=float)
            if series.shape[0] != len(self.dates):
                raise SchemaError(f"factor column {name!r} has wrong length")
            self.columns[name] = series
        self._index = {d: i for i, d in enumerate(self.dates)}

    def slice_for(self, months: list[str], names: list[str]) -> np.ndarray:
        """(len(months), len(names)) matrix; every cell must be present."""
        rows = []
        for m in months:
            if m not in self._index:
                raise SchemaError(f"factor table does not cover month {m}")
            rows.append(self._index[m])
        out = np.column_stack([self.columns[n][rows] for n in names])
        if not np.all(np.isfinite(out)):
            raise SchemaError(f"factor columns {names} contain missing values on the joined range")
        return out

    def series(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaError(f"factor table has no column {name!r}")
        return self.columns[name]


def load_panel(path: str, filters: PennyStockFilter | None = None) -> ReturnPanel:
    """Read a panel CSV, applying the penny-stock filter.

    A month where the observed price is below the threshold has its return
    marked missing.  Duplicate (date, asset) rows and malformed fields raise
    with the offending line number.
    """
    filters = filters or PennyStockFilter()
    records: dict[tuple[str, str], tuple[float, float, float]] = {}
    dates_seen: list[str] = []
    assets_seen: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}:1: empty file") from None
        if [h.strip() for h in header] != PANEL_HEADER:
            raise SchemaError(
                f"{path}:1: header must be {','.join(PANEL_HEADER)}, got {','.join(header)}"
            )
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PANEL_HEADER):
                raise SchemaError(f"{path}:{line}: expected {len(PANEL_HEADER)} fields, got {len(row)}")
            date = _parse_month(row[0], path, line)
            asset = row[1].strip()
            if not asset:
                raise SchemaError(f"{path}:{line}: empty asset_id")
            key = (date, asset)
            if key in records:
                raise SchemaError(f"{path}:{line}: duplicate (date, asset) row {key}")
            ret = _parse_float(row[2], path, line, "ret")
            price = _parse_float(row[3], path, line, "price")
            cap = _parse_float(row[4], path, line, "mktcap")
            records[key] = (ret, price, cap)
            if date not in dates_seen or not dates_seen or dates_seen[-1] != date:
                if date not in set(dates_seen):
                    dates_seen.append(date)
            if asset not in set(assets_seen):
                assets_seen.append(asset)

    dates = sorted(set(dates_seen))
    if not dates:
        raise SchemaError(f"{path}: no data rows")
    full_dates = month_range(dates[0], 1)
    while full_dates[-1] != dates[-1]:
        full_dates.append(next_month(full_dates[-1]))
    assets = sorted(set(assets_seen))
    T, N = len(full_dates), len(assets)
    returns = np.full((T, N), np.nan)
    prices = np.full((T, N), np.nan)
    caps = np.full((T, N), np.nan)
    d_index = {d: i for i, d in enumerate(full_dates)}
    a_index = {a: j for j, a in enumerate(assets)}
    for (date, asset), (ret, price, cap) in records.items():
        i, j = d_index[date], a_index[asset]
        returns[i, j] = ret
        prices[i, j] = price
        caps[i, j] = cap
    if filters.enabled:
        with np.errstate(invalid="ignore"):
            returns[prices < filters.threshold] = np.nan
    return ReturnPanel(full_dates, assets, returns, market_caps=caps, prices=prices)


def load_factors(path: str) -> ObservedFactors:
    """Read a factors CSV; base columns plus any extras, addressable by name."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}:1: empty file") from None
        if header[: len(FACTOR_BASE_HEADER)] != FACTOR_BASE_HEADER:
            raise SchemaError(
                f"{path}:1: header must start with {','.join(FACTOR_BASE_HEADER)}"
            )
        names = header[1:]
        dates: list[str] = []
        rows: list[list[float]] = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            dates.append(_parse_month(row[0], path, line))
            rows.append([_parse_float(v, path, line, names[k]) for k, v in enumerate(row[1:])])
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    order = np.argsort(dates, kind="stable")
    if len(set(dates)) != len(dates):
        raise SchemaError(f"{path}: duplicate dates in factor table")
    data = np.asarray(rows, dtype=float)[order]
    return ObservedFactors([dates[i] for i in order], {n: data[:, k] for k, n in enumerate(names)})
