"""Instance files (JSON) and report files (CSV with a JSON mirror)."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, TextIO, Union

from ..nonmonotone import GeneralProphetInstance, GeneralSecretaryInstance, GeneralSetSystem
from ..setsys import canonicalize
from ..valuemodel import ItemDistribution, ProphetInstance, SecretaryInstance

FORMAT_VERSION = 1

REPORT_FIELDS = [
    "instance_id", "algorithm", "mode", "trials", "seed", "mean", "halfwidth",
    "opt", "opt_halfwidth", "ratio", "violations", "wall_ms", "guard",
]

Instance = Union[ProphetInstance, SecretaryInstance, GeneralProphetInstance, GeneralSecretaryInstance]


class InstanceFormatError(ValueError):
    pass


def instance_to_dict(inst: Instance, metadata: dict[str, Any] | None = None) -> dict[str, Any]:
    if isinstance(inst, (ProphetInstance, SecretaryInstance)):
        kind, key, sets = "downward", "maximal_sets", inst.ss.as_lists()
    else:
        kind, key, sets = "general", "feasible_sets", inst.gss.as_lists()
    if isinstance(inst, (ProphetInstance, GeneralProphetInstance)):
        items = [{"support": [[v, p] for v, p in d.support]} for d in inst.dists]
    else:
        items = [{"value": v} for v in inst.values]
    return {
        "version": FORMAT_VERSION,
        "n": inst.n,
        "kind": kind,
        key: sets,
        "items": items,
        "metadata": metadata or {},
    }


def instance_from_dict(doc: dict[str, Any]) -> Instance:
    if doc.get("version") != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported instance version {doc.get('version')!r}")
    n = int(doc["n"])
    items = doc["items"]
    if len(items) != n:
        raise InstanceFormatError(f"{len(items)} items listed for n={n}")
    random_values = any("support" in it for it in items)
    if random_values:
        dists = tuple(
            ItemDistribution.from_pairs(it["support"]) if "support" in it
            else ItemDistribution.point(it["value"])
            for it in items
        )
    else:
        values = tuple(float(it["value"]) for it in items)
    kind = doc.get("kind")
    if kind == "downward":
        ss = canonicalize(doc["maximal_sets"], n)
        return ProphetInstance(ss, dists) if random_values else SecretaryInstance(ss, values)
    if kind == "general":
        gss = GeneralSetSystem.from_sets(doc["feasible_sets"], n)
        if random_values:
            return GeneralProphetInstance(gss, dists)
        return GeneralSecretaryInstance(gss, values)
    raise InstanceFormatError(f"unknown kind {kind!r}")


def save_instance(inst: Instance, path: str | Path, metadata: dict[str, Any] | None = None) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst, metadata), indent=1) + "\n")


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(float(v))
    return "" if v is None else str(v)


def write_report_rows(rows: Iterable[dict[str, Any]], fh: TextIO) -> None:
    w = csv.DictWriter(fh, fieldnames=REPORT_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row.get(k)) for k in REPORT_FIELDS})


def write_report_csv(rows: Iterable[dict[str, Any]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        write_report_rows(rows, fh)


def write_report_json(rows: Iterable[dict[str, Any]], path: str | Path) -> None:
    clean = [
        {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in r.items()}
        for r in rows
    ]
    Path(path).write_text(json.dumps(clean, indent=1) + "\n")


def read_report_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def merge_reports(paths: Iterable[str | Path]) -> list[dict[str, str]]:
    rows = [row for p in paths for row in read_report_csv(p)]
    rows.sort(key=lambda r: (r["instance_id"], r["algorithm"], r["mode"], r["seed"]))
    return rows
