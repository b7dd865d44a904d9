"""Sequence catalog: persistence and re-validation of pulse trains.

The catalog is a human-readable text format (key: value lines, records
separated by ---) storing every number in pi/T units with 9 significant
digits, so files are diffable and round-trip byte-for-byte.  A built-in
catalog ships the published reference sequences; derived sequences are
appended by the CLI.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import deriv_solver
from .cost_synthesis import ProfileClass
from .profile_analysis import BandMode, GridSpec, band_at_level, Profile
from .su2 import PulseTrain, Symmetry, probability_grid

__all__ = [
    "CatalogError",
    "CatalogEntry",
    "load_catalog",
    "save_catalog",
    "builtin_catalog_path",
    "default_catalog_path",
    "revalidate",
]

FORMAT_HEADER = "# polypulse catalog v1"
CATALOG_ENV_VAR = "POLYPULSE_CATALOG"

# Tolerance widening applied to alpha during fixture re-validation, absorbing
# the 4-digit rounding of published parameter sets.
ALPHA_SLACK = 1.2

_FIELDS = (
    "id",
    "provenance",
    "profile_class",
    "method",
    "symmetry",
    "target_p",
    "unit",
    "rabi",
    "detunings",
    "center_p",
    "center_tol",
    "eps0",
    "alpha",
    "wing_from",
    "residual_tol",
    "notes",
)
_OPTIONAL = {"eps0", "alpha", "wing_from", "residual_tol", "notes"}


class CatalogError(ValueError):
    """Malformed catalog file or schema violation."""


@dataclass(frozen=True)
class CatalogEntry:
    """One stored sequence plus the checks it must pass on load.

    The train is kept in internal radian units; serialization converts to
    pi/T.  center_p is the expected zero-error transition probability
    (defaults to the target); eps0/alpha/wing_from parameterize the
    class-specific validation predicate when present.
    """

    id: str
    train: PulseTrain
    target_p: float
    profile_class: ProfileClass
    method: str  # "derivative" | "cost"
    provenance: str  # "literature" | "derived"
    center_p: float
    center_tol: float = 2e-3
    eps0: float | None = None
    alpha: float | None = None
    wing_from: float | None = None
    residual_tol: float | None = None
    notes: str = ""


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def serialize_entry(entry: CatalogEntry) -> str:
    lines = [
        f"id: {entry.id}",
        f"provenance: {entry.provenance}",
        f"profile_class: {entry.profile_class.value}",
        f"method: {entry.method}",
        f"symmetry: {entry.train.symmetry.value}",
        f"target_p: {_fmt(entry.target_p)}",
        "unit: pi/T",
        f"rabi: {_fmt(entry.train.rabi / math.pi)}",
        "detunings: " + ", ".join(_fmt(d / math.pi) for d in entry.train.detunings),
        f"center_p: {_fmt(entry.center_p)}",
        f"center_tol: {_fmt(entry.center_tol)}",
    ]
    if entry.eps0 is not None:
        lines.append(f"eps0: {_fmt(entry.eps0)}")
    if entry.alpha is not None:
        lines.append(f"alpha: {_fmt(entry.alpha)}")
    if entry.wing_from is not None:
        lines.append(f"wing_from: {_fmt(entry.wing_from)}")
    if entry.residual_tol is not None:
        lines.append(f"residual_tol: {_fmt(entry.residual_tol)}")
    if entry.notes:
        lines.append(f"notes: {entry.notes}")
    return "\n".join(lines)


def save_catalog(entries, path) -> None:
    blocks = [serialize_entry(e) for e in entries]
    text = FORMAT_HEADER + "\n\n" + "\n---\n".join(blocks) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _parse_record(fields: dict[str, str], start_line: int) -> CatalogEntry:
    for key in ("id", "profile_class", "method", "symmetry", "target_p", "unit", "rabi", "detunings", "provenance"):
        if key not in fields:
            raise CatalogError(
                f"record at line {start_line}: missing required field '{key}'"
            )
    if fields["unit"] != "pi/T":
        raise CatalogError(
            f"record at line {start_line}: unsupported unit '{fields['unit']}'"
        )
    try:
        profile_class = ProfileClass(fields["profile_class"])
        symmetry = Symmetry(fields["symmetry"])
        rabi = float(fields["rabi"]) * math.pi
        dets = [float(v) * math.pi for v in fields["detunings"].split(",")]
        target_p = float(fields["target_p"])
    except ValueError as exc:
        raise CatalogError(f"record at line {start_line}: {exc}") from exc
    try:
        train = PulseTrain.from_detunings(rabi, dets, symmetry=symmetry)
    except ValueError as exc:
        raise CatalogError(f"record at line {start_line}: invalid train: {exc}") from exc

    def opt_float(key):
        return float(fields[key]) if key in fields else None

    return CatalogEntry(
        id=fields["id"],
        train=train,
        target_p=target_p,
        profile_class=profile_class,
        method=fields["method"],
        provenance=fields["provenance"],
        center_p=float(fields.get("center_p", fields["target_p"])),
        center_tol=float(fields.get("center_tol", 2e-3)),
        eps0=opt_float("eps0"),
        alpha=opt_float("alpha"),
        wing_from=opt_float("wing_from"),
        residual_tol=opt_float("residual_tol"),
        notes=fields.get("notes", ""),
    )


def load_catalog(path, validate: bool = True) -> list[CatalogEntry]:
    """Parse a catalog file; with validate=True every entry is re-checked."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FORMAT_HEADER:
        raise CatalogError(
            f"{path}: first line must be '{FORMAT_HEADER}' (unknown or missing version)"
        )
    entries = []
    fields: dict[str, str] = {}
    start = 2
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "---":
            if fields:
                entries.append(_parse_record(fields, start))
            fields, start = {}, lineno + 1
            continue
        if ":" not in line:
            raise CatalogError(f"line {lineno}: expected 'key: value', got '{raw}'")
        key, _, value = line.partition(":")
        key = key.strip()
        if key not in _FIELDS:
            raise CatalogError(
                f"line {lineno}: unknown field '{key}' (schema {FORMAT_HEADER!r})"
            )
        if key in fields:
            raise CatalogError(f"line {lineno}: duplicate field '{key}'")
        fields[key] = value.strip()
    if fields:
        entries.append(_parse_record(fields, start))
    if validate:
        for entry in entries:
            ok, detail = revalidate(entry)
            if not ok:
                raise CatalogError(f"entry '{entry.id}' failed re-validation: {detail}")
    return entries


def revalidate(entry: CatalogEntry) -> tuple[bool, str]:
    """Re-check an entry with the predicate that created it.

    Always: zero-error probability within center_tol of center_p.  Derivative
    entries additionally re-check the flatness residuals; cost entries with
    eps0 and alpha re-check the class predicate at ALPHA_SLACK * alpha.
    """
    train = entry.train
    center = float(probability_grid(train.rabi, train.detunings, 0.0))
    if abs(center - entry.center_p) > entry.center_tol:
        return False, f"center probability {center:.6f} != {entry.center_p:.6f}"

    if entry.method == "derivative" and entry.residual_tol is not None:
        n_free = len(train) // 2
        prob = deriv_solver.DerivProblem(
            target_p=entry.target_p, n_free=n_free, tolerance=entry.residual_tol
        )
        free = train.detunings[:n_free]
        res = deriv_solver.build_residuals(train.rabi, free, prob)
        worst = float(np.max(np.abs(res)))
        if worst > entry.residual_tol:
            return False, f"max flatness residual {worst:.3e} > {entry.residual_tol:g}"
        return True, "ok"

    if entry.eps0 is not None and entry.alpha is not None:
        return _revalidate_banded(entry)
    return True, "ok"


def _fine_profile(train: PulseTrain) -> Profile:
    grid = GridSpec((-1.0, 1.0), 1e-3)
    vals = probability_grid(train.rabi, train.detunings, grid.eps_axis)
    return Profile(grid, vals)


def _revalidate_banded(entry: CatalogEntry) -> tuple[bool, str]:
    level = ALPHA_SLACK * entry.alpha
    profile = _fine_profile(entry.train)
    if entry.profile_class in (ProfileClass.BROADBAND, ProfileClass.PASSBAND):
        inner = band_at_level(profile, level, BandMode.INNER, target=entry.target_p)
        if not (inner.attained and inner.value >= entry.eps0 - 2e-3):
            return False, f"inner band {inner.value:.4f} < eps0 {entry.eps0:g}"
    if entry.profile_class in (ProfileClass.NARROWBAND, ProfileClass.PASSBAND):
        start = entry.wing_from if entry.wing_from is not None else entry.eps0
        eps = profile.grid.eps_axis
        wings = profile.values[np.abs(eps) >= start - 1e-12]
        worst = float(np.max(wings)) if len(wings) else 0.0
        if worst > level:
            return False, f"wing max {worst:.3e} > {level:g} beyond |eps|={start:g}"
    return True, "ok"


def builtin_catalog_path():
    return resources.files("polypulse").joinpath("data/builtin_catalog.txt")


def default_catalog_path() -> str:
    return os.environ.get(CATALOG_ENV_VAR, str(builtin_catalog_path()))
