"""Version 0.1.0"""
# CSV / JSON codecs for every artifact the experiments write.
# A table is a list of sections (name, header, rows); CSV separates the
# sections with a blank line, JSON keys them by name.

import csv
import io
import json
import logging
import math
from pathlib import Path

import numpy as np

from spiked_spectra.const import FLOAT_FORMAT

_LOGGER = logging.getLogger(__name__)

FORMAT_CSV = "csv"
FORMAT_JSON = "json"
FORMATS = [FORMAT_CSV, FORMAT_JSON]


def format_value(value):
    """Deterministic text for a CSV cell; absent values become ''."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return FLOAT_FORMAT % value
    return str(value)


def plain(value):
    """numpy scalars and arrays to JSON-ready Python values, NaN to None."""
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            return None
        return float(FLOAT_FORMAT % value)
    return value


class Table:
    def __init__(self, name, header, rows):
        self.sections = [(name, list(header), [list(row) for row in rows])]

    def add_section(self, name, header, rows):
        self.sections.append((name, list(header), [list(row) for row in rows]))
        return self

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        for index, (_, header, rows) in enumerate(self.sections):
            if index:
                buffer.write("\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
        return buffer.getvalue()

    def to_json(self):
        content = {
            name: [dict(zip(header, plain(row))) for row in rows]
            for name, header, rows in self.sections
        }
        if len(self.sections) == 1:
            content = next(iter(content.values()))
        return json.dumps(content, indent=2, sort_keys=True) + "\n"

    def render(self, fmt=FORMAT_CSV):
        if fmt == FORMAT_JSON:
            return self.to_json()
        return self.to_csv()

    def write(self, directory, stem, fmt=FORMAT_CSV):
        path = Path(directory) / f"{stem}.{fmt}"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(fmt), encoding="utf-8")
        _LOGGER.info("Wrote %s", path)
        return path


def atomic_table(measure):
    return Table("atoms", ("location", "weight"), measure.atoms)


def spectral_table(measure):
    rows = [
        (index, eigenvalue, weight)
        for index, (eigenvalue, weight) in enumerate(measure.points, start=1)
    ]
    return Table("spectrum", ("index", "eigenvalue", "weight"), rows)


def law_table(grid, density, atoms):
    """Density over a grid followed by the (location, mass) atom block."""
    table = Table("density", ("x", "density"), zip(grid, density))
    return table.add_section("atoms", ("location", "mass"), atoms)


def profile_table(profile):
    theory = (
        profile.theory if profile.theory is not None else np.full(profile.grid.shape, np.nan)
    )
    rows = zip(profile.grid, profile.counts, profile.estimates, theory, profile.abs_errors())
    return Table("profile", ("x", "count", "estimate", "theory", "abs_error"), rows)


def diagnostic_table(diagnostic):
    rows = zip(
        diagnostic.energies,
        diagnostic.etas,
        diagnostic.abs_shat,
        diagnostic.psi,
        diagnostic.ratio,
    )
    return Table("diagnostic", ("E", "eta", "abs_shat", "psi", "ratio"), rows)


def write_json(path, content):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(plain(content), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _LOGGER.info("Wrote %s", path)
    return path
