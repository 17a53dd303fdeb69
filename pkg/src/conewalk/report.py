"""Structured-text run reports and shared CSV formatting.

Reports are plain text with one ``[section]`` block per analysis, keys on
``key: value`` lines. Floats are serialized with 17 significant digits so a
round-trip is bit-exact and reports are byte-identical across reruns of the
same seed. Wall-clock timings deliberately live in a separate file
(``timings.txt``): they are the one legitimately non-reproducible output.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import yaml

from . import __version__


def fmt(value) -> str:
    """Deterministic scalar formatting: floats at 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return " ".join(fmt(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def render_report(config_dict: dict, sections: list[tuple[str, list[tuple[str, object]]]]) -> str:
    """Render the self-contained report: version, config echo, sections."""
    lines = [f"conewalk report (version {__version__})", ""]
    lines.append("[config]")
    config_yaml = yaml.safe_dump(config_dict, sort_keys=True, default_flow_style=None)
    lines.extend("  " + line for line in config_yaml.rstrip("\n").split("\n"))
    for name, entries in sections:
        lines.append("")
        lines.append(f"[{name}]")
        for key, value in entries:
            lines.append(f"  {key}: {fmt(value)}")
    lines.append("")
    return "\n".join(lines)


def write_report(path, config_dict: dict, sections) -> None:
    Path(path).write_text(render_report(config_dict, sections))


def write_csv(path, header: list[str], rows) -> None:
    """CSV writer applying the shared scalar formatting to every cell."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_timings(path, timings: list[tuple[str, float]]) -> None:
    with open(path, "w") as fh:
        for name, seconds in timings:
            fh.write(f"{name}: {seconds:.3f} s\n")
