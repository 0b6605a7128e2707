"""
store.py - Resumable on-disk result store for sweeps
Keeps one manifest.json per output directory with every finished cell, and
writes the final CSV/JSON outputs with the run configuration embedded.
"""

import json
import logging
import math
import os
from datetime import datetime

import numpy as np

from ..core.seeding import config_fingerprint

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class CellResult:
    """One finished sweep cell"""

    def __init__(self, key, kind, payload, completed_date=None):
        self.key = key
        self.kind = kind
        self.payload = payload
        self.completed_date = completed_date or datetime.now().isoformat()

    def to_dict(self):
        """Convert the cell to a dictionary for JSON storage"""
        return {
            "key": self.key,
            "kind": self.kind,
            "payload": self.payload,
            "completed_date": self.completed_date,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            key=data["key"],
            kind=data.get("kind", ""),
            payload=data.get("payload", {}),
            completed_date=data.get("completed_date"),
        )


def format_value(value):
    """CSV cell text: 9 significant digits for floats, nan for missing"""
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.9g}"


def _rounded(value):
    """Floats anywhere in a JSON document cut to 9 significant digits"""
    if isinstance(value, dict):
        return {key: _rounded(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(item) for item in value]
    if isinstance(value, (float, np.floating)) and math.isfinite(value):
        return float(f"{value:.9g}")
    return value


def _atomic_write(path, text):
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w") as f:
        f.write(text)
    os.replace(tmp_path, path)


class ResultStore:
    """
    Manifest of finished cells for one resolved configuration

    A manifest written for a different configuration (fingerprint mismatch)
    or one that cannot be parsed is discarded and the sweep starts over.
    """

    def __init__(self, out_dir, config_document, master_seed):
        self.out_dir = out_dir
        self.config_document = config_document
        self.master_seed = int(master_seed)
        self.fingerprint = config_fingerprint(
            {"config": config_document, "master_seed": self.master_seed}
        )
        self.manifest_file = os.path.join(out_dir, MANIFEST_NAME)
        self.cells = {}
        os.makedirs(out_dir, exist_ok=True)

    def load(self):
        """Load finished cells from the manifest, if it matches this configuration"""
        self.cells = {}
        if not os.path.exists(self.manifest_file):
            return self
        try:
            with open(self.manifest_file, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError:
            logger.error("corrupted manifest %s, starting a fresh sweep", self.manifest_file)
            return self

        if data.get("fingerprint") != self.fingerprint:
            logger.warning("manifest %s belongs to another configuration, ignoring it",
                           self.manifest_file)
            return self
        for cell_dict in data.get("cells", []):
            cell = CellResult.from_dict(cell_dict)
            self.cells[cell.key] = cell
        logger.info("resuming: %d finished cells in %s", len(self.cells), self.out_dir)
        return self

    def save(self):
        """Atomically rewrite the manifest"""
        data = {
            "fingerprint": self.fingerprint,
            "master_seed": self.master_seed,
            "config": self.config_document,
            "cells": [cell.to_dict() for cell in self.cells.values()],
            "last_modified": datetime.now().isoformat(),
        }
        _atomic_write(self.manifest_file, json.dumps(data, indent=2))

    def has(self, key):
        return key in self.cells

    def get(self, key):
        return self.cells[key]

    def put(self, cell):
        self.cells[cell.key] = cell
        self.save()

    def _header_lines(self, extra):
        lines = [
            f"# master_seed: {self.master_seed}",
            f"# config: {json.dumps(self.config_document, sort_keys=True)}",
        ]
        lines.extend(f"# {name}: {format_value(value)}" for name, value in (extra or {}).items())
        return lines

    def write_csv(self, name, columns, rows, extra=None):
        """
        Write a CSV output with '# ' comment lines describing the run

        Args:
            name (str): File name inside the output directory
            columns (list): Column names
            rows (iterable): Sequences of values, one per column
            extra (dict): Further header entries (e.g. gamma_egr)

        Returns:
            str: Path of the written file
        """
        lines = self._header_lines(extra)
        lines.append(",".join(columns))
        lines.extend(",".join(format_value(v) for v in row) for row in rows)
        path = os.path.join(self.out_dir, name)
        _atomic_write(path, "\n".join(lines) + "\n")
        logger.info("wrote %s", path)
        return path

    def write_json(self, name, document, extra=None):
        """Write a JSON output with the run configuration embedded"""
        data = {"master_seed": self.master_seed, "config": self.config_document}
        data.update(extra or {})
        data.update(document)
        path = os.path.join(self.out_dir, name)
        _atomic_write(path, json.dumps(_rounded(data), indent=2, sort_keys=True))
        logger.info("wrote %s", path)
        return path
