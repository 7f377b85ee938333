"""Run directories and experiment manifests.

Every CLI subcommand that produces files writes them into a fresh run
directory together with a manifest recording the resolved configuration,
input file hashes, and seed, which is what makes a run re-executable.
"""

from __future__ import annotations

import hashlib
import json
import os

from . import __version__


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def hash_tree(root) -> dict[str, str]:
    """sha256 of every file under ``root``, keyed by relative path."""
    out: dict[str, str] = {}
    for dirpath, _dirnames, filenames in os.walk(root):
        for fname in sorted(filenames):
            full = os.path.join(dirpath, fname)
            out[os.path.relpath(full, root)] = file_sha256(full)
    return out


class ExperimentManifest:
    def __init__(self, command: str, config: dict, seed: int,
                 inputs: dict[str, str] | None = None,
                 outputs: list[str] | None = None):
        self.command = command
        self.config = config
        self.seed = seed
        self.inputs = inputs or {}
        self.outputs = outputs or []

    def to_json(self) -> str:
        return json.dumps({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "version": __version__,
        }, sort_keys=True, indent=2)

    def save(self, run_dir) -> str:
        path = os.path.join(run_dir, "manifest.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")
        return path

    @classmethod
    def load(cls, run_dir) -> "ExperimentManifest":
        with open(os.path.join(run_dir, "manifest.json"), encoding="utf-8") as f:
            obj = json.load(f)
        return cls(obj["command"], obj["config"], obj["seed"],
                   obj.get("inputs", {}), obj.get("outputs", []))


def new_run_dir(root: str, prefix: str) -> str:
    """Create and return the next free ``root/prefix-NNNN``. Existing run
    directories are never reused or overwritten."""
    os.makedirs(root, exist_ok=True)
    n = 1
    while True:
        candidate = os.path.join(root, f"{prefix}-{n:04d}")
        try:
            os.mkdir(candidate)
            return candidate
        except FileExistsError:
            n += 1


def claim_out_dir(path: str) -> str:
    """Use an explicit output directory, refusing to clobber existing runs."""
    if os.path.exists(path):
        if os.listdir(path):
            raise FileExistsError(
                f"output directory {path} already exists and is not empty; "
                f"run directories are append-only")
        return path
    os.makedirs(path)
    return path
