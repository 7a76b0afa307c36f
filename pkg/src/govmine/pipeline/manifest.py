"""Run manifest: digests, seeds, and counts for every pipeline stage."""

from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from pathlib import Path

MANIFEST_NAME = "manifest.json"
LOCK_NAME = ".lock"

# Full-corpus numbers from the source study; kept as reference targets
# only, since they need the original mailing-list corpus and neural
# checkpoints.
REFERENCE_TARGETS = {
    "activities_total": 2248950,
    "coherence_cv": 0.683,
    "rq1_r": 0.23,
    "rq2_r": 0.744,
    "m4_tjur_r2": 0.648,
    "m4_aic": 90.29,
    "n_projects": 208,
    "n_predictors": 89,
}


class PreconditionError(RuntimeError):
    """Missing upstream artifact or other unmet stage precondition."""


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


@contextmanager
def run_lock(run_dir: str | Path):
    """One writer per run directory, enforced by an exclusive lock file."""
    lock = Path(run_dir) / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise PreconditionError(
            f"run directory is locked by another writer: {lock}"
        ) from None
    try:
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


class RunManifest:
    def __init__(self, run_dir: str | Path, config_dict: dict) -> None:
        self.run_dir = Path(run_dir)
        self.path = self.run_dir / MANIFEST_NAME
        self.config_hash = config_hash(config_dict)
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
            if self.data.get("config_hash") != self.config_hash:
                raise PreconditionError(
                    "config changed since this run directory was created; "
                    "use a fresh --run-dir"
                )
        else:
            self.data = {
                "run_id": self.config_hash,
                "config_hash": self.config_hash,
                "config": config_dict,
                "reference_targets": REFERENCE_TARGETS,
                "metrics_note": "F1/accuracy are in-sample at threshold 0.5",
                "stages": {},
            }

    def stage_done(self, stage: str) -> bool:
        entry = self.data["stages"].get(stage)
        if entry is None:
            return False
        for rel, digest in entry["outputs"].items():
            p = self.run_dir / rel
            if not p.exists() or sha256_file(p) != digest:
                return False
        return True

    def require(self, stage: str, needed_by: str) -> None:
        if not self.stage_done(stage):
            raise PreconditionError(
                f"stage '{needed_by}' needs outputs of '{stage}': run {stage} first"
            )

    def _rel(self, p: str | Path) -> str:
        # run-dir artifacts are stored relative so manifests are
        # comparable across run directories
        p = Path(p)
        try:
            return str(p.relative_to(self.run_dir))
        except ValueError:
            return str(p)

    def record(
        self,
        stage: str,
        inputs: list[str | Path],
        outputs: list[str | Path],
        counts: dict,
        provider: str,
        seeds: dict | None = None,
    ) -> None:
        self.data["stages"][stage] = {
            "inputs": {
                self._rel(p): sha256_file(p) for p in inputs if Path(p).exists()
            },
            "outputs": {
                str(Path(p).relative_to(self.run_dir)): sha256_file(p)
                for p in outputs
            },
            "counts": counts,
            "provider": provider,
            "seeds": seeds or {},
        }
        atomic_write_text(self.path, json.dumps(self.data, indent=2, sort_keys=True) + "\n")
