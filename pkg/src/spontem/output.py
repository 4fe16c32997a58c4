"""Result-file formats: CSV tables, run manifests, decomposition cache.

CSV files carry '#'-prefixed header lines with column names and units and
17-significant-digit values, so float64 columns round-trip losslessly and
reruns of the same configuration are byte-identical.  Timestamps and wall
times live only in the manifest, never in numeric outputs.

The decomposition cache file layout is:

    magic "ADEC1"
    uint64 LE: metadata length, then that many bytes of UTF-8 JSON
               {"dim": n, "param_hash": "..."}
    n float64 LE eigenvalues
    n*n float64 LE eigenvector columns (column-major)
    uint64 LE checksum: first 8 bytes of SHA-256 of everything above

A mismatched checksum or malformed header makes the loader return None
(with a warning) so callers recompute instead of crashing.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import ArrowheadHamiltonian, EigenDecomposition

_MAGIC = b"ADEC1"
CACHE_ENV_VAR = "SPONTEM_CACHE_DIR"


def write_csv(path, columns) -> None:
    """Write (name, unit, values) columns with '#' headers, 17 digits."""
    names = ", ".join(f"{name}({unit})" for name, unit, _ in columns)
    arrays = [np.asarray(values, dtype=float) for _, _, values in columns]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ValueError("all columns must have the same length")
    lines = [f"# columns: {names}\n"]
    for i in range(n):
        lines.append(",".join(f"{a[i]:.17g}" for a in arrays) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.writelines(lines)


def read_csv(path):
    """Read a write_csv file back: (column names, 2D float array)."""
    names = None
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                if line.startswith("# columns:"):
                    names = [c.strip() for c in line[len("# columns:"):].split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
    return names, np.asarray(rows)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    """What a command run produced: config echo, code version, checksums."""

    experiment: str
    config: dict
    code_version: str
    wall_time_s: float = 0.0
    outputs: list = field(default_factory=list)  # [{"name", "sha256"}]

    def add_output(self, path) -> None:
        self.outputs.append({"name": os.path.basename(path),
                             "sha256": file_sha256(path)})

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(
                {
                    "experiment": self.experiment,
                    "config": self.config,
                    "code_version": self.code_version,
                    "wall_time_s": self.wall_time_s,
                    "outputs": self.outputs,
                },
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")


def verify_manifest(path) -> bool:
    """True when every output listed in the manifest matches its checksum."""
    with open(path) as fh:
        data = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    for entry in data["outputs"]:
        target = os.path.join(base, entry["name"])
        if not os.path.exists(target) or file_sha256(target) != entry["sha256"]:
            return False
    return True


# ---------------------------------------------------------------------------
# eigendecomposition cache
# ---------------------------------------------------------------------------

def hamiltonian_param_hash(ham: ArrowheadHamiltonian) -> str:
    """Content hash of the defining arrays of an arrowhead Hamiltonian."""
    h = hashlib.sha256()
    h.update(ham.head.tobytes())
    h.update(ham.diag.tobytes())
    h.update(ham.border.tobytes())
    return h.hexdigest()[:32]


def cache_path(cache_dir, param_hash: str) -> str:
    return os.path.join(cache_dir, f"adec-{param_hash}.bin")


def save_decomposition(cache_dir, param_hash: str, eig: EigenDecomposition) -> str:
    """Store a decomposition; atomic write (temp file then rename)."""
    os.makedirs(cache_dir, exist_ok=True)
    path = cache_path(cache_dir, param_hash)
    meta = json.dumps({"dim": int(eig.dim), "param_hash": param_hash},
                      sort_keys=True).encode()
    payload = bytearray()
    payload += _MAGIC
    payload += struct.pack("<Q", len(meta))
    payload += meta
    payload += np.ascontiguousarray(eig.eigenvalues, dtype="<f8").tobytes()
    payload += np.asfortranarray(eig.eigenvectors.astype("<f8")).tobytes(order="F")
    checksum = hashlib.sha256(bytes(payload)).digest()[:8]
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(bytes(payload))
        fh.write(checksum)
    os.replace(tmp, path)
    return path


def load_decomposition(cache_dir, param_hash: str):
    """Load a cached decomposition, or None when absent or corrupt."""
    path = cache_path(cache_dir, param_hash)
    if not os.path.exists(path):
        return None
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
        body, checksum = blob[:-8], blob[-8:]
        if hashlib.sha256(body).digest()[:8] != checksum:
            raise ValueError("checksum mismatch")
        if body[:5] != _MAGIC:
            raise ValueError("bad magic")
        (meta_len,) = struct.unpack("<Q", body[5:13])
        meta = json.loads(body[13:13 + meta_len].decode())
        if meta["param_hash"] != param_hash:
            raise ValueError("parameter hash mismatch")
        n = int(meta["dim"])
        off = 13 + meta_len
        lam = np.frombuffer(body, dtype="<f8", count=n, offset=off).copy()
        off += 8 * n
        vec = np.frombuffer(body, dtype="<f8", count=n * n, offset=off)
        vec = vec.reshape((n, n), order="F").copy()
        return EigenDecomposition(lam, vec)
    except (ValueError, KeyError, json.JSONDecodeError, struct.error) as err:
        warnings.warn(f"ignoring corrupt decomposition cache {path}: {err}",
                      stacklevel=2)
        return None


def cache_eigendecomposition(ham: ArrowheadHamiltonian, cache_dir, solver):
    """Load the decomposition of `ham` from the cache or compute and store it.

    Returns (decomposition, path).  A corrupt cache file is ignored with a
    warning and overwritten by the fresh result.
    """
    key = hamiltonian_param_hash(ham)
    cached = load_decomposition(cache_dir, key)
    if cached is not None and cached.dim == ham.dim:
        return cached, cache_path(cache_dir, key)
    eig = solver(ham)
    path = save_decomposition(cache_dir, key, eig)
    return eig, path
