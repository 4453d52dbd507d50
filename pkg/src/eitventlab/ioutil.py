"""Small shared file helpers: canonical JSON, raw float64 blobs, hashing."""

import hashlib
import json
import os

import numpy as np


def write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True)
    with open(path, "w") as fh:
        fh.write(text + "\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_f64(path, array):
    """Write a C-ordered little-endian float64 blob."""
    arr = np.ascontiguousarray(array, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(arr.tobytes())


def read_f64(path, shape):
    count = int(np.prod(shape)) if shape else -1
    arr = np.fromfile(path, dtype="<f8", count=count)
    return arr.reshape(shape).astype(np.float64)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_json(obj):
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
