"""Weight checkpoints: JSON manifest + one little-endian float64 blob.

Round-trips are bit-exact; the manifest maps each name to its shape and
byte offset inside the blob.
"""

import numpy as np

from .. import ioutil
from .tensor import Tensor


def save_checkpoint(prefix, arrays):
    manifest = {}
    offset = 0
    blobs = []
    for name, value in arrays.items():
        arr = value.data if isinstance(value, Tensor) else np.asarray(value)
        arr = arr.astype("<f8", copy=False)
        manifest[name] = {"shape": list(arr.shape), "offset": offset}
        blobs.append(arr.tobytes())  # tobytes() emits C order for any layout
        offset += arr.nbytes
    with open(str(prefix) + ".bin", "wb") as fh:
        for b in blobs:
            fh.write(b)
    ioutil.write_json(str(prefix) + ".json", manifest)


def load_checkpoint(prefix):
    manifest = ioutil.read_json(str(prefix) + ".json")
    with open(str(prefix) + ".bin", "rb") as fh:
        blob = fh.read()
    out = {}
    for name, entry in manifest.items():
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(blob, dtype="<f8", count=n, offset=start)
        out[name] = arr.reshape(shape).astype(np.float64)
    return out
