"""
File: hashing.py
Description: Stable content hashes used for caches and run manifests.
"""

import hashlib
import json

import numpy as np


def canonical_json(obj):
    """Serialize to JSON with sorted keys and no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'),
                      default=_to_builtin)


def _to_builtin(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError("Object of type {} is not serializable".format(
        obj.__class__.__name__))


def sha256_json(obj):
    return hashlib.sha256(canonical_json(obj).encode('utf-8')).hexdigest()


def sha256_array(array):
    """Hash of the raw bytes of an array, with its dtype and shape."""
    array = np.ascontiguousarray(array)
    h = hashlib.sha256()
    h.update(str(array.dtype).encode('ascii'))
    h.update(str(array.shape).encode('ascii'))
    h.update(array.tobytes())
    return h.hexdigest()

