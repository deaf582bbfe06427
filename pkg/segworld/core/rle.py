"""Bit-exact run-length encoding of binary masks.

Runs are taken over the row-major scan and alternate zeros and ones, starting
with a (possibly empty) run of zeros. The serialized form is a compact JSON
object ``{"counts": [...], "height": h, "width": w}``.
"""

import json
import logging
from typing import Any, List, Mapping, Union

import numpy as np

from .exceptions import MalformedRLE
from .models import BinaryMask

logger = logging.getLogger(__name__)

RLEInput = Union[bytes, str, Mapping[str, Any]]


def encode_runs(bits: np.ndarray) -> List[int]:
    """Alternating run lengths of a 2-D binary array, zeros first."""
    flat = np.asarray(bits, dtype=np.int8).ravel()
    if flat.size == 0:
        return [0]
    changes = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0] == 1:
        runs.insert(0, 0)
    return [int(run) for run in runs]


def decode_runs(width: int, height: int, counts: List[int]) -> BinaryMask:
    """Rebuild a mask from its header and run lengths."""
    if any(not isinstance(v, int) or isinstance(v, bool) or v <= 0 for v in (width, height)):
        raise MalformedRLE(f"invalid RLE header {width}x{height}")
    if not counts:
        raise MalformedRLE("RLE has no runs")
    if any(not isinstance(run, int) or isinstance(run, bool) or run < 0 for run in counts):
        raise MalformedRLE("RLE runs must be non-negative integers")
    if any(run == 0 for run in counts[1:]):
        raise MalformedRLE("only the leading zero-run may be empty")
    total = sum(counts)
    if total != width * height:
        raise MalformedRLE(f"RLE runs sum to {total}, expected {width * height}")
    values = np.repeat(np.arange(len(counts)) % 2, counts).astype(bool)
    return BinaryMask(width=width, height=height, bits=values.reshape(height, width))


def rle_to_dict(mask: BinaryMask) -> dict:
    return {"counts": encode_runs(mask.bits), "height": mask.height, "width": mask.width}


def rle_encode(mask: BinaryMask) -> bytes:
    return json.dumps(rle_to_dict(mask), sort_keys=True, separators=(",", ":")).encode("utf-8")


def rle_decode(data: RLEInput) -> BinaryMask:
    """Inverse of rle_encode; also accepts the already-parsed dict form."""
    if isinstance(data, (bytes, str)):
        try:
            payload = json.loads(data)
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise MalformedRLE(f"RLE is not valid JSON: {e}") from e
    else:
        payload = data
    if not isinstance(payload, Mapping):
        raise MalformedRLE("RLE must be an object with width, height and counts")
    try:
        width, height, counts = payload["width"], payload["height"], payload["counts"]
    except KeyError as e:
        raise MalformedRLE(f"RLE is missing {e.args[0]!r}") from e
    if not isinstance(counts, list):
        raise MalformedRLE("RLE counts must be a list")
    return decode_runs(width, height, counts)
