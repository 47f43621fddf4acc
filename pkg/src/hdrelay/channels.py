"""Channel description files.

A channel file is a JSON object::

    {
      "matrix": [[0.9, 0.1], [0.1, 0.9]],   # row-major, rows are inputs
      "input_labels": ["0", "1"],           # optional, default "0".."n-1"
      "output_labels": ["0", "1"],          # optional
      "silence_index": 0                    # optional, default 0
    }

For a relay-destination channel the row at ``silence_index`` is the
relay's silence symbol; rows are reordered so that silence comes first.
The shorthand ``{"bsc": 0.1}`` describes a binary symmetric channel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .halfduplex import RelayAlphabet
from .infotheory import DmcChannel


class ChannelFileError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelSpec:
    channel: DmcChannel  # rows ordered with silence first
    alphabet: RelayAlphabet
    output_labels: tuple[str, ...]


def parse_channel(obj) -> ChannelSpec:
    if not isinstance(obj, dict):
        raise ChannelFileError("channel description must be a JSON object")
    if "bsc" in obj:
        matrix = DmcChannel.bsc(float(obj["bsc"])).transition
    elif "matrix" in obj:
        matrix = obj["matrix"]
    else:
        raise ChannelFileError("channel description needs a 'matrix' or 'bsc' entry")
    try:
        w = np.array(matrix, dtype=float)
    except (TypeError, ValueError) as e:
        raise ChannelFileError(f"matrix is not numeric: {e}") from None
    if w.ndim != 2:
        raise ChannelFileError("matrix must be a list of equal-length rows")
    n, m = w.shape
    labels = obj.get("input_labels", [str(i) for i in range(n)])
    out_labels = tuple(str(s) for s in obj.get("output_labels", [str(j) for j in range(m)]))
    silence = obj.get("silence_index", 0)
    if len(labels) != n or len(out_labels) != m:
        raise ChannelFileError("label counts do not match the matrix shape")
    if not isinstance(silence, int) or not 0 <= silence < n:
        raise ChannelFileError(f"silence_index={silence} is not a valid row")
    order = [silence] + [i for i in range(n) if i != silence]
    try:
        channel = DmcChannel(w[order])
        alphabet = RelayAlphabet.from_labels(labels, silence)
    except ValueError as e:
        raise ChannelFileError(str(e)) from None
    return ChannelSpec(channel, alphabet, out_labels)


def load_channel(path: str | Path) -> ChannelSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as e:
        raise ChannelFileError(f"cannot read channel file {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ChannelFileError(f"channel file {path} is not valid JSON: {e.msg}") from None
    return parse_channel(obj)
