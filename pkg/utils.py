import json
import math
from pathlib import Path
from typing import List, Optional

import numpy as np

from config import FLOAT_FORMAT


class StateFileError(ValueError):
    """Raised for malformed state JSON files or state descriptors."""


def format_float(value: float) -> str:
    """Format a float for CSV output without losing precision"""
    return format(float(value), FLOAT_FORMAT)


def format_bits(value: Optional[float]) -> str:
    """Format an entropic quantity for display"""
    if value is None:
        return "n/a"
    if math.isinf(value):
        return "inf"
    return f"{value:.10f} bits"


def matrix_to_pairs(m) -> List[List[List[float]]]:
    """Row-major [re, im] pairs, the JSON form of a complex matrix"""
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def pairs_to_matrix(pairs) -> np.ndarray:
    """Inverse of matrix_to_pairs; plain real numbers are accepted as entries too"""
    try:
        rows = [
            [complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z) for z in row]
            for row in pairs
        ]
        m = np.array(rows, dtype=np.complex128)
    except (TypeError, ValueError, IndexError) as e:
        raise StateFileError(f"cannot read matrix entries: {e}")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateFileError(f"state matrix must be square, got shape {m.shape}")
    return m


def load_state_json(path) -> dict:
    """
    Read a state file: {"matrix": [[[re, im], ...], ...], "basis": "computational"}
    where "basis" is optional.
    """
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except UnicodeDecodeError as e:
        raise StateFileError(f"{path} is not UTF-8 text: {e}")
    except json.JSONDecodeError as e:
        raise StateFileError(f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict) or 'matrix' not in data:
        raise StateFileError(f"{path} has no 'matrix' entry")
    return {
        'matrix': pairs_to_matrix(data['matrix']),
        'basis': data.get('basis', 'computational')
    }


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2))
