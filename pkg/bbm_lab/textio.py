"""Columnar text dumps of spectra and physical samples."""
import io

import numpy as np
import pandas as pd

from bbm_lab.errors import GridError
from bbm_lab.spectral import GridMode, SpectralField, make_grid

FIELD_HEADER = "# xi re im"
SAMPLES_HEADER = "# x re im"


def _write(path_or_buf, header: str, frame: pd.DataFrame) -> None:
    text = header + "\n" + frame.to_csv(sep=" ", header=False, index=False, float_format="%.17g")
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
        return
    with open(path_or_buf, "w", encoding="utf-8") as f:
        f.write(text)


def dump_field(u: SpectralField, path_or_buf) -> None:
    frame = pd.DataFrame({"xi": u.grid.xi, "re": u.coeffs.real, "im": u.coeffs.imag})
    _write(path_or_buf, FIELD_HEADER, frame)


def dump_samples(x: np.ndarray, values: np.ndarray, path_or_buf) -> None:
    values = np.asarray(values, dtype=np.complex128)
    frame = pd.DataFrame({"x": np.asarray(x, dtype=float), "re": values.real, "im": values.imag})
    _write(path_or_buf, SAMPLES_HEADER, frame)


def load_field(path_or_buf, mode=GridMode.LINE) -> SpectralField:
    """Read a dump back; the grid is rebuilt from the xi column."""
    if not hasattr(path_or_buf, "read"):
        with open(path_or_buf, "r", encoding="utf-8") as f:
            return load_field(io.StringIO(f.read()), mode)
    first = path_or_buf.readline().strip()
    if first != FIELD_HEADER:
        raise GridError(f"not a field dump (header {first!r})")
    frame = pd.read_csv(path_or_buf, sep=" ", header=None, names=["xi", "re", "im"], float_precision="round_trip")
    xi = frame["xi"].to_numpy()
    half_modes = (len(xi) - 1) // 2
    grid = make_grid(half_modes, float(xi[1] - xi[0]) if mode != GridMode.PERIODIC else 1.0, mode)
    if not np.allclose(grid.xi, xi, rtol=0, atol=1e-9 * max(1.0, grid.xi_max)):
        raise GridError("xi column is not a symmetric uniform lattice")
    return SpectralField(grid, frame["re"].to_numpy() + 1j * frame["im"].to_numpy())

