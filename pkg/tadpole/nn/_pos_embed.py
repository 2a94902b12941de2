import numpy as np
from numpy.typing import NDArray


def sincos_pos_embed_2d(embed_dim: int, grid_size: int) -> NDArray[np.float32]:
    """Fixed 2-d sin-cos position codes, one row per patch in raster order.

    The first half of each row encodes the row coordinate and the second half
    the column coordinate.
    """
    rows, cols = np.meshgrid(
        np.arange(grid_size, dtype=np.float64),
        np.arange(grid_size, dtype=np.float64),
        indexing="ij",
    )
    emb_rows = _sincos_1d(embed_dim // 2, rows.reshape(-1))
    emb_cols = _sincos_1d(embed_dim // 2, cols.reshape(-1))
    return np.concatenate([emb_rows, emb_cols], axis=1).astype(np.float32)


def _sincos_1d(embed_dim: int, positions: NDArray[np.float64]) -> NDArray[np.float64]:
    omega = np.arange(embed_dim // 2, dtype=np.float64) / (embed_dim / 2.0)
    omega = 1.0 / 10000**omega
    angles = np.outer(positions, omega)
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)
