"""Decision vector layout ``w = [z_0, u_0, z_1, u_1, ..., u_{N-1}, z_N]``.

Each ``z_k`` holds the six states plus the accumulated cost ``J_k``.
"""

import numpy as np

NZ = 7
NU = 2
STRIDE = NZ + NU


def n_decision(n_ocp: int) -> int:
    return (n_ocp + 1) * NZ + n_ocp * NU


def z_index(k: int) -> int:
    return STRIDE * k


def u_index(k: int) -> int:
    return STRIDE * k + NZ


def pack(Z: np.ndarray, U: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    if Z.shape != (n + 1, NZ) or U.shape != (n, NU):
        raise ValueError(f"expected Z ({n + 1}, {NZ}) and U ({n}, {NU}), got {Z.shape}, {U.shape}")
    w = np.empty(n_decision(n))
    body = w[: STRIDE * n].reshape(n, STRIDE)
    body[:, :NZ] = Z[:-1]
    body[:, NZ:] = U
    w[STRIDE * n :] = Z[-1]
    return w


def unpack(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(w)
    n, rem = divmod(w.size - NZ, STRIDE)
    if rem or n < 0:
        raise ValueError(f"length {w.size} is not a valid decision vector")
    body = w[: STRIDE * n].reshape(n, STRIDE)
    Z = np.vstack([body[:, :NZ], w[STRIDE * n :][None]])
    return Z, body[:, NZ:].copy()


def n_intervals(w_size: int) -> int:
    n, rem = divmod(w_size - NZ, STRIDE)
    if rem or n < 0:
        raise ValueError(f"length {w_size} is not a valid decision vector")
    return n
