"""Pure-numpy Jacobi eigensolver (fallback when the extension is not built).

Uses the round-robin (tournament) ordering so that each round applies
``n // 2`` disjoint rotations at once with vectorized row/column updates.
"""

import numpy as np

EPS = np.finfo(float).eps


def _tournament(n):
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p >= 0 and q >= 0:
                pairs.append((min(p, q), max(p, q)))
        rounds.append((np.array([p for p, _ in pairs], dtype=np.intp),
                       np.array([q for _, q in pairs], dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(m, max_sweeps=100):
    """Same contract as the compiled ``jacobi_eigh``."""
    a = np.array(m, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    fro = np.linalg.norm(a)
    if fro == 0.0 or n < 2:
        return np.real(np.diag(a)).copy(), v, 0
    floor = 1e-18 * fro
    rounds = _tournament(n)

    for sweep in range(max_sweeps):
        rotated = False
        for P, Q in rounds:
            apq = a[P, Q]
            g = np.abs(apq)
            app = a[P, P].real
            aqq = a[Q, Q].real
            keep = (g > floor) & (g > EPS * np.sqrt(np.abs(app) * np.abs(aqq)))
            if not keep.any():
                continue
            rotated = True
            P, Q, g, app, aqq, apq = P[keep], Q[keep], g[keep], app[keep], aqq[keep], apq[keep]
            zeta = (aqq - app) / (2.0 * g)
            t = np.where(zeta < 0.0, -1.0, 1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            ph = apq / g
            sph = s * ph
            sphc = s * ph.conj()

            x, y = a[:, P], a[:, Q]
            a[:, P] = x * c - y * sphc
            a[:, Q] = x * sph + y * c
            x, y = a[P, :], a[Q, :]
            a[P, :] = c[:, None] * x - sph[:, None] * y
            a[Q, :] = sphc[:, None] * x + c[:, None] * y
            x, y = v[:, P], v[:, Q]
            v[:, P] = x * c - y * sphc
            v[:, Q] = x * sph + y * c

            a[P, P] = app - t * g
            a[Q, Q] = aqq + t * g
            a[P, Q] = 0.0
            a[Q, P] = 0.0
        if not rotated:
            return np.real(np.diag(a)).copy(), v, sweep + 1
    return np.real(np.diag(a)).copy(), v, -1
