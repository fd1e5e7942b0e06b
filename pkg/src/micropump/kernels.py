"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public ``loop_field``, ``loop_field_quadrature``, ``assemble_biharmonic``
and ``disc_load_fraction`` dispatch on :data:`micropump._accel.USE_NUMBA`.
The ``*_numba`` / ``*_numpy`` functions are importable directly so tests and
the benchmark can pin a backend.
"""

import math

import numpy as np
from scipy import special

from ._accel import USE_NUMBA, njit

MU0 = 4e-7 * math.pi

# Points closer than this to a filament are rejected as singular [m].
SINGULAR_DISTANCE = 1e-9

# Below this r/beta the off-axis B_r uses its two-term axis series; above it the
# elliptic form, whose bracket cancels to O(r/beta).
_BR_SERIES_RATIO = 1e-2


# --------------------------------------------------------------------------
# circular-loop field via complete elliptic integrals
# --------------------------------------------------------------------------


@njit(cache=True)
def _ellip_ke(kp, m):
    # Arithmetic-geometric mean for K(m) and E(m); kp = sqrt(1 - m). Both are
    # passed so small m keeps full precision; c_{n+1} = c_n^2 / (4 a_{n+1})
    # avoids the a - b cancellation.
    a = 1.0
    b = kp
    c2 = m
    s = 0.5 * m
    p = 0.5
    for _ in range(64):
        an = 0.5 * (a + b)
        b = math.sqrt(a * b)
        a = an
        c2 = c2 * c2 / (16.0 * a * a)
        p *= 2.0
        s += p * c2
        if c2 <= 1e-34 * a * a:
            break
    k = 0.5 * math.pi / a
    return k, k * (1.0 - s)


def _br_series_expr(R, current, r, dz):
    # sum_n (-1)^(n+1) r^(2n+1) / (2^(2n+1) n! (n+1)!) B0^(2n+1)(z), n = 0..2, with
    # B0 the on-axis field; works on arrays too
    s = R * R + dz * dz
    a = 0.5 * MU0 * current * R * R * dz * r
    r2 = r * r
    t0 = 1.5 / s**2.5
    t1 = 0.9375 * r2 * (3.0 * R * R - 4.0 * dz * dz) / s**4.5
    t2 = 0.8203125 * r2 * r2 * (5.0 * R**4 - 20.0 * R * R * dz * dz + 8.0 * dz**4) / s**6.5
    return a * (t0 + t1 + t2)


_br_series = njit(cache=True)(_br_series_expr)


@njit(cache=True)
def loop_field_numba(radii, zs, currents, r, z):
    npts = r.shape[0]
    nl = radii.shape[0]
    br = np.zeros(npts)
    bz = np.zeros(npts)
    for p in range(npts):
        rp = abs(r[p])
        sb = 0.0
        sr = 0.0
        for j in range(nl):
            R = radii[j]
            dz = z[p] - zs[j]
            alpha2 = (R - rp) ** 2 + dz * dz
            if alpha2 < SINGULAR_DISTANCE * SINGULAR_DISTANCE:
                sb = math.nan
                sr = math.nan
                break
            beta2 = (R + rp) ** 2 + dz * dz
            beta = math.sqrt(beta2)
            k, e = _ellip_ke(math.sqrt(alpha2 / beta2), 4.0 * R * rp / beta2)
            pref = MU0 * currents[j] / (2.0 * math.pi * beta)
            sb += pref * (k + (R * R - rp * rp - dz * dz) / alpha2 * e)
            if rp < _BR_SERIES_RATIO * beta:
                sr += _br_series(R, currents[j], rp, dz)
            else:
                sr += pref * dz / rp * (-k + (R * R + rp * rp + dz * dz) / alpha2 * e)
        bz[p] = sb
        br[p] = sr if r[p] >= 0.0 else -sr
    return br, bz


def loop_field_numpy(radii, zs, currents, r, z):
    rp = np.abs(r)[:, None]
    dz = z[:, None] - zs[None, :]
    R = radii[None, :]
    cur = currents[None, :]
    alpha2 = (R - rp) ** 2 + dz**2
    beta2 = (R + rp) ** 2 + dz**2
    bad = np.any(alpha2 < SINGULAR_DISTANCE**2, axis=1)
    alpha2 = np.where(alpha2 < SINGULAR_DISTANCE**2, 1.0, alpha2)
    beta = np.sqrt(beta2)
    p = alpha2 / beta2
    m = 4.0 * R * rp / beta2
    k = special.ellipkm1(p)
    e = special.ellipe(m)
    pref = MU0 * cur / (2.0 * np.pi * beta)
    bz = pref * (k + (R**2 - rp**2 - dz**2) / alpha2 * e)
    small = rp < _BR_SERIES_RATIO * beta
    safe_r = np.where(small, 1.0, rp)
    br_full = pref * dz / safe_r * (-k + (R**2 + rp**2 + dz**2) / alpha2 * e)
    br_series = _br_series_expr(R, cur, rp, dz)
    br = np.where(small, br_series, br_full).sum(axis=1)
    bz = bz.sum(axis=1)
    br = np.where(r < 0, -br, br)
    bz[bad] = np.nan
    br[bad] = np.nan
    return br, bz


def loop_field(radii, zs, currents, r, z):
    """(B_r, B_z) [T] of coaxial filament loops at points (r, z).

    ``radii``, ``zs`` and ``currents`` describe one filament each; ``r`` and
    ``z`` are 1-D float arrays of equal length. Singular points come back NaN.
    """
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (radii, zs, currents, r, z)]
    if USE_NUMBA:
        return loop_field_numba(*args)
    return loop_field_numpy(*args)


# --------------------------------------------------------------------------
# brute-force Biot-Savart over the loop angle
# --------------------------------------------------------------------------


@njit(cache=True)
def loop_field_quadrature_numba(R, current, r, z, n_panels):
    # Periodic trapezoid rule: spectrally accurate for a smooth integrand.
    h = 2.0 * math.pi / n_panels
    sb = 0.0
    sr = 0.0
    for i in range(n_panels):
        c = math.cos(i * h)
        d2 = r * r + R * R - 2.0 * r * R * c + z * z
        inv3 = 1.0 / (d2 * math.sqrt(d2))
        sb += (R - r * c) * inv3
        sr += c * inv3
    pref = MU0 * current * R / (4.0 * math.pi) * h
    return pref * z * sr, pref * sb


def loop_field_quadrature_numpy(R, current, r, z, n_panels):
    phi = np.arange(n_panels) * (2.0 * np.pi / n_panels)
    c = np.cos(phi)
    d2 = r * r + R * R - 2.0 * r * R * c + z * z
    inv3 = d2**-1.5
    pref = MU0 * current * R / (4.0 * np.pi) * (2.0 * np.pi / n_panels)
    return pref * z * np.sum(c * inv3), pref * np.sum((R - r * c) * inv3)


def loop_field_quadrature(R, current, r, z, n_panels=1 << 14):
    """(B_r, B_z) of one loop by direct Biot-Savart summation over its angle."""
    if USE_NUMBA:
        return loop_field_quadrature_numba(float(R), float(current), float(r), float(z), int(n_panels))
    return loop_field_quadrature_numpy(float(R), float(current), float(r), float(z), int(n_panels))


# --------------------------------------------------------------------------
# 13-point clamped biharmonic stencil
# --------------------------------------------------------------------------


def _stencil(hx, hy):
    di, dj, cf = [], [], []
    for d, c in ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)):
        di += [d, 0]
        dj += [0, d]
        cf += [c / hx**4, c / hy**4]
    for a, ca in ((-1, 1.0), (0, -2.0), (1, 1.0)):
        for b, cb in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            di.append(a)
            dj.append(b)
            cf.append(2.0 * ca * cb / (hx * hx * hy * hy))
    return np.array(di, np.int64), np.array(dj, np.int64), np.array(cf)


@njit(cache=True)
def _assemble_numba(nx, ny, di, dj, cf):
    mx = nx - 2
    my = ny - 2
    cap = mx * my * di.shape[0]
    rows = np.empty(cap, np.int64)
    cols = np.empty(cap, np.int64)
    vals = np.empty(cap)
    k = 0
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            row = (i - 1) * my + (j - 1)
            for s in range(di.shape[0]):
                ti = i + di[s]
                tj = j + dj[s]
                # ghost reflection across a clamped edge
                if ti == -1:
                    ti = 1
                elif ti == nx:
                    ti = nx - 2
                if tj == -1:
                    tj = 1
                elif tj == ny:
                    tj = ny - 2
                if ti <= 0 or ti >= nx - 1 or tj <= 0 or tj >= ny - 1:
                    continue
                rows[k] = row
                cols[k] = (ti - 1) * my + (tj - 1)
                vals[k] = cf[s]
                k += 1
    return rows[:k], cols[:k], vals[:k]


def _assemble_numpy(nx, ny, di, dj, cf):
    my = ny - 2
    i, j = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    row = (i - 1) * my + (j - 1)
    ti = i[None, :] + di[:, None]
    tj = j[None, :] + dj[:, None]
    ti = np.where(ti == -1, 1, np.where(ti == nx, nx - 2, ti))
    tj = np.where(tj == -1, 1, np.where(tj == ny, ny - 2, tj))
    ok = (ti > 0) & (ti < nx - 1) & (tj > 0) & (tj < ny - 1)
    rows = np.broadcast_to(row, ti.shape)[ok]
    cols = ((ti - 1) * my + (tj - 1))[ok]
    vals = np.broadcast_to(cf[:, None], ti.shape)[ok]
    # node-major order, matching the numba loop
    order = np.argsort(rows, kind="stable")
    return rows[order], cols[order], vals[order]


def assemble_biharmonic_numba(nx, ny, hx, hy):
    return _assemble_numba(int(nx), int(ny), *_stencil(hx, hy))


def assemble_biharmonic_numpy(nx, ny, hx, hy):
    return _assemble_numpy(int(nx), int(ny), *_stencil(hx, hy))


def assemble_biharmonic(nx, ny, hx, hy):
    """COO triplets of the clamped-plate biharmonic operator on interior nodes.

    Node (i, j), 1 <= i <= nx-2, maps to unknown ``(i-1)*(ny-2) + (j-1)``.
    Edge nodes are pinned at zero; the ghost row beyond each edge mirrors the
    first interior row, which imposes zero normal slope.
    """
    if USE_NUMBA:
        return assemble_biharmonic_numba(nx, ny, hx, hy)
    return assemble_biharmonic_numpy(nx, ny, hx, hy)


# --------------------------------------------------------------------------
# disc load rasterization
# --------------------------------------------------------------------------


@njit(cache=True)
def disc_load_fraction_numba(nx, ny, hx, hy, cx, cy, radius, sub):
    out = np.zeros((nx, ny))
    r2 = radius * radius
    inv = 1.0 / (sub * sub)
    for i in range(nx):
        x0 = i * hx - cx
        if abs(x0) - hx > radius:
            continue
        for j in range(ny):
            y0 = j * hy - cy
            if abs(y0) - hy > radius:
                continue
            cnt = 0
            for a in range(sub):
                x = x0 + ((a + 0.5) / sub - 0.5) * hx
                for b in range(sub):
                    y = y0 + ((b + 0.5) / sub - 0.5) * hy
                    if x * x + y * y <= r2:
                        cnt += 1
            out[i, j] = cnt * inv
    return out


def disc_load_fraction_numpy(nx, ny, hx, hy, cx, cy, radius, sub):
    out = np.zeros((nx, ny))
    s = (np.arange(sub) + 0.5) / sub - 0.5
    xc = np.arange(nx) * hx - cx
    yc = np.arange(ny) * hy - cy
    cols = np.flatnonzero(np.abs(yc) - hy <= radius)
    if cols.size == 0:
        return out
    y2 = ((yc[cols][:, None] + s[None, :] * hy) ** 2)[None, :, :]  # (1, ncols, sub)
    r2 = radius * radius
    # one row of cells at a time keeps memory at ncols * sub * sub
    for i in np.flatnonzero(np.abs(xc) - hx <= radius):
        x2 = ((xc[i] + s * hx) ** 2)[:, None, None]  # (sub, 1, 1)
        out[i, cols] = np.count_nonzero(x2 + y2 <= r2, axis=(0, 2)) / (sub * sub)
    return out


def disc_load_fraction(nx, ny, hx, hy, cx, cy, radius, sub=32):
    """Fraction of each node's cell covered by a disc, by sub x sub sampling."""
    args = (int(nx), int(ny), float(hx), float(hy), float(cx), float(cy), float(radius), int(sub))
    if USE_NUMBA:
        return disc_load_fraction_numba(*args)
    return disc_load_fraction_numpy(*args)
