"""Compiled inner loops: the planar polygon engine, the axis-parallel box
engine and the split-tree section sums.

Cell ids follow the split tree: the window is cell 0 and facet ``k`` splits
one cell into children ``2k + 1`` (side ``<x, n> >= offset``) and ``2k + 2``.
"""
import numpy as np
from numba import njit

INV_PI = 1.0 / np.pi


@njit(cache=True)
def _grow1(a, n):
    out = np.empty(max(2 * a.shape[0], n), a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _grow2(a, n):
    out = np.empty((max(2 * a.shape[0], n),) + a.shape[1:], a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _heap_push(keys, vals, size, key, val):
    i = size
    keys[i] = key
    vals[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if keys[p] <= keys[i]:
            break
        keys[p], keys[i] = keys[i], keys[p]
        vals[p], vals[i] = vals[i], vals[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(keys, vals, size):
    key = keys[0]
    val = vals[0]
    size -= 1
    keys[0] = keys[size]
    vals[0] = vals[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        m = left
        if left + 1 < size and keys[left + 1] < keys[left]:
            m = left + 1
        if keys[i] <= keys[m]:
            break
        keys[m], keys[i] = keys[i], keys[m]
        vals[m], vals[i] = vals[i], vals[m]
        i = m
    return key, val, size


# planar polygons ---------------------------------------------------------------

@njit(cache=True)
def _polygon_capacity(px, py, start, count, isotropic, dirs, weights, scale):
    if isotropic:
        perim = 0.0
        for i in range(count):
            j = start + (i + 1) % count
            perim += np.hypot(px[j] - px[start + i], py[j] - py[start + i])
        return scale * perim * INV_PI
    total = 0.0
    for k in range(dirs.shape[0]):
        lo = np.inf
        hi = -np.inf
        for i in range(start, start + count):
            p = px[i] * dirs[k, 0] + py[i] * dirs[k, 1]
            lo = min(lo, p)
            hi = max(hi, p)
        total += weights[k] * (hi - lo)
    return scale * total


@njit(cache=True)
def _polygon_hitting_line(px, py, start, count, isotropic, dirs, weights, rng):
    if isotropic:
        perim = 0.0
        for i in range(count):
            j = start + (i + 1) % count
            perim += np.hypot(px[j] - px[start + i], py[j] - py[start + i])
        target = rng.random() * perim
        acc = 0.0
        e = count - 1
        for i in range(count):
            j = start + (i + 1) % count
            acc += np.hypot(px[j] - px[start + i], py[j] - py[start + i])
            if target < acc:
                e = i
                break
        a = start + e
        b = start + (e + 1) % count
        f = rng.random()
        x = px[a] + f * (px[b] - px[a])
        y = py[a] + f * (py[b] - py[a])
        theta = np.arctan2(py[b] - py[a], px[b] - px[a]) + np.arcsin(2.0 * rng.random() - 1.0)
        nx = np.cos(theta)
        ny = np.sin(theta)
        return nx, ny, x * nx + y * ny
    m = dirs.shape[0]
    lows = np.empty(m)
    spans = np.empty(m)
    total = 0.0
    for k in range(m):
        lo = np.inf
        hi = -np.inf
        for i in range(start, start + count):
            p = px[i] * dirs[k, 0] + py[i] * dirs[k, 1]
            lo = min(lo, p)
            hi = max(hi, p)
        lows[k] = lo
        spans[k] = hi - lo
        total += weights[k] * (hi - lo)
    target = rng.random() * total
    acc = 0.0
    k = m - 1
    for j in range(m):
        acc += weights[j] * spans[j]
        if target < acc:
            k = j
            break
    return dirs[k, 0], dirs[k, 1], lows[k] + rng.random() * spans[k]


@njit(cache=True)
def polygon_mnw(verts, starts, counts, ids, deaths, horizon, facet_base,
                isotropic, dirs, weights, scale, tol, rng):
    """Run the division process on planar convex polygons up to ``horizon``.

    The initial cells are ``verts[starts[i]:starts[i] + counts[i]]`` (counter
    clockwise) with ids ``ids`` and scheduled death times ``deaths``.
    """
    n0 = ids.shape[0]
    cap_v = max(8 * verts.shape[0], 4096)
    px = np.empty(cap_v)
    py = np.empty(cap_v)
    nv = 0
    cap_c = max(4 * n0, 1024)
    c_start = np.empty(cap_c, np.int64)
    c_count = np.empty(cap_c, np.int64)
    c_id = np.empty(cap_c, np.int64)
    c_death = np.empty(cap_c)
    hk = np.empty(cap_c)
    hv = np.empty(cap_c, np.int64)
    size = 0
    nc = 0
    for i in range(n0):
        c_start[nc] = nv
        c_count[nc] = counts[i]
        c_id[nc] = ids[i]
        c_death[nc] = deaths[i]
        for j in range(counts[i]):
            px[nv] = verts[starts[i] + j, 0]
            py[nv] = verts[starts[i] + j, 1]
            nv += 1
        size = _heap_push(hk, hv, size, deaths[i], nc)
        nc += 1

    cap_f = 1024
    f_cell = np.empty(cap_f, np.int64)
    f_birth = np.empty(cap_f)
    f_normal = np.empty((cap_f, 2))
    f_offset = np.empty(cap_f)
    f_ends = np.empty((cap_f, 2, 2))
    nf = 0
    redraws = 0
    s = np.empty(16)

    while size > 0:
        t, slot, size = _heap_pop(hk, hv, size)
        if t > horizon:
            size = _heap_push(hk, hv, size, t, slot)
            break
        start = c_start[slot]
        count = c_count[slot]
        if s.shape[0] < count:
            s = np.empty(2 * count)
        while True:
            nx, ny, off = _polygon_hitting_line(px, py, start, count, isotropic, dirs, weights, rng)
            pos = False
            neg = False
            for i in range(count):
                v = px[start + i] * nx + py[start + i] * ny - off
                if abs(v) <= tol:
                    v = 0.0
                s[i] = v
                pos = pos or v > 0.0
                neg = neg or v < 0.0
            if pos and neg:
                break
            redraws += 1

        need = nv + 2 * (count + 2)
        if need > px.shape[0]:
            px = _grow1(px, need)
            py = _grow1(py, need)
        # plus side first, then minus side
        p_start = nv
        for i in range(count):
            if s[i] >= 0.0:
                px[nv] = px[start + i]
                py[nv] = py[start + i]
                nv += 1
            j = (i + 1) % count
            if s[i] * s[j] < 0.0:
                lam = s[i] / (s[i] - s[j])
                px[nv] = px[start + i] + lam * (px[start + j] - px[start + i])
                py[nv] = py[start + i] + lam * (py[start + j] - py[start + i])
                nv += 1
        p_count = nv - p_start
        m_start = nv
        first = True
        ax = ay = bx = by = 0.0
        for i in range(count):
            if s[i] <= 0.0:
                px[nv] = px[start + i]
                py[nv] = py[start + i]
                nv += 1
            if s[i] == 0.0:
                if first:
                    ax, ay = px[start + i], py[start + i]
                    first = False
                bx, by = px[start + i], py[start + i]
            j = (i + 1) % count
            if s[i] * s[j] < 0.0:
                lam = s[i] / (s[i] - s[j])
                qx = px[start + i] + lam * (px[start + j] - px[start + i])
                qy = py[start + i] + lam * (py[start + j] - py[start + i])
                px[nv] = qx
                py[nv] = qy
                nv += 1
                if first:
                    ax, ay = qx, qy
                    first = False
                bx, by = qx, qy
        m_count = nv - m_start

        if nf >= f_cell.shape[0]:
            f_cell = _grow1(f_cell, nf + 1)
            f_birth = _grow1(f_birth, nf + 1)
            f_normal = _grow2(f_normal, nf + 1)
            f_offset = _grow1(f_offset, nf + 1)
            f_ends = _grow2(f_ends, nf + 1)
        k = facet_base + nf
        f_cell[nf] = c_id[slot]
        f_birth[nf] = t
        f_normal[nf, 0] = nx
        f_normal[nf, 1] = ny
        f_offset[nf] = off
        f_ends[nf, 0, 0] = ax
        f_ends[nf, 0, 1] = ay
        f_ends[nf, 1, 0] = bx
        f_ends[nf, 1, 1] = by
        nf += 1

        if nc + 2 > c_start.shape[0]:
            c_start = _grow1(c_start, nc + 2)
            c_count = _grow1(c_count, nc + 2)
            c_id = _grow1(c_id, nc + 2)
            c_death = _grow1(c_death, nc + 2)
            hk = _grow1(hk, nc + 2)
            hv = _grow1(hv, nc + 2)
        for child in range(2):
            cs = p_start if child == 0 else m_start
            cn = p_count if child == 0 else m_count
            c_start[nc] = cs
            c_count[nc] = cn
            c_id[nc] = 2 * k + 1 + child
            rate = _polygon_capacity(px, py, cs, cn, isotropic, dirs, weights, scale)
            c_death[nc] = t + rng.exponential() / rate
            size = _heap_push(hk, hv, size, c_death[nc], nc)
            nc += 1

    leaf_slots = hv[:size].copy()
    order = np.argsort(c_id[leaf_slots])
    leaf_slots = leaf_slots[order]
    n_leaf = leaf_slots.shape[0]
    leaf_ids = np.empty(n_leaf, np.int64)
    leaf_deaths = np.empty(n_leaf)
    leaf_starts = np.empty(n_leaf + 1, np.int64)
    total = 0
    for i in range(n_leaf):
        leaf_starts[i] = total
        total += c_count[leaf_slots[i]]
    leaf_starts[n_leaf] = total
    leaf_verts = np.empty((total, 2))
    for i in range(n_leaf):
        sl = leaf_slots[i]
        leaf_ids[i] = c_id[sl]
        leaf_deaths[i] = c_death[sl]
        for j in range(c_count[sl]):
            leaf_verts[leaf_starts[i] + j, 0] = px[c_start[sl] + j]
            leaf_verts[leaf_starts[i] + j, 1] = py[c_start[sl] + j]
    return (f_cell[:nf].copy(), f_birth[:nf].copy(), f_normal[:nf].copy(),
            f_offset[:nf].copy(), f_ends[:nf].copy(), leaf_ids, leaf_deaths,
            leaf_verts, leaf_starts, redraws)


# axis-parallel boxes -------------------------------------------------------------

@njit(cache=True)
def box_mnw(lo0, hi0, ids, deaths, horizon, facet_base, rates, tol, rng):
    """Run the division process on boxes for an axis-parallel measure."""
    n0, d = lo0.shape
    cap_c = max(4 * n0, 1024)
    c_lo = np.empty((cap_c, d))
    c_hi = np.empty((cap_c, d))
    c_id = np.empty(cap_c, np.int64)
    c_death = np.empty(cap_c)
    hk = np.empty(cap_c)
    hv = np.empty(cap_c, np.int64)
    size = 0
    for i in range(n0):
        c_lo[i] = lo0[i]
        c_hi[i] = hi0[i]
        c_id[i] = ids[i]
        c_death[i] = deaths[i]
        size = _heap_push(hk, hv, size, deaths[i], i)
    nc = n0

    cap_f = 1024
    f_cell = np.empty(cap_f, np.int64)
    f_birth = np.empty(cap_f)
    f_axis = np.empty(cap_f, np.int64)
    f_offset = np.empty(cap_f)
    f_lo = np.empty((cap_f, d))
    f_hi = np.empty((cap_f, d))
    nf = 0
    redraws = 0
    ext = np.empty(d)

    while size > 0:
        t, slot, size = _heap_pop(hk, hv, size)
        if t > horizon:
            size = _heap_push(hk, hv, size, t, slot)
            break
        total = 0.0
        for j in range(d):
            ext[j] = c_hi[slot, j] - c_lo[slot, j]
            total += rates[j] * ext[j]
        while True:
            target = rng.random() * total
            acc = 0.0
            axis = d - 1
            for j in range(d):
                acc += rates[j] * ext[j]
                if target < acc:
                    axis = j
                    break
            cut = c_lo[slot, axis] + rng.random() * ext[axis]
            if cut - c_lo[slot, axis] > tol and c_hi[slot, axis] - cut > tol:
                break
            redraws += 1

        if nf >= f_cell.shape[0]:
            f_cell = _grow1(f_cell, nf + 1)
            f_birth = _grow1(f_birth, nf + 1)
            f_axis = _grow1(f_axis, nf + 1)
            f_offset = _grow1(f_offset, nf + 1)
            f_lo = _grow2(f_lo, nf + 1)
            f_hi = _grow2(f_hi, nf + 1)
        k = facet_base + nf
        f_cell[nf] = c_id[slot]
        f_birth[nf] = t
        f_axis[nf] = axis
        f_offset[nf] = cut
        f_lo[nf] = c_lo[slot]
        f_hi[nf] = c_hi[slot]
        nf += 1

        if nc + 2 > c_id.shape[0]:
            c_lo = _grow2(c_lo, nc + 2)
            c_hi = _grow2(c_hi, nc + 2)
            c_id = _grow1(c_id, nc + 2)
            c_death = _grow1(c_death, nc + 2)
            hk = _grow1(hk, nc + 2)
            hv = _grow1(hv, nc + 2)
        for child in range(2):
            c_lo[nc] = c_lo[slot]
            c_hi[nc] = c_hi[slot]
            if child == 0:
                c_lo[nc, axis] = cut
            else:
                c_hi[nc, axis] = cut
            c_id[nc] = 2 * k + 1 + child
            rate = 0.0
            for j in range(d):
                rate += rates[j] * (c_hi[nc, j] - c_lo[nc, j])
            c_death[nc] = t + rng.exponential() / rate
            size = _heap_push(hk, hv, size, c_death[nc], nc)
            nc += 1

    leaf_slots = hv[:size].copy()
    leaf_slots = leaf_slots[np.argsort(c_id[leaf_slots])]
    return (f_cell[:nf].copy(), f_birth[:nf].copy(), f_axis[:nf].copy(),
            f_offset[:nf].copy(), f_lo[:nf].copy(), f_hi[:nf].copy(),
            c_id[leaf_slots], c_death[leaf_slots], c_lo[leaf_slots], c_hi[leaf_slots],
            redraws)


@njit(cache=True)
def box_surface_totals(lo, hi, rates, horizons, rng):
    """Total facet (d-1)-volume at each horizon for independent box runs.

    Lean path for replicated experiments: no facet geometry is kept.
    ``horizons`` must be ascending; returns one total per horizon.
    """
    d = lo.shape[0]
    out = np.zeros(horizons.shape[0])
    horizon = horizons[-1]
    cap = 1024
    c_lo = np.empty((cap, d))
    c_hi = np.empty((cap, d))
    hk = np.empty(cap)
    hv = np.empty(cap, np.int64)
    c_lo[0] = lo
    c_hi[0] = hi
    nc = 1
    rate = 0.0
    for j in range(d):
        rate += rates[j] * (hi[j] - lo[j])
    size = _heap_push(hk, hv, 0, rng.exponential() / rate, 0)
    ext = np.empty(d)
    while size > 0:
        t, slot, size = _heap_pop(hk, hv, size)
        if t > horizon:
            break
        total = 0.0
        for j in range(d):
            ext[j] = c_hi[slot, j] - c_lo[slot, j]
            total += rates[j] * ext[j]
        target = rng.random() * total
        acc = 0.0
        axis = d - 1
        for j in range(d):
            acc += rates[j] * ext[j]
            if target < acc:
                axis = j
                break
        cut = c_lo[slot, axis] + rng.random() * ext[axis]
        area = 1.0
        for j in range(d):
            if j != axis:
                area *= ext[j]
        for h in range(horizons.shape[0]):
            if t <= horizons[h]:
                out[h] += area
        # the plus child reuses the dead slot
        if nc + 1 > c_lo.shape[0]:
            c_lo = _grow2(c_lo, nc + 1)
            c_hi = _grow2(c_hi, nc + 1)
            hk = _grow1(hk, nc + 1)
            hv = _grow1(hv, nc + 1)
        other = nc
        nc += 1
        c_lo[other] = c_lo[slot]
        c_hi[other] = c_hi[slot]
        c_hi[other, axis] = cut
        c_lo[slot, axis] = cut
        for child in (slot, other):
            r = 0.0
            for j in range(d):
                r += rates[j] * (c_hi[child, j] - c_lo[child, j])
            size = _heap_push(hk, hv, size, t + rng.exponential() / r, child)
    return out


# sections of the split tree ---------------------------------------------------

@njit(cache=True)
def _line_window(px, py, dx, dy, win_a, win_b):
    lo = -np.inf
    hi = np.inf
    for i in range(win_a.shape[0]):
        # a.(p + lam d) <= b
        c = win_b[i] - (win_a[i, 0] * px + win_a[i, 1] * py)
        g = win_a[i, 0] * dx + win_a[i, 1] * dy
        if abs(g) < 1e-300:
            if c < 0.0:
                return 0.0, 0.0
            continue
        r = c / g
        if g > 0.0:
            hi = min(hi, r)
        else:
            lo = max(lo, r)
    if hi <= lo:
        return 0.0, 0.0
    return lo, hi


@njit(cache=True)
def section_line_sums(h_normals, h_offsets, win_a, win_b, split_of, f_normals, f_offsets):
    """Per line: number of section cells, total length, sum of squared lengths."""
    m = h_normals.shape[0]
    out = np.zeros((m, 3))
    cap = 256
    st_c = np.empty(cap, np.int64)
    st_lo = np.empty(cap)
    st_hi = np.empty(cap)
    n_ids = split_of.shape[0]
    for h in range(m):
        nx = h_normals[h, 0]
        ny = h_normals[h, 1]
        px = h_offsets[h] * nx
        py = h_offsets[h] * ny
        dx = -ny
        dy = nx
        a, b = _line_window(px, py, dx, dy, win_a, win_b)
        if b <= a:
            continue
        top = 0
        st_c[0] = 0
        st_lo[0] = a
        st_hi[0] = b
        top = 1
        while top > 0:
            top -= 1
            c = st_c[top]
            lo = st_lo[top]
            hi = st_hi[top]
            k = split_of[c] if c < n_ids else -1
            if k < 0:
                length = hi - lo
                out[h, 0] += 1.0
                out[h, 1] += length
                out[h, 2] += length * length
                continue
            alpha = px * f_normals[k, 0] + py * f_normals[k, 1] - f_offsets[k]
            beta = dx * f_normals[k, 0] + dy * f_normals[k, 1]
            if top + 2 > st_c.shape[0]:
                st_c = _grow1(st_c, top + 2)
                st_lo = _grow1(st_lo, top + 2)
                st_hi = _grow1(st_hi, top + 2)
            if beta == 0.0:
                st_c[top] = 2 * k + 1 if alpha >= 0.0 else 2 * k + 2
                st_lo[top] = lo
                st_hi[top] = hi
                top += 1
                continue
            root = -alpha / beta
            if beta > 0.0:
                p_lo, p_hi, m_lo, m_hi = max(lo, root), hi, lo, min(hi, root)
            else:
                p_lo, p_hi, m_lo, m_hi = lo, min(hi, root), max(lo, root), hi
            if p_hi > p_lo:
                st_c[top] = 2 * k + 1
                st_lo[top] = p_lo
                st_hi[top] = p_hi
                top += 1
            if m_hi > m_lo:
                st_c[top] = 2 * k + 2
                st_lo[top] = m_lo
                st_hi[top] = m_hi
                top += 1
    return out


@njit(cache=True)
def _clip_into(qx, qy, start, count, c0, cx, cy, sign, tol, out_at):
    # keep sign * (c0 + cx x + cy y) >= 0, writing at out_at; returns count
    n = 0
    for i in range(count):
        j = (i + 1) % count
        si = sign * (c0 + cx * qx[start + i] + cy * qy[start + i])
        sj = sign * (c0 + cx * qx[start + j] + cy * qy[start + j])
        if abs(si) <= tol:
            si = 0.0
        if abs(sj) <= tol:
            sj = 0.0
        if si >= 0.0:
            qx[out_at + n] = qx[start + i]
            qy[out_at + n] = qy[start + i]
            n += 1
        if si * sj < 0.0:
            lam = si / (si - sj)
            qx[out_at + n] = qx[start + i] + lam * (qx[start + j] - qx[start + i])
            qy[out_at + n] = qy[start + i] + lam * (qy[start + j] - qy[start + i])
            n += 1
    return n


@njit(cache=True)
def _loop_area(qx, qy, start, count):
    acc = 0.0
    for i in range(count):
        j = start + (i + 1) % count
        acc += qx[start + i] * qy[j] - qy[start + i] * qx[j]
    return 0.5 * abs(acc)


@njit(cache=True)
def section_plane_sums(h_normals, h_offsets, e1s, e2s, win_a, win_b, bound,
                       split_of, f_normals, f_offsets, tol):
    """Per plane: number of section cells, total area, sum of squared areas."""
    m = h_normals.shape[0]
    out = np.zeros((m, 3))
    cap = 4096
    qx = np.empty(cap)
    qy = np.empty(cap)
    st_c = np.empty(256, np.int64)
    st_s = np.empty(256, np.int64)
    st_n = np.empty(256, np.int64)
    n_ids = split_of.shape[0]
    big = 2.0 * bound + 1.0
    for h in range(m):
        o0 = h_offsets[h] * h_normals[h, 0]
        o1 = h_offsets[h] * h_normals[h, 1]
        o2 = h_offsets[h] * h_normals[h, 2]
        e1 = e1s[h]
        e2 = e2s[h]
        qx[0], qy[0] = -big, -big
        qx[1], qy[1] = big, -big
        qx[2], qy[2] = big, big
        qx[3], qy[3] = -big, big
        start = 0
        count = 4
        top = 4
        for i in range(win_a.shape[0]):
            a = win_a[i]
            c0 = win_b[i] - (a[0] * o0 + a[1] * o1 + a[2] * o2)
            cx = -(a[0] * e1[0] + a[1] * e1[1] + a[2] * e1[2])
            cy = -(a[0] * e2[0] + a[1] * e2[1] + a[2] * e2[2])
            if top + 2 * count + 2 > qx.shape[0]:
                qx = _grow1(qx, top + 2 * count + 2)
                qy = _grow1(qy, top + 2 * count + 2)
            n = _clip_into(qx, qy, start, count, c0, cx, cy, 1.0, tol, top)
            start = top
            count = n
            top += n
            if count < 3:
                break
        if count < 3 or _loop_area(qx, qy, start, count) <= tol * tol:
            continue
        sp = 1
        st_c[0] = 0
        st_s[0] = start
        st_n[0] = count
        while sp > 0:
            sp -= 1
            c = st_c[sp]
            s0 = st_s[sp]
            cnt = st_n[sp]
            k = split_of[c] if c < n_ids else -1
            if k < 0:
                area = _loop_area(qx, qy, s0, cnt)
                out[h, 0] += 1.0
                out[h, 1] += area
                out[h, 2] += area * area
                continue
            fn = f_normals[k]
            c0 = o0 * fn[0] + o1 * fn[1] + o2 * fn[2] - f_offsets[k]
            cx = e1[0] * fn[0] + e1[1] * fn[1] + e1[2] * fn[2]
            cy = e2[0] * fn[0] + e2[1] * fn[1] + e2[2] * fn[2]
            pos = False
            neg = False
            for i in range(s0, s0 + cnt):
                v = c0 + cx * qx[i] + cy * qy[i]
                if v > tol:
                    pos = True
                elif v < -tol:
                    neg = True
            if sp + 2 > st_c.shape[0]:
                st_c = _grow1(st_c, sp + 2)
                st_s = _grow1(st_s, sp + 2)
                st_n = _grow1(st_n, sp + 2)
            if not neg or not pos:
                st_c[sp] = 2 * k + 1 if not neg else 2 * k + 2
                st_s[sp] = s0
                st_n[sp] = cnt
                sp += 1
                continue
            if top + 2 * cnt + 4 > qx.shape[0]:
                qx = _grow1(qx, top + 2 * cnt + 4)
                qy = _grow1(qy, top + 2 * cnt + 4)
            for child in range(2):
                sign = 1.0 if child == 0 else -1.0
                n = _clip_into(qx, qy, s0, cnt, c0, cx, cy, sign, tol, top)
                if n >= 3:
                    st_c[sp] = 2 * k + 1 + child
                    st_s[sp] = top
                    st_n[sp] = n
                    sp += 1
                    top += n
    return out
