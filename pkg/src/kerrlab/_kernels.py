"""Compiled numerical kernels: Kerr-star metric, partials, geodesic flow.

Index order is (t*, r, theta, phi*) in the polar chart and (t*, r, x, y) in
the axis charts, with x = sin(theta) cos(phi*), y = sin(theta) sin(phi*).
Chart codes: 0 polar, 1 north axis chart (cos theta > 0), -1 south axis chart.
"""

import math

import numpy as np
from numba import njit

POLAR = 0
NORTH = 1
SOUTH = -1

EV_TURNING_R = 0
EV_TURNING_THETA = 1
EV_HORIZON = 2
EV_SINGULARITY = 3
EV_ESCAPE = 4
EV_HORIZON_APPROACH = 5

STATUS_OK = 0
STATUS_TERMINATED = 1
STATUS_STEP_FAILURE = 2
STATUS_MAX_STEPS = 3


@njit(cache=True)
def star_metric(a, M, r, th, g, dgr, dgth):
    """Covariant Kerr-star metric and its r- and theta-partials (in place)."""
    s = math.sin(th)
    c = math.cos(th)
    S = s * s
    sc = s * c
    a2 = a * a
    rho2 = r * r + a2 * c * c
    rho4 = rho2 * rho2
    ra2 = r * r + a2
    for i in range(4):
        for j in range(4):
            g[i, j] = 0.0
            dgr[i, j] = 0.0
            dgth[i, j] = 0.0

    g[0, 0] = -1.0 + 2.0 * M * r / rho2
    g[0, 1] = 1.0
    g[0, 3] = -2.0 * M * a * r * S / rho2
    g[1, 3] = -a * S
    g[2, 2] = rho2
    g[3, 3] = ra2 * S + 2.0 * M * r * a2 * S * S / rho2

    q = (rho2 - 2.0 * r * r) / rho4
    dgr[0, 0] = 2.0 * M * q
    dgr[0, 3] = -2.0 * M * a * S * q
    dgr[2, 2] = 2.0 * r
    dgr[3, 3] = 2.0 * r * S + 2.0 * M * a2 * S * S * q

    dgth[0, 0] = 4.0 * M * r * a2 * sc / rho4
    dgth[0, 3] = -4.0 * M * a * r * sc * ra2 / rho4
    dgth[1, 3] = -2.0 * a * sc
    dgth[2, 2] = -2.0 * a2 * sc
    dgth[3, 3] = 2.0 * sc * (ra2 + 2.0 * M * r * a2 * S * (rho2 + ra2) / rho4)

    for i in range(4):
        for j in range(i):
            g[i, j] = g[j, i]
            dgr[i, j] = dgr[j, i]
            dgth[i, j] = dgth[j, i]


@njit(cache=True)
def star_inverse(a, M, r, th, gi):
    """Contravariant Kerr-star metric (closed form)."""
    s = math.sin(th)
    c = math.cos(th)
    S = s * s
    a2 = a * a
    rho2 = r * r + a2 * c * c
    for i in range(4):
        for j in range(4):
            gi[i, j] = 0.0
    gi[0, 0] = a2 * S / rho2
    gi[0, 1] = (r * r + a2) / rho2
    gi[0, 3] = a / rho2
    gi[1, 1] = (r * r - 2.0 * M * r + a2) / rho2
    gi[1, 3] = a / rho2
    gi[2, 2] = 1.0 / rho2
    gi[3, 3] = 1.0 / (rho2 * S)
    gi[1, 0] = gi[0, 1]
    gi[3, 0] = gi[0, 3]
    gi[3, 1] = gi[1, 3]


@njit(cache=True)
def axis_metric(a, M, r, x, y, g, dg):
    """Metric in an axis chart and its partials dg[k] along (r, x, y).

    Regular on the rotation axis: sin^2(theta) d(phi) is replaced by
    x dy - y dx and the sphere metric by its (x, y) form.
    """
    a2 = a * a
    w2 = x * x + y * y
    c2 = 1.0 - w2
    rho2 = r * r + a2 * c2
    rho4 = rho2 * rho2
    f = r / rho2
    h = rho2 / c2
    A = -1.0 + 2.0 * M * f
    B = -2.0 * M * a * f
    C = a2 * (1.0 + 2.0 * M * f)
    om0 = -y
    om1 = x

    for i in range(4):
        for j in range(4):
            g[i, j] = 0.0
            for k in range(3):
                dg[k, i, j] = 0.0

    g[0, 0] = A
    g[0, 1] = 1.0
    g[0, 2] = B * om0
    g[0, 3] = B * om1
    g[1, 2] = -a * om0
    g[1, 3] = -a * om1
    g[2, 2] = C * om0 * om0 + rho2 + h * x * x
    g[2, 3] = C * om0 * om1 + h * x * y
    g[3, 3] = C * om1 * om1 + rho2 + h * y * y

    # partials of the scalar building blocks along k = r, x, y
    f_k = ((rho2 - 2.0 * r * r) / rho4, 2.0 * a2 * x * r / rho4, 2.0 * a2 * y * r / rho4)
    rho2_k = (2.0 * r, -2.0 * a2 * x, -2.0 * a2 * y)
    h_k = (2.0 * r / c2, 2.0 * x * r * r / (c2 * c2), 2.0 * y * r * r / (c2 * c2))
    # d(omega)/dk and d(e)/dk with e = (x, y)
    dom = ((0.0, 0.0), (0.0, 1.0), (-1.0, 0.0))
    de = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    om = (om0, om1)
    e = (x, y)
    for k in range(3):
        fk = f_k[k]
        dg[k, 0, 0] = 2.0 * M * fk
        for i in range(2):
            dg[k, 0, 2 + i] = -2.0 * M * a * (fk * om[i] + f * dom[k][i])
            dg[k, 1, 2 + i] = -a * dom[k][i]
            for j in range(2):
                v = 2.0 * M * a2 * fk * om[i] * om[j]
                v += C * (dom[k][i] * om[j] + om[i] * dom[k][j])
                v += h_k[k] * e[i] * e[j] + h * (de[k][i] * e[j] + e[i] * de[k][j])
                if i == j:
                    v += rho2_k[k]
                dg[k, 2 + i, 2 + j] = v

    for i in range(4):
        for j in range(i):
            g[i, j] = g[j, i]
            for k in range(3):
                dg[k, i, j] = dg[k, j, i]


@njit(cache=True)
def _solve4(A, b, out):
    # Gaussian elimination with partial pivoting on copies.
    m = np.empty((4, 5))
    for i in range(4):
        for j in range(4):
            m[i, j] = A[i, j]
        m[i, 4] = b[i]
    for col in range(4):
        piv = col
        best = abs(m[col, col])
        for i in range(col + 1, 4):
            if abs(m[i, col]) > best:
                best = abs(m[i, col])
                piv = i
        if piv != col:
            for j in range(5):
                tmp = m[col, j]
                m[col, j] = m[piv, j]
                m[piv, j] = tmp
        for i in range(col + 1, 4):
            fac = m[i, col] / m[col, col]
            for j in range(col, 5):
                m[i, j] -= fac * m[col, j]
    for i in range(3, -1, -1):
        acc = m[i, 4]
        for j in range(i + 1, 4):
            acc -= m[i, j] * out[j]
        out[i] = acc / m[i, i]


@njit(cache=True)
def geodesic_rhs(chart, a, M, y, out):
    """Right-hand side of the first-order form of the geodesic equation."""
    v = y[4:8]
    F = np.zeros(4)
    acc = np.empty(4)
    if chart == POLAR:
        g = np.empty((4, 4))
        dgr = np.empty((4, 4))
        dgth = np.empty((4, 4))
        gi = np.empty((4, 4))
        star_metric(a, M, y[1], y[2], g, dgr, dgth)
        star_inverse(a, M, y[1], y[2], gi)
        vr = v[1]
        vth = v[2]
        qr = 0.0
        qth = 0.0
        for i in range(4):
            for j in range(4):
                qr += v[i] * dgr[i, j] * v[j]
                qth += v[i] * dgth[i, j] * v[j]
        for d in range(4):
            acc_d = 0.0
            for j in range(4):
                acc_d += (vr * dgr[d, j] + vth * dgth[d, j]) * v[j]
            F[d] = acc_d
        F[1] -= 0.5 * qr
        F[2] -= 0.5 * qth
        for i in range(4):
            s_ = 0.0
            for j in range(4):
                s_ += gi[i, j] * F[j]
            acc[i] = -s_
    else:
        g = np.empty((4, 4))
        dg = np.empty((3, 4, 4))
        axis_metric(a, M, y[1], y[2], y[3], g, dg)
        for k in range(3):
            qk = 0.0
            for i in range(4):
                for j in range(4):
                    qk += v[i] * dg[k, i, j] * v[j]
            F[k + 1] -= 0.5 * qk
        for d in range(4):
            acc_d = 0.0
            for k in range(3):
                vk = v[k + 1]
                for j in range(4):
                    acc_d += vk * dg[k, d, j] * v[j]
            F[d] += acc_d
        _solve4(g, F, acc)
        for i in range(4):
            acc[i] = -acc[i]
    for i in range(4):
        out[i] = v[i]
        out[4 + i] = acc[i]


@njit(cache=True)
def state_constants(chart, a, M, y):
    """(E, L, q, K) of the tangent stored in ``y``; K uses an axis-regular form."""
    r = y[1]
    v = y[4:8]
    a2 = a * a
    g = np.empty((4, 4))
    if chart == POLAR:
        dgr = np.empty((4, 4))
        dgth = np.empty((4, 4))
        th = y[2]
        star_metric(a, M, r, th, g, dgr, dgth)
        s = math.sin(th)
        c = math.cos(th)
        S = s * s
        c2 = c * c
        Om = S * v[3]
        sig = v[2] * v[2] + S * v[3] * v[3]
        E = 0.0
        L = 0.0
        for j in range(4):
            E -= g[0, j] * v[j]
            L += g[3, j] * v[j]
    else:
        dg = np.empty((3, 4, 4))
        x = y[2]
        yy = y[3]
        axis_metric(a, M, r, x, yy, g, dg)
        S = x * x + yy * yy
        c2 = 1.0 - S
        Om = x * v[3] - yy * v[2]
        rad = x * v[2] + yy * v[3]
        sig = v[2] * v[2] + v[3] * v[3] + rad * rad / c2
        E = 0.0
        L = 0.0
        for j in range(4):
            E -= g[0, j] * v[j]
            L += (-yy * g[2, j] + x * g[3, j]) * v[j]
    q = 0.0
    for i in range(4):
        for j in range(4):
            q += v[i] * g[i, j] * v[j]
    rho2 = r * r + a2 * c2
    lam0 = -2.0 * M * a * r * v[0] / rho2 - a * v[1] + a2 * Om * (1.0 + 2.0 * M * r / rho2)
    K = rho2 * rho2 * sig + lam0 * (L + rho2 * Om) - 2.0 * a * L * E + a2 * S * E * E - q * a2 * c2
    return E, L, q, K


@njit(cache=True)
def polar_to_axis(y, hemi, out):
    th = y[2]
    ph = y[3]
    s = math.sin(th)
    c = math.cos(th)
    cp = math.cos(ph)
    sp = math.sin(ph)
    out[0] = y[0]
    out[1] = y[1]
    out[2] = s * cp
    out[3] = s * sp
    out[4] = y[4]
    out[5] = y[5]
    out[6] = c * cp * y[6] - s * sp * y[7]
    out[7] = c * sp * y[6] + s * cp * y[7]


@njit(cache=True)
def axis_to_polar(y, hemi, phi_ref, out):
    x = y[2]
    yy = y[3]
    w = math.sqrt(x * x + yy * yy)
    asw = math.asin(min(w, 1.0))
    c = math.sqrt(max(1.0 - w * w, 0.0))
    if hemi == NORTH:
        th = asw
    else:
        th = math.pi - asw
        c = -c
    ph = math.atan2(yy, x)
    ph += 2.0 * math.pi * round((phi_ref - ph) / (2.0 * math.pi))
    out[0] = y[0]
    out[1] = y[1]
    out[2] = th
    out[3] = ph
    out[4] = y[4]
    out[5] = y[5]
    out[6] = (x * y[6] + yy * y[7]) / (w * c)
    out[7] = (x * y[7] - yy * y[6]) / (w * w)


# Dormand-Prince 5(4) tableau
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


@njit(cache=True)
def dopri_step(chart, a, M, y, k1, h, ynew, k7, err):
    """One Dormand-Prince step; writes the 5th-order state, FSAL slope, error."""
    n = 8
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    tmp = np.empty(n)
    for i in range(n):
        tmp[i] = y[i] + h * A21 * k1[i]
    geodesic_rhs(chart, a, M, tmp, k2)
    for i in range(n):
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    geodesic_rhs(chart, a, M, tmp, k3)
    for i in range(n):
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    geodesic_rhs(chart, a, M, tmp, k4)
    for i in range(n):
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    geodesic_rhs(chart, a, M, tmp, k5)
    for i in range(n):
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    geodesic_rhs(chart, a, M, tmp, k6)
    for i in range(n):
        ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
    geodesic_rhs(chart, a, M, ynew, k7)
    for i in range(n):
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])


@njit(cache=True)
def _event_values(chart, a, M, y, sing_rho, escape_r, ev):
    r = y[1]
    ev[0] = y[5]
    if chart == POLAR:
        ev[1] = y[6]
        c = math.cos(y[2])
        c2 = c * c
    else:
        rad = y[2] * y[6] + y[3] * y[7]
        ev[1] = rad if chart == NORTH else -rad
        c2 = 1.0 - (y[2] * y[2] + y[3] * y[3])
    r_plus = M + math.sqrt((M - a) * (M + a))
    ev[2] = r - a * a / r_plus
    ev[3] = r - r_plus
    ev[4] = r * r + a * a * c2 - sing_rho * sing_rho
    ev[5] = escape_r - abs(r)


@njit(cache=True)
def _grow2(arr, n):
    out = np.empty((n, arr.shape[1]))
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _grow1(arr, n):
    out = np.empty(n, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def integrate_kernel(a, M, chart0, y0, s0, s_max, tol, h0, sing_rho, escape_r,
                     horizon_stop, max_steps, switch_in, switch_out, event_tol, atol_floor):
    """Adaptive DOPRI5 integration with event location and axis-chart switching.

    Returns sample arrays (s, chart, state, constants), event arrays
    (kind, s, chart, state, tag) and a status code.
    """
    cap = 1024
    S_s = np.empty(cap)
    S_chart = np.empty(cap, dtype=np.int64)
    S_y = np.empty((cap, 8))
    S_c = np.empty((cap, 4))
    ecap = 64
    V_kind = np.empty(ecap, dtype=np.int64)
    V_s = np.empty(ecap)
    V_chart = np.empty(ecap, dtype=np.int64)
    V_y = np.empty((ecap, 8))
    V_tag = np.empty(ecap)

    y = y0.copy()
    chart = chart0
    s = s0
    phi_ref = 0.0
    if chart == POLAR:
        phi_ref = y[3]
    n = 0
    ne = 0


    k1 = np.empty(8)
    k7 = np.empty(8)
    ynew = np.empty(8)
    err = np.empty(8)
    ytmp = np.empty(8)
    kt = np.empty(8)
    et = np.empty(8)
    ev_old = np.empty(6)
    ev_new = np.empty(6)
    ev_mid = np.empty(6)
    conv = np.empty(8)

    geodesic_rhs(chart, a, M, y, k1)
    E, L, q, K = state_constants(chart, a, M, y)
    E0 = E
    L0 = L
    S_s[0] = s
    S_chart[0] = chart
    S_y[0] = y
    S_c[0, 0] = E
    S_c[0, 1] = L
    S_c[0, 2] = q
    S_c[0, 3] = K
    n = 1
    _event_values(chart, a, M, y, sing_rho, escape_r, ev_old)

    h = h0
    status = STATUS_OK
    steps = 0
    done = False
    while not done:
        if steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        # never let one step carry r across more than half of rho, so a ray
        # aimed at the ring cannot jump over the singularity event
        if chart == POLAR:
            cth = math.cos(y[2])
            rho_now = math.sqrt(y[1] * y[1] + a * a * cth * cth)
        else:
            rho_now = math.sqrt(y[1] * y[1] + a * a * (1.0 - y[2] * y[2] - y[3] * y[3]))
        if h * abs(y[5]) > 0.5 * rho_now:
            h = 0.5 * rho_now / abs(y[5])
        if s + h > s_max:
            h = s_max - s
        if h < 1e-14 * max(1.0, abs(s)):
            status = STATUS_STEP_FAILURE
            break
        dopri_step(chart, a, M, y, k1, h, ynew, k7, err)
        en = 0.0
        finite = True
        for i in range(8):
            if not (math.isfinite(ynew[i]) and math.isfinite(err[i])):
                finite = False
            sc = atol_floor * tol + tol * max(abs(y[i]), abs(ynew[i]))
            en += (err[i] / sc) ** 2
        en = math.sqrt(en / 8.0)
        steps += 1
        if (not finite) or en > 1.0:
            if not finite:
                h *= 0.2
            else:
                h *= max(0.2, 0.9 * en ** -0.2)
            continue

        # locate events inside (s, s + h]
        _event_values(chart, a, M, ynew, sing_rho, escape_r, ev_new)
        terminal_tau = -1.0
        terminal_kind = -1
        for k in range(6):
            if ev_old[k] == 0.0 or ev_old[k] * ev_new[k] > 0.0:
                continue
            lo = 0.0
            hi = h
            while hi - lo > event_tol:
                mid = 0.5 * (lo + hi)
                dopri_step(chart, a, M, y, k1, mid, ytmp, kt, et)
                _event_values(chart, a, M, ytmp, sing_rho, escape_r, ev_mid)
                if ev_mid[k] * ev_old[k] > 0.0:
                    lo = mid
                else:
                    hi = mid
            dopri_step(chart, a, M, y, k1, hi, ytmp, kt, et)
            if k <= 1:
                kind = EV_TURNING_R if k == 0 else EV_TURNING_THETA
                tag = 1.0 if ev_new[k] > 0.0 else -1.0
            elif k <= 3:
                kind = EV_HORIZON
                tag = float(k - 2) + (0.5 if ev_new[k] > 0.0 else 0.0)
            elif k == 4:
                kind = EV_SINGULARITY
                tag = 0.0
            else:
                kind = EV_ESCAPE
                tag = 1.0 if ytmp[1] > 0.0 else -1.0
            if kind == EV_SINGULARITY or kind == EV_ESCAPE:
                if terminal_tau < 0.0 or hi < terminal_tau:
                    terminal_tau = hi
                    terminal_kind = kind
                continue
            if ne >= V_s.shape[0]:
                V_kind = _grow1(V_kind, 2 * ne)
                V_s = _grow1(V_s, 2 * ne)
                V_chart = _grow1(V_chart, 2 * ne)
                V_y = _grow2(V_y, 2 * ne)
                V_tag = _grow1(V_tag, 2 * ne)
            V_kind[ne] = kind
            V_s[ne] = s + hi
            V_chart[ne] = chart
            V_y[ne] = ytmp
            V_tag[ne] = tag
            ne += 1

        if terminal_tau >= 0.0:
            dopri_step(chart, a, M, y, k1, terminal_tau, ynew, k7, err)
            h_taken = terminal_tau
            # drop non-terminal events recorded past the terminal one
            keep = ne
            for i in range(ne):
                if V_s[i] > s + h_taken:
                    keep = min(keep, i)
            ne = keep
        else:
            h_taken = h

        s = s + h_taken
        for i in range(8):
            y[i] = ynew[i]
            k1[i] = k7[i]

        # A geodesic that meets a horizon in the direction this chart does not
        # cover (sign(dr/ds) = sign(P) while moving toward it) reaches it only
        # asymptotically in t*; stop once Delta is small.
        approach = False
        delta = y[1] * y[1] - 2.0 * M * y[1] + a * a
        if abs(delta) < horizon_stop * M * M:
            r_plus = M + math.sqrt((M - a) * (M + a))
            r_minus = a * a / r_plus
            r_h = r_plus if abs(y[1] - r_plus) < abs(y[1] - r_minus) else r_minus
            P = (y[1] * y[1] + a * a) * E0 - L0 * a
            approach = y[5] * P > 0.0 and y[5] * (r_h - y[1]) > 0.0
        if terminal_tau >= 0.0 or approach:
            if ne >= V_s.shape[0]:
                V_kind = _grow1(V_kind, 2 * ne + 1)
                V_s = _grow1(V_s, 2 * ne + 1)
                V_chart = _grow1(V_chart, 2 * ne + 1)
                V_y = _grow2(V_y, 2 * ne + 1)
                V_tag = _grow1(V_tag, 2 * ne + 1)
            V_kind[ne] = terminal_kind if terminal_tau >= 0.0 else EV_HORIZON_APPROACH
            V_s[ne] = s
            V_chart[ne] = chart
            V_y[ne] = y
            V_tag[ne] = 0.0
            ne += 1
            status = STATUS_TERMINATED
            done = True

        # axis chart switching (hysteresis between switch_in and switch_out)
        if not done:
            if chart == POLAR:
                th = y[2]
                if th < switch_in or th > math.pi - switch_in:
                    hemi = NORTH if th < 0.5 * math.pi else SOUTH
                    phi_ref = y[3]
                    polar_to_axis(y, hemi, conv)
                    chart = hemi
                    for i in range(8):
                        y[i] = conv[i]
                    geodesic_rhs(chart, a, M, y, k1)
            else:
                w = math.sqrt(y[2] * y[2] + y[3] * y[3])
                if w > math.sin(switch_out):
                    axis_to_polar(y, chart, phi_ref, conv)
                    chart = POLAR
                    for i in range(8):
                        y[i] = conv[i]
                    geodesic_rhs(chart, a, M, y, k1)

        E, L, q, K = state_constants(chart, a, M, y)
        if n >= S_s.shape[0]:
            S_s = _grow1(S_s, 2 * n)
            S_chart = _grow1(S_chart, 2 * n)
            S_y = _grow2(S_y, 2 * n)
            S_c = _grow2(S_c, 2 * n)
        S_s[n] = s
        S_chart[n] = chart
        S_y[n] = y
        S_c[n, 0] = E
        S_c[n, 1] = L
        S_c[n, 2] = q
        S_c[n, 3] = K
        n += 1
        _event_values(chart, a, M, y, sing_rho, escape_r, ev_old)

        if s >= s_max:
            done = True
        if not done:
            h = h_taken * min(5.0, max(0.2, 0.9 * max(en, 1e-10) ** -0.2))

    return (S_s[:n], S_chart[:n], S_y[:n], S_c[:n],
            V_kind[:ne], V_s[:ne], V_chart[:ne], V_y[:ne], V_tag[:ne], status)
