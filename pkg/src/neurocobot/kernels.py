"""Hot numeric kernels, written loop-style so numba can compile them.

Everything here is called per 8 ms simulation step, hundreds of thousands of
times per session. The functions take plain float64 arrays and scalars only;
:func:`neurocobot.accel.maybe_jit` decides between numba and the pure-numpy
fallback at import time.
"""

import numpy as np

from .accel import maybe_jit


@maybe_jit
def dh_chain(dh_a, dh_alpha, dh_d, dh_theta0, q):
    """Forward pass over a standard Denavit-Hartenberg chain.

    Returns (origins, z_axes, R) where origins[i] / z_axes[i] describe frame i
    (i = 0 is the base) and R is the final 3x3 rotation. origins has n+1 rows;
    the last row is the end-effector position.
    """
    n = q.shape[0]
    origins = np.zeros((n + 1, 3))
    z_axes = np.zeros((n + 1, 3))
    z_axes[0, 2] = 1.0
    T = np.eye(4)
    for i in range(n):
        theta = q[i] + dh_theta0[i]
        ct = np.cos(theta)
        st = np.sin(theta)
        ca = np.cos(dh_alpha[i])
        sa = np.sin(dh_alpha[i])
        A = np.empty((4, 4))
        A[0, 0] = ct
        A[0, 1] = -st * ca
        A[0, 2] = st * sa
        A[0, 3] = dh_a[i] * ct
        A[1, 0] = st
        A[1, 1] = ct * ca
        A[1, 2] = -ct * sa
        A[1, 3] = dh_a[i] * st
        A[2, 0] = 0.0
        A[2, 1] = sa
        A[2, 2] = ca
        A[2, 3] = dh_d[i]
        A[3, 0] = 0.0
        A[3, 1] = 0.0
        A[3, 2] = 0.0
        A[3, 3] = 1.0
        T = T @ A
        for k in range(3):
            origins[i + 1, k] = T[k, 3]
            z_axes[i + 1, k] = T[k, 2]
    return origins, z_axes, T[:3, :3].copy()


@maybe_jit
def position_jacobian(dh_a, dh_alpha, dh_d, dh_theta0, q, task_dims):
    """Geometric position Jacobian (task_dims x n) for revolute joints."""
    n = q.shape[0]
    origins, z_axes, _ = dh_chain(dh_a, dh_alpha, dh_d, dh_theta0, q)
    J = np.zeros((task_dims, n))
    pe = origins[n]
    for i in range(n):
        zx = z_axes[i, 0]
        zy = z_axes[i, 1]
        zz = z_axes[i, 2]
        rx = pe[0] - origins[i, 0]
        ry = pe[1] - origins[i, 1]
        rz = pe[2] - origins[i, 2]
        J[0, i] = zy * rz - zz * ry
        J[1, i] = zz * rx - zx * rz
        if task_dims > 2:
            J[2, i] = zx * ry - zy * rx
    return J


@maybe_jit
def jacobi_eigvals(A_in, tol):
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm drops below ``tol``.
    Intended for n <= 6.
    """
    A = A_in.copy()
    n = A.shape[0]
    for _ in range(60):
        off = 0.0
        for p in range(n - 1):
            for r in range(p + 1, n):
                off += 2.0 * A[p, r] * A[p, r]
        if np.sqrt(off) < tol:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = A[p, r]
                if abs(apr) < 1e-300:
                    continue
                tau = (A[r, r] - A[p, p]) / (2.0 * apr)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akr = A[k, r]
                    A[k, p] = c * akp - s * akr
                    A[k, r] = s * akp + c * akr
                for k in range(n):
                    apk = A[p, k]
                    ark = A[r, k]
                    A[p, k] = c * apk - s * ark
                    A[r, k] = s * apk + c * ark
    vals = np.empty(n)
    for i in range(n):
        vals[i] = A[i, i]
    return vals


@maybe_jit
def singular_values(J, tol):
    """Descending singular values of J via Jacobi on the smaller Gram matrix."""
    m = J.shape[0]
    n = J.shape[1]
    if m <= n:
        G = J @ J.T
    else:
        G = J.T @ J
    vals = jacobi_eigvals(G, tol)
    k = G.shape[0]
    out = np.empty(k)
    for i in range(k):
        v = vals[i]
        out[i] = np.sqrt(v) if v > 0.0 else 0.0
    out[::-1].sort()
    return out


@maybe_jit
def solve_spd(Ain, bin_):
    """Gaussian elimination with partial pivoting for tiny systems (n <= 3)."""
    n = Ain.shape[0]
    A = Ain.copy()
    b = bin_.copy()
    for col in range(n):
        piv = col
        best = abs(A[col, col])
        for r in range(col + 1, n):
            if abs(A[r, col]) > best:
                best = abs(A[r, col])
                piv = r
        if piv != col:
            for k in range(n):
                tmp = A[col, k]
                A[col, k] = A[piv, k]
                A[piv, k] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        inv = 1.0 / A[col, col]
        for r in range(col + 1, n):
            f = A[r, col] * inv
            if f != 0.0:
                for k in range(col, n):
                    A[r, k] -= f * A[col, k]
                b[r] -= f * b[col]
    x = np.zeros(n)
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for k in range(r + 1, n):
            acc -= A[r, k] * x[k]
        x[r] = acc / A[r, r]
    return x


@maybe_jit
def dls_qdot(J, v_task, dls_lambda):
    """Damped-least-squares joint velocity: J^T (J J^T + lambda^2 I)^-1 v."""
    m = J.shape[0]
    G = J @ J.T
    for i in range(m):
        G[i, i] += dls_lambda * dls_lambda
    y = solve_spd(G, v_task)
    return J.T @ y
