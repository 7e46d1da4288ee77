# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled chain kernel: per-sample scalar loop over scattering orders.

Same estimator and variate layout as kernels.numpy_backend (the reference
for semantics); agrees with it to floating-point reduction order.  See that
module's docstring for the conventions.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, expm1, log1p, sqrt, cos, sin, M_PI
from scipy.special.cython_special cimport erf as c_erf
from scipy.special.cython_special cimport ndtri as c_ndtri

cnp.import_array()

BACKEND_NAME = "compiled"

from .numpy_backend import run_fixed_path  # cold path shared with the fallback

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double complex ccos(double complex)
    double complex csin(double complex)
    double cabs(double complex)

DEF SQRT2 = 1.4142135623730951
DEF SQRT_PI_2 = 1.2533141373155003  # sqrt(pi/2)

# ---------------------------------------------------------------------------
# small dense helpers (flat row-major storage)
# ---------------------------------------------------------------------------

cdef inline void mat44_mul(const double complex* a, const double complex* b,
                           double complex* out) noexcept nogil:
    cdef int i, j, k
    cdef double complex acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc = acc + a[4 * i + k] * b[4 * k + j]
            out[4 * i + j] = acc


cdef inline void kron22(const double complex* a, const double complex* b,
                        double complex* out) noexcept nogil:
    # out[(2i+k)(2j+l)] = a[ij] * b[kl], matching np.kron
    cdef int i, j, k, l
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    out[4 * (2 * i + k) + (2 * j + l)] = a[2 * i + j] * b[2 * k + l]


cdef inline void conj22(const double complex* a, double complex* out) noexcept nogil:
    cdef int i
    for i in range(4):
        out[i] = a[i].conjugate()


cdef inline void dagger22(const double complex* a, double complex* out) noexcept nogil:
    out[0] = a[0].conjugate()
    out[1] = a[2].conjugate()
    out[2] = a[1].conjugate()
    out[3] = a[3].conjugate()


cdef inline void frame_for_dir(double ux, double uy, double uz,
                               double* f) noexcept nogil:
    # f[2*i + a]: column a of the (3, 2) transverse-frame block
    cdef double rho = sqrt(ux * ux + uy * uy)
    cdef double ca, sa, inv
    if rho > 1e-12:
        inv = 1.0 / rho
        ca = ux * inv
        sa = uy * inv
    else:
        ca = 1.0
        sa = 0.0
    f[0] = uz * ca
    f[2] = uz * sa
    f[4] = -rho
    f[1] = -sa
    f[3] = ca
    f[5] = 0.0


cdef inline void project_o(const double complex* o_hat, const double* f,
                           double complex* m) noexcept nogil:
    # m(2x2) = f^T o_hat f
    cdef int a, b, i, j
    cdef double complex acc
    for a in range(2):
        for b in range(2):
            acc = 0
            for i in range(3):
                for j in range(3):
                    acc = acc + f[2 * i + a] * o_hat[3 * i + j] * f[2 * j + b]
            m[2 * a + b] = acc


cdef inline void propagator_from_m(const double complex* m, double pref,
                                   double complex* x) noexcept nogil:
    # x = exp(i * pref * m) for a 2x2 via trace/traceless split
    cdef double complex p00 = pref * m[0]
    cdef double complex p01 = pref * m[1]
    cdef double complex p10 = pref * m[2]
    cdef double complex p11 = pref * m[3]
    cdef double complex tr = 0.5 * (p00 + p11)
    cdef double complex g00 = p00 - tr
    cdef double complex g11 = p11 - tr
    cdef double complex det = g00 * g11 - p01 * p10
    cdef double complex w = csqrt(-det)
    cdef double complex sc, cw, e0
    if cabs(w) < 1e-12:
        sc = 1.0
    else:
        sc = csin(w) / w
    cw = ccos(w)
    e0 = cexp(1j * tr)
    x[0] = e0 * (cw + 1j * sc * g00)
    x[1] = e0 * (1j * sc * p01)
    x[2] = e0 * (1j * sc * p10)
    x[3] = e0 * (cw + 1j * sc * g11)


cdef inline void vertex_project_left(const double* fa, const double* fb,
                                     const double complex* wr,
                                     double complex* v) noexcept nogil:
    # v(4x4) = [kron(fa, fb)]^T @ wr(9x4); fa, fb are (3, 2) frame blocks
    cdef int a1, a2, i1, i2, b, p, a
    cdef double complex acc
    cdef double lk
    for a1 in range(2):
        for a2 in range(2):
            a = 2 * a1 + a2
            for b in range(4):
                acc = 0
                for i1 in range(3):
                    for i2 in range(3):
                        p = 3 * i1 + i2
                        lk = fa[2 * i1 + a1] * fb[2 * i2 + a2]
                        acc = acc + lk * wr[4 * p + b]
                v[4 * a + b] = acc


cdef inline void vertex_right(const double complex* w9, const double* ea,
                              const double* eb, double complex* wr) noexcept nogil:
    # wr(9x4) = w9(9x9) @ kron(ea, eb); ea, eb are (3, 2) frame blocks
    cdef int p, q, j1, j2, b1, b2, b
    cdef double rk
    cdef double complex acc
    for p in range(9):
        for b1 in range(2):
            for b2 in range(2):
                b = 2 * b1 + b2
                acc = 0
                for j1 in range(3):
                    for j2 in range(3):
                        q = 3 * j1 + j2
                        rk = ea[2 * j1 + b1] * eb[2 * j2 + b2]
                        if rk != 0.0:
                            acc = acc + w9[9 * p + q] * rk
                wr[4 * p + b] = acc


cdef inline double sample_depth(double xi, double c_total, double sigma,
                                double* weight) noexcept nogil:
    cdef double a = sigma * c_total
    cdef double one_m = -expm1(-a)
    cdef double f, t
    if a > 1e-8:
        f = one_m / a
        t = -log1p(-xi * one_m) / sigma
    else:
        f = 1.0 - a / 2.0 + a * a / 6.0
        t = xi * c_total
    weight[0] = c_total * f * exp(sigma * t)
    return t


cdef inline double erfinv_clipped(double x) noexcept nogil:
    if x > 1.0 - 1e-15:
        x = 1.0 - 1e-15
    elif x < -1.0 + 1e-15:
        x = -1.0 + 1e-15
    return c_ndtri((x + 1.0) / 2.0) / SQRT2


# ---------------------------------------------------------------------------
# boundary contraction tables (filled at import from the shared definitions)
# ---------------------------------------------------------------------------

cdef double complex LB_L[4][4]
cdef double complex RB_L[4][4]
cdef double complex LB_C[4][4]
cdef double complex RB_C[4][4]


def _init_boundaries():
    from .numpy_backend import _LB_C, _LB_L, _RB_C, _RB_L

    cdef int c, a
    for c in range(4):
        for a in range(4):
            LB_L[c][a] = _LB_L[c, a]
            RB_L[c][a] = _RB_L[c, a]
            LB_C[c][a] = _LB_C[c, a]
            RB_C[c][a] = _RB_C[c, a]


_init_boundaries()


cdef inline void score_channels(const double complex* s,
                                const double complex lb[4][4],
                                const double complex rb[4][4],
                                double geow, double* out) noexcept nogil:
    cdef int c, a, b
    cdef double complex acc
    for c in range(4):
        acc = 0
        for a in range(4):
            for b in range(4):
                acc = acc + lb[c][a] * s[4 * a + b] * rb[c][b]
        out[c] = geow * acc.real


# ---------------------------------------------------------------------------
# main chunk loop
# ---------------------------------------------------------------------------


def run_steady_chunk(tables, uniforms, int max_order, bint attenuation=True):
    """Drop-in replacement for numpy_backend.run_steady_chunk."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] u_arr = np.ascontiguousarray(
        np.clip(uniforms, 1e-15, 1.0 - 1e-15)
    )
    cdef Py_ssize_t s_count = u_arr.shape[0]
    lad_np = np.zeros((s_count, max_order, 4))
    cro_np = np.zeros((s_count, max_order, 4))
    if tables.dark:
        return lad_np, cro_np

    cdef cnp.ndarray[cnp.complex128_t, ndim=2] o_hat = np.ascontiguousarray(tables.o_hat)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] w_l = np.ascontiguousarray(tables.w_ladder)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] w_c = np.ascontiguousarray(tables.w_crossed)
    cdef double[:, :, :] lad = lad_np
    cdef double[:, :, :] cro = cro_np
    cdef double[:, :] u = u_arr
    cdef double complex* o_ptr = <double complex*> o_hat.data
    cdef double complex* wl_ptr = <double complex*> w_l.data
    cdef double complex* wc_ptr = <double complex*> w_c.data

    cdef double sigma = tables.sigma_hat
    cdef double r0 = tables.r0
    cdef double n0 = tables.n0
    cdef double two_pi_k = tables.two_pi_k
    cdef double ell2 = tables.ell_s * tables.ell_s
    cdef double n_tot = tables.total_atoms

    # constant external frames
    cdef double f_in[6]
    cdef double f_out[6]
    f_in[0] = 1.0; f_in[1] = 0.0; f_in[2] = 0.0
    f_in[3] = 1.0; f_in[4] = 0.0; f_in[5] = 0.0
    f_out[0] = -1.0; f_out[1] = 0.0; f_out[2] = 0.0
    f_out[3] = 1.0; f_out[4] = 0.0; f_out[5] = 0.0
    cdef double complex m_in[4]
    cdef double complex m_out[4]
    project_o(o_ptr, f_in, m_in)
    project_o(o_ptr, f_out, m_out)

    cdef Py_ssize_t s
    cdef int order, i
    cdef double x, y, z, rho2, a_scale, c_tot, t, a_sig, f_first, geow
    cdef double tcol, w_t, cth, sth, ph, dstep, s0, erf0, c_fwd, s_new
    cdef double ux, uy, uz, px, py, pz, a_ray
    cdef double vals[4]
    cdef double ffwd[6]
    cdef double frev[6]
    cdef double e_in_f[6]
    cdef double rev_out_f[6]
    cdef double complex x_in[4]
    cdef double complex x_out[4]
    cdef double complex x_leg[4]
    cdef double complex x_rev[4]
    cdef double complex tmp2[4]
    cdef double complex m_leg[4]
    cdef double complex wr_l[36]
    cdef double complex wr_c[36]
    cdef double complex v44[16]
    cdef double complex k44[16]
    cdef double complex s44[16]
    cdef double complex r_l[16]
    cdef double complex r_c[16]
    cdef double complex t44[16]
    cdef bint alive

    with nogil:
        for s in range(s_count):
            # first atom
            x = r0 * c_ndtri(u[s, 0])
            y = r0 * c_ndtri(u[s, 1])
            a_scale = n0 * exp(-(x * x + y * y) / (2.0 * r0 * r0)) * SQRT_PI_2 * r0
            c_tot = 2.0 * a_scale
            t = sample_depth(u[s, 2], c_tot, sigma, &w_t)
            z = SQRT2 * r0 * erfinv_clipped(t / a_scale - 1.0)
            a_sig = sigma * c_tot
            if a_sig > 1e-8:
                f_first = -expm1(-a_sig) / a_sig
            else:
                f_first = 1.0 - a_sig / 2.0 + a_sig * a_sig / 6.0
            geow = n_tot * f_first * exp(sigma * t)
            px = x; py = y; pz = z

            if attenuation:
                tcol = a_scale * (c_erf(pz / (SQRT2 * r0)) + 1.0)
            else:
                tcol = 0.0
            propagator_from_m(m_in, two_pi_k * tcol, x_in)
            propagator_from_m(m_out, two_pi_k * tcol, x_out)

            conj22(x_in, tmp2)
            kron22(x_in, tmp2, r_l)
            dagger22(x_out, tmp2)
            kron22(x_in, tmp2, r_c)

            for i in range(6):
                e_in_f[i] = f_in[i]
                rev_out_f[i] = f_out[i]
            alive = True

            for order in range(max_order):
                vertex_right(wl_ptr, e_in_f, e_in_f, wr_l)
                vertex_right(wc_ptr, e_in_f, rev_out_f, wr_c)

                # score toward the detector
                vertex_project_left(f_out, f_out, wr_l, v44)
                conj22(x_out, tmp2)
                kron22(x_out, tmp2, k44)
                mat44_mul(v44, r_l, t44)
                mat44_mul(k44, t44, s44)
                score_channels(s44, LB_L, RB_L, geow, vals)
                for i in range(4):
                    lad[s, order, i] = vals[i]
                if order > 0:
                    vertex_project_left(f_out, f_in, wr_c, v44)
                    dagger22(x_in, tmp2)
                    kron22(x_out, tmp2, k44)
                    mat44_mul(v44, r_c, t44)
                    mat44_mul(k44, t44, s44)
                    score_channels(s44, LB_C, RB_C, geow, vals)
                    for i in range(4):
                        cro[s, order, i] = vals[i]

                if order == max_order - 1 or not alive:
                    break

                # extend the path
                cth = 2.0 * u[s, 3 + 3 * order] - 1.0
                sth = sqrt(max(1.0 - cth * cth, 0.0))
                ph = 2.0 * M_PI * u[s, 4 + 3 * order]
                ux = sth * cos(ph); uy = sth * sin(ph); uz = cth

                s0 = px * ux + py * uy + pz * uz
                rho2 = px * px + py * py + pz * pz - s0 * s0
                if rho2 < 0.0:
                    rho2 = 0.0
                a_ray = n0 * exp(-rho2 / (2.0 * r0 * r0)) * SQRT_PI_2 * r0
                erf0 = c_erf(s0 / (SQRT2 * r0))
                c_fwd = a_ray * (1.0 - erf0)
                if c_fwd < 1e-280:
                    break
                t = sample_depth(u[s, 5 + 3 * order], c_fwd, sigma, &w_t)
                s_new = SQRT2 * r0 * erfinv_clipped(erf0 + t / a_ray)
                dstep = s_new - s0
                if dstep < 1e-300:
                    dstep = 1e-300
                geow = geow * 4.0 * M_PI * ell2 * w_t

                frame_for_dir(ux, uy, uz, ffwd)
                frame_for_dir(-ux, -uy, -uz, frev)
                if attenuation:
                    tcol = a_ray * (c_erf(s_new / (SQRT2 * r0)) - erf0)
                else:
                    tcol = 0.0
                project_o(o_ptr, ffwd, m_leg)
                propagator_from_m(m_leg, two_pi_k * tcol, x_leg)
                project_o(o_ptr, frev, m_leg)
                propagator_from_m(m_leg, two_pi_k * tcol, x_rev)

                vertex_project_left(ffwd, ffwd, wr_l, v44)
                mat44_mul(v44, r_l, t44)
                conj22(x_leg, tmp2)
                kron22(x_leg, tmp2, k44)
                mat44_mul(k44, t44, r_l)

                vertex_project_left(ffwd, frev, wr_c, v44)
                mat44_mul(v44, r_c, t44)
                dagger22(x_rev, tmp2)
                kron22(x_leg, tmp2, k44)
                mat44_mul(k44, t44, r_c)

                px = px + dstep * ux
                py = py + dstep * uy
                pz = pz + dstep * uz
                if attenuation:
                    tcol = (
                        n0 * exp(-(px * px + py * py) / (2.0 * r0 * r0))
                        * SQRT_PI_2 * r0 * (c_erf(pz / (SQRT2 * r0)) + 1.0)
                    )
                else:
                    tcol = 0.0
                propagator_from_m(m_in, two_pi_k * tcol, x_in)
                propagator_from_m(m_out, two_pi_k * tcol, x_out)
                for i in range(6):
                    e_in_f[i] = ffwd[i]
                    rev_out_f[i] = frev[i]

    return lad_np, cro_np
