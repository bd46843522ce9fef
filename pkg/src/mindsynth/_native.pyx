# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel compositor, the renderer's hot loop.

Must stay arithmetically identical to `_kernels_py.composite_circle`:
same predicates (d = sqrt(dx*dx+dy*dy), d <= radius, d > radius-1) and
same blend expression (src*a + dst*(1-a)) so both backends produce
bit-identical frames.
"""

from libc.math cimport ceil, floor, sqrt


def composite_circle(double[:, :, ::1] img, double cx, double cy, double radius,
                     double r, double g, double b, double fill_a, double stroke_a):
    """Alpha-over one filled circle with a 1-pixel black stroke ring."""
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t x0, x1, y0, y1, px, py
    cdef double dx, dy, d
    cdef double kf = 1.0 - fill_a
    cdef double ks = 1.0 - stroke_a
    cdef double rin = radius - 1.0

    if radius < 0.0:
        return
    x0 = <Py_ssize_t>floor(cx - radius)
    x1 = <Py_ssize_t>ceil(cx + radius)
    y0 = <Py_ssize_t>floor(cy - radius)
    y1 = <Py_ssize_t>ceil(cy + radius)
    if x0 < 0:
        x0 = 0
    if y0 < 0:
        y0 = 0
    if x1 > w - 1:
        x1 = w - 1
    if y1 > h - 1:
        y1 = h - 1

    for py in range(y0, y1 + 1):
        dy = (py + 0.5) - cy
        for px in range(x0, x1 + 1):
            dx = (px + 0.5) - cx
            d = sqrt(dx * dx + dy * dy)
            if d <= radius:
                if d > rin:
                    # stroke is black: src*a contributes nothing
                    img[py, px, 0] = img[py, px, 0] * ks
                    img[py, px, 1] = img[py, px, 1] * ks
                    img[py, px, 2] = img[py, px, 2] * ks
                else:
                    img[py, px, 0] = r * fill_a + img[py, px, 0] * kf
                    img[py, px, 1] = g * fill_a + img[py, px, 1] * kf
                    img[py, px, 2] = b * fill_a + img[py, px, 2] * kf
