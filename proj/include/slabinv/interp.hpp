// Catmull-Rom interpolation on box grids: periodic in x', clamped in z.
#pragma once

#include "slabinv/grid.hpp"
#include "slabinv/modes.hpp"

namespace slabinv {

inline double cubic_weight(double t, int a) {
    switch (a) {
        case -1: return 0.5 * (-t * t * t + 2 * t * t - t);
        case 0: return 0.5 * (3 * t * t * t - 5 * t * t + 2);
        case 1: return 0.5 * (-3 * t * t * t + 4 * t * t + t);
        default: return 0.5 * (t * t * t - t * t);
    }
}

template <class FieldLike>
cplx tricubic_sample(const FieldLike& f, int n1, int n2, int nz, double x0, double y0,
                     double z0, double d1, double d2, double d3, Vec3 p) {
    auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
    auto clamp = [](int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); };
    const double fx = (p.x - x0) / d1, fy = (p.y - y0) / d2, fz = (p.z - z0) / d3;
    const int ix = int(std::floor(fx)), iy = int(std::floor(fy)), iz = int(std::floor(fz));
    const double tx = fx - ix, ty = fy - iy, tz = fz - iz;
    cplx s(0);
    for (int c = -1; c <= 2; ++c) {
        const double wz = cubic_weight(tz, c);
        const int mz = clamp(iz + c, nz);
        for (int b = -1; b <= 2; ++b) {
            const double wy = cubic_weight(ty, b) * wz;
            const int my = wrap(iy + b, n2);
            for (int a = -1; a <= 2; ++a)
                s += cubic_weight(tx, a) * wy *
                     f[(size_t(mz) * n2 + my) * n1 + wrap(ix + a, n1)];
        }
    }
    return s;
}

inline cplx tricubic_sample(const ScalarField& f, Vec3 p) {
    const SlabGrid& g = f.grid;
    return tricubic_sample(f.v, g.n1, g.n2, g.nn, -g.X, -g.X, 0.0, g.dx1(), g.dx2(),
                           g.dz(), p);
}

inline cplx tricubic_sample(const ExtendedField& f, Vec3 p) {
    const BoxGrid& g = f.grid;
    return tricubic_sample(f.v, g.n1, g.n2, g.nz, -g.X, -g.X, g.z0, g.dx1(), g.dx2(),
                           g.dz(), p);
}

inline cplx bicubic_sample(const PlaneField& f, double x, double y) {
    auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
    const double fx = (x + f.X) / f.dx1(), fy = (y + f.X) / f.dx2();
    const int ix = int(std::floor(fx)), iy = int(std::floor(fy));
    const double tx = fx - ix, ty = fy - iy;
    cplx s(0);
    for (int b = -1; b <= 2; ++b)
        for (int a = -1; a <= 2; ++a)
            s += cubic_weight(tx, a) * cubic_weight(ty, b) *
                 f.at(wrap(ix + a, f.n1), wrap(iy + b, f.n2));
    return s;
}

}  // namespace slabinv
