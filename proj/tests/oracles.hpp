// Test-only oracles, independent of the library implementation paths:
// quadrature Bessel evaluations, direct Fourier sums, kernel integrals.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "slabinv/grid.hpp"
#include "slabinv/synthetic.hpp"

namespace oracles {

using slabinv::cplx;
using slabinv::kPi;
using slabinv::Vec3;

// Composite 20-node Gauss-Legendre quadrature over [a, b].
inline double gauss_quad(double a, double b, int panels,
                         const std::function<double(double)>& f) {
    static const double gx[10] = {0.0765265211334973, 0.2277858511416451,
                                  0.3737060887154195, 0.5108670019508271,
                                  0.6360536807265150, 0.7463319064601508,
                                  0.8391169718222188, 0.9122344282513259,
                                  0.9639719272779138, 0.9931285991850949};
    static const double gw[10] = {0.1527533871307258, 0.1491729864726037,
                                  0.1420961093183820, 0.1316886384491766,
                                  0.1181945319615184, 0.1019301198172404,
                                  0.0832767415767048, 0.0626720483341091,
                                  0.0406014298003869, 0.0176140071391521};
    double s = 0;
    const double hp = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = a + (p + 0.5) * hp, h = 0.5 * hp;
        for (int i = 0; i < 10; ++i) s += gw[i] * (f(c + h * gx[i]) + f(c - h * gx[i]));
        // weights sum to 2 over [-1,1]
    }
    return s * 0.5 * hp;
}

// J0 by the Bessel integral.
inline double bessel_j0(double x) {
    return gauss_quad(0.0, kPi, 16, [&](double th) { return std::cos(x * std::sin(th)); }) /
           kPi;
}

// Y0(x) = (1/pi) int_0^pi sin(x sin t) dt - (2/pi) int_0^inf e^{-x sinh t} dt.
inline double bessel_y0(double x) {
    const double s1 =
        gauss_quad(0.0, kPi, 16, [&](double th) { return std::sin(x * std::sin(th)); }) / kPi;
    const double tmax = std::asinh(745.0 / x) + 0.5;
    const double s2 =
        gauss_quad(0.0, tmax, 24, [&](double t) { return std::exp(-x * std::sinh(t)); });
    return s1 - (2.0 / kPi) * s2;
}

inline cplx hankel0_oracle(double x) { return {bessel_j0(x), bessel_y0(x)}; }

// Trapezoid Fourier integral over the slab box: int f(x) e^{i x.xi} dx.
inline cplx fourier_integral(const slabinv::ScalarField& f, Vec3 xi) {
    const auto& g = f.grid;
    cplx s(0);
    for (int m = 0; m < g.nn; ++m) {
        const double wz = (m == 0 || m == g.nn - 1) ? 0.5 : 1.0;
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const double ph = g.x1(i) * xi.x + g.x2(j) * xi.y + g.z(m) * xi.z;
                s += wz * f.at(i, j, m) * std::polar(1.0, ph);
            }
    }
    return s * (g.dx1() * g.dx2() * g.dz());
}

// Fourth-order finite-difference residual ||(-Delta - k^2) u - F|| / ||F||
// on interior nodes, an independent check of spectrally computed solutions.
// Stencils never cross the periodic x' seam: free-space solutions are not
// box-periodic, so two-node margins are skipped on every side.
inline double residual_fd4(const slabinv::ScalarField& u, const slabinv::ScalarField& F,
                           double k) {
    const auto& g = u.grid;
    const double c1 = 1.0 / (12.0 * g.dx1() * g.dx1());
    const double c2 = 1.0 / (12.0 * g.dx2() * g.dx2());
    const double c3 = 1.0 / (12.0 * g.dz() * g.dz());
    double num = 0, den = 0;
    for (int m = 2; m < g.nn - 2; ++m)
        for (int j = 2; j < g.n2 - 2; ++j)
            for (int i = 2; i < g.n1 - 2; ++i) {
                auto ux = [&](int d) { return u.at(i + d, j, m); };
                auto uy = [&](int d) { return u.at(i, j + d, m); };
                auto uz = [&](int d) { return u.at(i, j, m + d); };
                const cplx lap =
                    c1 * (-ux(2) + 16.0 * ux(1) - 30.0 * ux(0) + 16.0 * ux(-1) - ux(-2)) +
                    c2 * (-uy(2) + 16.0 * uy(1) - 30.0 * uy(0) + 16.0 * uy(-1) - uy(-2)) +
                    c3 * (-uz(2) + 16.0 * uz(1) - 30.0 * uz(0) + 16.0 * uz(-1) - uz(-2));
                num += std::norm(-lap - k * k * u.at(i, j, m) - F.at(i, j, m));
                den += std::norm(F.at(i, j, m));
            }
    return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

// Fourth-order residual for the full magnetic operator, same margins.
inline double residual_fd4_magnetic(const slabinv::ScalarField& u,
                                    const slabinv::ScalarField& F,
                                    const slabinv::VectorField& A,
                                    const slabinv::ScalarField& q, double k) {
    const auto& g = u.grid;
    const slabinv::cplx I(0, 1);
    const double c1 = 1.0 / (12.0 * g.dx1() * g.dx1());
    const double c2 = 1.0 / (12.0 * g.dx2() * g.dx2());
    const double c3 = 1.0 / (12.0 * g.dz() * g.dz());
    const double e1 = 1.0 / (12.0 * g.dx1()), e2 = 1.0 / (12.0 * g.dx2());
    const double e3 = 1.0 / (12.0 * g.dz());
    // div A and A^2 with the same fourth-order first derivatives
    double num = 0, den = 0;
    for (int m = 2; m < g.nn - 2; ++m)
        for (int j = 2; j < g.n2 - 2; ++j)
            for (int i = 2; i < g.n1 - 2; ++i) {
                auto lap = [&](const slabinv::ScalarField& f) {
                    auto fx = [&](int d) { return f.at(i + d, j, m); };
                    auto fy = [&](int d) { return f.at(i, j + d, m); };
                    auto fz = [&](int d) { return f.at(i, j, m + d); };
                    return c1 * (-fx(2) + 16.0 * fx(1) - 30.0 * fx(0) + 16.0 * fx(-1) -
                                 fx(-2)) +
                           c2 * (-fy(2) + 16.0 * fy(1) - 30.0 * fy(0) + 16.0 * fy(-1) -
                                 fy(-2)) +
                           c3 * (-fz(2) + 16.0 * fz(1) - 30.0 * fz(0) + 16.0 * fz(-1) -
                                 fz(-2));
                };
                auto d1 = [&](const slabinv::ScalarField& f) {
                    return e1 * (-f.at(i + 2, j, m) + 8.0 * f.at(i + 1, j, m) -
                                 8.0 * f.at(i - 1, j, m) + f.at(i - 2, j, m));
                };
                auto d2f = [&](const slabinv::ScalarField& f) {
                    return e2 * (-f.at(i, j + 2, m) + 8.0 * f.at(i, j + 1, m) -
                                 8.0 * f.at(i, j - 1, m) + f.at(i, j - 2, m));
                };
                auto d3f = [&](const slabinv::ScalarField& f) {
                    return e3 * (-f.at(i, j, m + 2) + 8.0 * f.at(i, j, m + 1) -
                                 8.0 * f.at(i, j, m - 1) + f.at(i, j, m - 2));
                };
                const slabinv::cplx a1 = A.c1.at(i, j, m), a2 = A.c2.at(i, j, m),
                                    a3 = A.c3.at(i, j, m);
                const slabinv::cplx div = d1(A.c1) + d2f(A.c2) + d3f(A.c3);
                const slabinv::cplx Lu =
                    -lap(u) - 2.0 * I * (a1 * d1(u) + a2 * d2f(u) + a3 * d3f(u)) +
                    (q.at(i, j, m) - I * div + a1 * a1 + a2 * a2 + a3 * a3 - k * k) *
                        u.at(i, j, m);
                num += std::norm(Lu - F.at(i, j, m));
                den += std::norm(F.at(i, j, m));
            }
    return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

inline double rel_err(cplx got, cplx want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline double max_rel_field_err(const slabinv::ScalarField& got,
                                const slabinv::ScalarField& want) {
    double m = 0, scale = want.max_abs();
    for (size_t p = 0; p < got.v.size(); ++p)
        m = std::max(m, std::abs(got.v[p] - want.v[p]));
    return m / std::max(scale, 1e-300);
}

}  // namespace oracles
