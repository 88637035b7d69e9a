#include "slabinv/operators.hpp"

namespace slabinv {

VectorField gradient(const ScalarField& f) {
    const SlabGrid& g = f.grid;
    VectorField out(g);
    const double h1 = g.dx1(), h2 = g.dx2(), h3 = g.dz();
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const int ip = (i + 1) % g.n1, im = (i + g.n1 - 1) % g.n1;
                const int jp = (j + 1) % g.n2, jm = (j + g.n2 - 1) % g.n2;
                out.c1.at(i, j, m) = (f.at(ip, j, m) - f.at(im, j, m)) / (2 * h1);
                out.c2.at(i, j, m) = (f.at(i, jp, m) - f.at(i, jm, m)) / (2 * h2);
                cplx dz;
                if (m == 0)
                    dz = (-3.0 * f.at(i, j, 0) + 4.0 * f.at(i, j, 1) - f.at(i, j, 2)) / (2 * h3);
                else if (m == g.nn - 1)
                    dz = (3.0 * f.at(i, j, m) - 4.0 * f.at(i, j, m - 1) + f.at(i, j, m - 2)) /
                         (2 * h3);
                else
                    dz = (f.at(i, j, m + 1) - f.at(i, j, m - 1)) / (2 * h3);
                out.c3.at(i, j, m) = dz;
            }
    return out;
}

MagneticOperator::MagneticOperator(const SlabGrid& grid) : grid_(grid), trivial_(true) {}

MagneticOperator::MagneticOperator(const SlabGrid& grid, const VectorField& A,
                                   const ScalarField& q)
    : grid_(grid), trivial_(false) {
    if (!A.grid.same_as(grid) || !q.grid.same_as(grid))
        throw GridMismatch("MagneticOperator: potential grids differ");
    a1_ = A.c1.v;
    a2_ = A.c2.v;
    a3_ = A.c3.v;
    qt_.assign(grid.size(), cplx(0));
    // div A by the same centered stencils used everywhere else
    VectorField d1 = gradient(A.c1), d2 = gradient(A.c2), d3 = gradient(A.c3);
    for (size_t p = 0; p < grid.size(); ++p) {
        const cplx div = d1.c1.v[p] + d2.c2.v[p] + d3.c3.v[p];
        qt_[p] = q.v[p] - kImag * div + a1_[p] * a1_[p] + a2_[p] * a2_[p] + a3_[p] * a3_[p];
    }
}

void MagneticOperator::apply(const std::vector<cplx>& u, std::vector<cplx>& out,
                             cplx shift) const {
    const SlabGrid& g = grid_;
    if (u.size() != g.size()) throw GridMismatch("MagneticOperator::apply: size");
    out.assign(g.size(), cplx(0));
    const double i1 = 1.0 / (g.dx1() * g.dx1());
    const double i2 = 1.0 / (g.dx2() * g.dx2());
    const double i3 = 1.0 / (g.dz() * g.dz());
    const double h1 = 2 * g.dx1(), h2 = 2 * g.dx2(), h3 = 2 * g.dz();

    parallel_for(size_t(g.nn - 2), [&](size_t mi) {
        const int m = int(mi) + 1;
        for (int j = 0; j < g.n2; ++j) {
            const int jp = (j + 1) % g.n2, jm = (j + g.n2 - 1) % g.n2;
            for (int i = 0; i < g.n1; ++i) {
                const int ip = (i + 1) % g.n1, im = (i + g.n1 - 1) % g.n1;
                const size_t c = g.idx(i, j, m);
                const cplx uc = u[c];
                const cplx ux_p = u[g.idx(ip, j, m)], ux_m = u[g.idx(im, j, m)];
                const cplx uy_p = u[g.idx(i, jp, m)], uy_m = u[g.idx(i, jm, m)];
                const cplx uz_p = u[g.idx(i, j, m + 1)], uz_m = u[g.idx(i, j, m - 1)];
                cplx val = -((ux_p - 2.0 * uc + ux_m) * i1 + (uy_p - 2.0 * uc + uy_m) * i2 +
                             (uz_p - 2.0 * uc + uz_m) * i3);
                if (!trivial_) {
                    const cplx dux = (ux_p - ux_m) / h1;
                    const cplx duy = (uy_p - uy_m) / h2;
                    const cplx duz = (uz_p - uz_m) / h3;
                    //
                    // 2 A . D u = -2i A . grad u
                    val += -2.0 * kImag * (a1_[c] * dux + a2_[c] * duy + a3_[c] * duz);
                    val += qt_[c] * uc;
                }
                out[c] = val - shift * uc;
            }
        }
    });
}

ScalarField MagneticOperator::apply(const ScalarField& u, cplx shift) const {
    ScalarField out(grid_);
    apply(u.v, out.v, shift);
    return out;
}

double MagneticOperator::residual(const ScalarField& u, const ScalarField& F, double k,
                                  int margin) const {
    ScalarField r = apply(u, cplx(k * k));
    double num = 0, den = 0;
    const SlabGrid& g = grid_;
    for (int m = 1; m < g.nn - 1; ++m)
        for (int j = margin; j < g.n2 - margin; ++j)
            for (int i = margin; i < g.n1 - margin; ++i) {
                num += std::norm(r.at(i, j, m) - F.at(i, j, m));
                den += std::norm(F.at(i, j, m));
            }
    return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace slabinv
