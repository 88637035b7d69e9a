#include "slabinv/grid.hpp"

#include <cmath>

namespace slabinv {

double ScalarField::max_abs() const {
    double m = 0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

double ScalarField::l2() const {
    double s = 0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s * grid.dx1() * grid.dx2() * grid.dz());
}

namespace {

// sin(pi l m / (M+1)) table, M = number of interior x_n nodes.
std::vector<double> sine_table(int M) {
    std::vector<double> s(size_t(M) * M);
    for (int l = 1; l <= M; ++l)
        for (int m = 1; m <= M; ++m)
            s[size_t(l - 1) * M + (m - 1)] = std::sin(kPi * l * m / (M + 1));
    return s;
}

}  // namespace

ModeStack sine_analyze(const ScalarField& u, int l_max, std::vector<std::string>* warnings) {
    const SlabGrid& g = u.grid;
    const int M = g.nn - 2;
    if (l_max < 0) l_max = M;
    if (l_max > g.nn - 1)
        throw ConstraintViolation("sine_analyze: l_max exceeds Nn-1");

    if (warnings) {
        double tr = 0, sup = u.max_abs();
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i)
                tr = std::max({tr, std::abs(u.at(i, j, 0)), std::abs(u.at(i, j, g.nn - 1))});
        if (sup > 0 && tr > 1e-12 * sup)
            warnings->push_back("sine_analyze: field does not vanish on the boundary planes "
                                "(max trace " + std::to_string(tr) + ")");
    }

    ModeStack stack(g, l_max);
    const auto S = sine_table(M);
    const double scale = 1.0 / (g.nn - 1);  // (2/L) * dz / 2-free DST-I weight
    const size_t plane = size_t(g.n1) * g.n2;
    parallel_for(size_t(l_max), [&](size_t li) {
        const int l = int(li) + 1;
        if (l > M) return;  // modes beyond the interior node count stay zero
        auto& out = stack.modes[li];
        const double* srow = &S[size_t(l - 1) * M];
        for (int m = 1; m <= M; ++m) {
            const cplx* up = &u.v[size_t(m) * plane];
            const double w = 2.0 * scale * srow[m - 1];
            for (size_t p = 0; p < plane; ++p) out[p] += w * up[p];
        }
    });
    return stack;
}

ScalarField sine_synthesize(const ModeStack& stack) {
    const SlabGrid& g = stack.grid;
    const int M = g.nn - 2;
    ScalarField u(g);
    const auto S = sine_table(std::max(M, stack.l_max));
    const size_t plane = size_t(g.n1) * g.n2;
    parallel_for(size_t(M), [&](size_t mi) {
        const int m = int(mi) + 1;
        cplx* up = &u.v[size_t(m) * plane];
        for (int l = 1; l <= stack.l_max; ++l) {
            // sin(l pi z_m / L) with z_m = m L/(nn-1) equals the table entry
            const double w = std::sin(kPi * l * m / double(g.nn - 1));
            const cplx* md = stack.modes[size_t(l - 1)].data();
            for (size_t p = 0; p < plane; ++p) up[p] += w * md[p];
        }
    });
    return u;
}

BoxGrid doubled_grid(const SlabGrid& g, ReflectionPlane plane) {
    BoxGrid b;
    b.X = g.X;
    b.n1 = g.n1;
    b.n2 = g.n2;
    b.nz = 2 * g.nn - 1;
    if (plane == ReflectionPlane::Bottom) {
        b.z0 = -g.L;
        b.z1 = g.L;
    } else {
        b.z0 = 0.0;
        b.z1 = 2.0 * g.L;
    }
    return b;
}

ExtendedField reflect_extend(const ScalarField& f, ReflectionPlane plane, Parity parity,
                             double tau_rel) {
    const SlabGrid& g = f.grid;
    if (parity == Parity::Odd) {
        const int mp = plane == ReflectionPlane::Bottom ? 0 : g.nn - 1;
        double tr = 0;
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) tr = std::max(tr, std::abs(f.at(i, j, mp)));
        const double tol = tau_rel * std::max(f.max_abs(), 1e-300);
        if (tr > tol)
            throw NonvanishingNormalTrace(
                "reflect_extend: odd-extended component has trace " + std::to_string(tr) +
                " on the reflection plane; gauge_normalize first");
    }

    ExtendedField ext(doubled_grid(g, plane));
    ext.parity = parity;
    ext.plane = plane;
    const int off = g.nn - 1;  // reflected copy occupies m < off (Bottom) or m > off (Top)
    const double sgn = parity == Parity::Even ? 1.0 : -1.0;
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const cplx val = f.at(i, j, m);
                if (plane == ReflectionPlane::Bottom) {
                    ext.at(i, j, off + m) = val;           // z = x_n
                    ext.at(i, j, off - m) = sgn * val;     // z = -x_n
                } else {
                    ext.at(i, j, m) = val;                 // z = x_n
                    ext.at(i, j, 2 * off - m) = sgn * val; // z = 2L - x_n
                }
            }
    return ext;
}

ExtendedVectorField reflect_extend(const VectorField& A, ReflectionPlane plane,
                                   double tau_rel) {
    ExtendedVectorField out;
    out.c1 = reflect_extend(A.c1, plane, Parity::Even, tau_rel);
    out.c2 = reflect_extend(A.c2, plane, Parity::Even, tau_rel);
    out.c3 = reflect_extend(A.c3, plane, Parity::Odd, tau_rel);
    out.grid = out.c1.grid;
    return out;
}

ScalarField restrict_to_slab(const ExtendedField& f, const SlabGrid& g) {
    const BoxGrid& b = f.grid;
    if (b.n1 != g.n1 || b.n2 != g.n2 || b.X != g.X)
        throw GridMismatch("restrict_to_slab: incompatible x' grids");
    ScalarField out(g);
    const int off = f.plane == ReflectionPlane::Bottom ? g.nn - 1 : 0;
    if (b.nz != 2 * g.nn - 1) throw GridMismatch("restrict_to_slab: not a doubled grid");
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) out.at(i, j, m) = f.at(i, j, off + m);
    return out;
}

}  // namespace slabinv
