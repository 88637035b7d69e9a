// Discrete slab geometry: grids, complex fields, sine-mode transforms and
// the even/odd reflection extensions.
#pragma once

#include <memory>
#include <optional>

#include "slabinv/common.hpp"

namespace slabinv {

// Uniform grid on [-X,X)^2 x [0,L].  x' axes are periodic-convention
// (node i at -X + i*dx, +X excluded); the x_n axis includes both boundary
// planes x_n = 0 and x_n = L.
struct SlabGrid {
    double X{2.0};
    double L{1.0};
    int n1{32}, n2{32}, nn{17};

    SlabGrid() = default;
    SlabGrid(double X_, double L_, int n1_, int n2_, int nn_)
        : X(X_), L(L_), n1(n1_), n2(n2_), nn(nn_) {
        if (!(L > 0.0) || !(X > 0.0))
            throw ConstraintViolation("SlabGrid: X and L must be positive");
        if (n1 < 4 || n2 < 4 || nn < 4)
            throw ConstraintViolation("SlabGrid: need at least 4 samples per axis");
    }

    double dx1() const { return 2.0 * X / n1; }
    double dx2() const { return 2.0 * X / n2; }
    double dz() const { return L / (nn - 1); }
    double x1(int i) const { return -X + i * dx1(); }
    double x2(int j) const { return -X + j * dx2(); }
    double z(int m) const { return m * dz(); }
    size_t size() const { return size_t(n1) * n2 * nn; }
    size_t idx(int i, int j, int m) const { return (size_t(m) * n2 + j) * n1 + i; }
    bool same_as(const SlabGrid& o) const {
        return X == o.X && L == o.L && n1 == o.n1 && n2 == o.n2 && nn == o.nn;
    }
};

// Generic box grid used for reflected/extended domains [-X,X)^2 x [z0,z1].
struct BoxGrid {
    double X{2.0};
    double z0{0.0}, z1{1.0};
    int n1{32}, n2{32}, nz{17};

    double dx1() const { return 2.0 * X / n1; }
    double dx2() const { return 2.0 * X / n2; }
    double dz() const { return (z1 - z0) / (nz - 1); }
    double x1(int i) const { return -X + i * dx1(); }
    double x2(int j) const { return -X + j * dx2(); }
    double z(int m) const { return z0 + m * dz(); }
    size_t size() const { return size_t(n1) * n2 * nz; }
    size_t idx(int i, int j, int m) const { return (size_t(m) * n2 + j) * n1 + i; }
    bool same_as(const BoxGrid& o) const {
        return X == o.X && z0 == o.z0 && z1 == o.z1 && n1 == o.n1 && n2 == o.n2 &&
               nz == o.nz;
    }
};

// Complex samples on a SlabGrid, row-major with x1 fastest.
struct ScalarField {
    SlabGrid grid;
    std::vector<cplx> v;

    ScalarField() = default;
    explicit ScalarField(const SlabGrid& g) : grid(g), v(g.size(), cplx(0)) {}
    cplx& at(int i, int j, int m) { return v[grid.idx(i, j, m)]; }
    cplx at(int i, int j, int m) const { return v[grid.idx(i, j, m)]; }
    double max_abs() const;
    double l2() const;  // sqrt(sum |v|^2 * cell volume)
};

struct SupportBall {
    Vec3 center{0, 0, 0.5};
    double radius{0.9};

    bool contains(Vec3 p, double margin = 0.0) const {
        return norm(p - center) + margin <= radius;
    }
    void check_inside_box(double X) const {
        double cr = std::sqrt(center.x * center.x + center.y * center.y);
        if (!(cr + radius < X))
            throw ConstraintViolation("SupportBall: ball reaches the x' truncation box");
    }
};

struct VectorField {
    SlabGrid grid;
    ScalarField c1, c2, c3;
    std::optional<SupportBall> support;

    VectorField() = default;
    explicit VectorField(const SlabGrid& g) : grid(g), c1(g), c2(g), c3(g) {}
    ScalarField& comp(int k) { return k == 0 ? c1 : (k == 1 ? c2 : c3); }
    const ScalarField& comp(int k) const { return k == 0 ? c1 : (k == 1 ? c2 : c3); }
    double max_abs() const {
        return std::max({c1.max_abs(), c2.max_abs(), c3.max_abs()});
    }
};

// Fourier sine coefficients u_l(x'), l = 1..l_max, each an n1 x n2 array.
struct ModeStack {
    SlabGrid grid;
    int l_max{0};
    std::vector<std::vector<cplx>> modes;  // modes[l-1], size n1*n2

    ModeStack() = default;
    ModeStack(const SlabGrid& g, int lmax)
        : grid(g), l_max(lmax), modes(lmax, std::vector<cplx>(size_t(g.n1) * g.n2, cplx(0))) {
        if (lmax < 0 || lmax > g.nn - 1)
            throw ConstraintViolation("ModeStack: l_max must satisfy 0 <= l_max <= Nn-1");
    }
};

enum class Parity { Even, Odd };
enum class ReflectionPlane { Bottom, Top };  // x_n = 0 resp. x_n = L

// Field on the doubled slab, with the parity used to build it.
struct ExtendedField {
    BoxGrid grid;
    std::vector<cplx> v;
    Parity parity{Parity::Even};
    ReflectionPlane plane{ReflectionPlane::Bottom};

    ExtendedField() = default;
    explicit ExtendedField(const BoxGrid& g) : grid(g), v(g.size(), cplx(0)) {}
    cplx& at(int i, int j, int m) { return v[grid.idx(i, j, m)]; }
    cplx at(int i, int j, int m) const { return v[grid.idx(i, j, m)]; }
};

struct ExtendedVectorField {
    BoxGrid grid;
    ExtendedField c1, c2, c3;
    ExtendedField& comp(int k) { return k == 0 ? c1 : (k == 1 ? c2 : c3); }
    const ExtendedField& comp(int k) const { return k == 0 ? c1 : (k == 1 ? c2 : c3); }
};

// --- sine-mode transforms (DST-I on the interior x_n nodes) ---------------

// u_l(x') = (2/L) int_0^L u sin(l pi x_n / L) dx_n, l = 1..l_max.
// Warns (via *warnings) if the boundary-plane traces do not vanish.
ModeStack sine_analyze(const ScalarField& u, int l_max = -1,
                       std::vector<std::string>* warnings = nullptr);

// u(x', x_n) = sum_l u_l(x') sin(l pi x_n / L); vanishes on both planes.
ScalarField sine_synthesize(const ModeStack& stack);

// --- reflections -----------------------------------------------------------

// Even/odd extension of a scalar field across a boundary plane.  Odd
// extensions require a vanishing trace on that plane (tolerance tau,
// relative to max|f|); the default matches the gauge-normalized setting.
ExtendedField reflect_extend(const ScalarField& f, ReflectionPlane plane, Parity parity,
                             double tau_rel = 1e-8);

// Tangential components and q even, normal component odd.
ExtendedVectorField reflect_extend(const VectorField& A, ReflectionPlane plane,
                                   double tau_rel = 1e-8);

// Restriction of an extended field back to the original slab nodes.
ScalarField restrict_to_slab(const ExtendedField& f, const SlabGrid& g);

// Doubled grid housing the reflection of `g` across the given plane.
BoxGrid doubled_grid(const SlabGrid& g, ReflectionPlane plane);

}  // namespace slabinv
