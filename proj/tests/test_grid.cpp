#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "slabinv/grid.hpp"
#include "slabinv/io.hpp"

using namespace slabinv;

namespace {

SlabGrid small_grid() { return SlabGrid(2.0, 1.0, 32, 32, 17); }

ScalarField random_band_limited(const SlabGrid& g, int l_max, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ModeStack stack(g, l_max);
    for (int l = 1; l <= l_max; ++l) {
        // smooth in x': a few low Fourier harmonics per mode
        std::vector<double> c(8), s(8);
        for (auto& v : c) v = uni(rng);
        for (auto& v : s) v = uni(rng);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                double val = 0;
                for (int h = 0; h < 4; ++h)
                    val += c[h] * std::cos(kPi * h * g.x1(i) / g.X) +
                           s[h] * std::sin(kPi * (h + 1) * g.x2(j) / g.X);
                stack.modes[size_t(l - 1)][size_t(j) * g.n1 + i] = val / (l * l);
            }
    }
    return sine_synthesize(stack);
}

}  // namespace

TEST_CASE("grid constructor enforces invariants") {
    CHECK_THROWS_AS(SlabGrid(2.0, -1.0, 32, 32, 17), ConstraintViolation);
    CHECK_THROWS_AS(SlabGrid(2.0, 1.0, 2, 32, 17), ConstraintViolation);
    SlabGrid g = small_grid();
    CHECK(g.z(0) == 0.0);
    CHECK(g.z(g.nn - 1) == doctest::Approx(g.L));
    CHECK(g.x1(0) == doctest::Approx(-g.X));
}

TEST_CASE("sine_analyze of the first slab mode") {
    SlabGrid g = small_grid();
    ScalarField u = sample_function(g, [&](Vec3 p) { return cplx(std::sin(kPi * p.z / g.L)); });
    ModeStack stack = sine_analyze(u);
    for (int l = 1; l <= stack.l_max; ++l) {
        for (auto& z : stack.modes[size_t(l - 1)]) {
            if (l == 1)
                CHECK(std::abs(z - cplx(1.0)) < 1e-12);
            else
                CHECK(std::abs(z) < 1e-12);
        }
    }
}

TEST_CASE("sine_analyze of zero is zero") {
    ScalarField u(small_grid());
    ModeStack stack = sine_analyze(u);
    for (auto& m : stack.modes)
        for (auto& z : m) CHECK(z == cplx(0));
}

TEST_CASE("Parseval identity at quadrature level") {
    SlabGrid g = small_grid();
    ScalarField u = random_band_limited(g, g.nn - 2, 17);
    ModeStack stack = sine_analyze(u);
    // trapezoid in z (plane traces vanish), full sum in periodic x'
    double lhs = 0;
    for (int m = 1; m < g.nn - 1; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) lhs += std::norm(u.at(i, j, m));
    lhs *= g.dx1() * g.dx2() * g.dz();
    double rhs = 0;
    for (auto& mv : stack.modes) {
        double s = 0;
        for (auto& z : mv) s += std::norm(z);
        rhs += s * g.dx1() * g.dx2();
    }
    rhs *= g.L / 2;
    CHECK(std::abs(lhs - rhs) / rhs < 1e-10);
}

TEST_CASE("sine_synthesize of single modes") {
    SlabGrid g = small_grid();
    SUBCASE("constant first mode") {
        ModeStack stack(g, 1);
        for (auto& z : stack.modes[0]) z = cplx(1.0);
        ScalarField u = sine_synthesize(stack);
        for (int m = 0; m < g.nn; ++m)
            CHECK(std::abs(u.at(3, 5, m) - cplx(std::sin(kPi * g.z(m) / g.L))) < 1e-13);
    }
    SUBCASE("x'-dependent second mode") {
        ModeStack stack(g, 2);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i)
                stack.modes[1][size_t(j) * g.n1 + i] = cplx(std::cos(kPi * g.x1(i) / g.X));
        ScalarField u = sine_synthesize(stack);
        for (int m = 0; m < g.nn; ++m)
            CHECK(std::abs(u.at(7, 2, m) -
                           cplx(std::cos(kPi * g.x1(7) / g.X) *
                                std::sin(2 * kPi * g.z(m) / g.L))) < 1e-13);
    }
}

TEST_CASE("analyze/synthesize round trips") {
    SlabGrid g = small_grid();
    // modes up to the interior node count are reproduced exactly; the
    // (Nn-1)-th sine vanishes at every grid node and cannot round-trip
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ModeStack stack(g, g.nn - 2);
    for (auto& mv : stack.modes)
        for (auto& z : mv) z = cplx(uni(rng), uni(rng));
    ModeStack back = sine_analyze(sine_synthesize(stack));
    double err = 0;
    for (int l = 1; l <= stack.l_max; ++l)
        for (size_t p = 0; p < stack.modes[size_t(l - 1)].size(); ++p)
            err = std::max(err, std::abs(stack.modes[size_t(l - 1)][p] -
                                         back.modes[size_t(l - 1)][p]));
    CHECK(err < 1e-12);

    ScalarField u = random_band_limited(g, g.nn - 2, 11);
    ScalarField u2 = sine_synthesize(sine_analyze(u));
    CHECK(oracles::max_rel_field_err(u2, u) < 1e-12);
}

TEST_CASE("boundary trace warning") {
    SlabGrid g = small_grid();
    ScalarField u = sample_function(g, [](Vec3 p) { return cplx(p.z); });
    std::vector<std::string> warnings;
    sine_analyze(u, -1, &warnings);
    CHECK(warnings.size() == 1);
}

TEST_CASE("even extension restores the field and is symmetric") {
    SlabGrid g = small_grid();
    SmoothBump q{{0.3, -0.2, 0.4}, 0.35, 1.0, 1.0};
    ScalarField f = sample_function(g, [&](Vec3 p) { return cplx(q.value(p)); });
    ExtendedField ext = reflect_extend(f, ReflectionPlane::Bottom, Parity::Even);
    const int off = g.nn - 1;
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; j += 3)
            for (int i = 0; i < g.n1; i += 3) {
                CHECK(ext.at(i, j, off + m) == f.at(i, j, m));
                CHECK(ext.at(i, j, off - m) == f.at(i, j, m));
            }
    ScalarField back = restrict_to_slab(ext, g);
    CHECK(oracles::max_rel_field_err(back, f) == 0.0);
}

TEST_CASE("odd extension of zero field is zero") {
    SlabGrid g = small_grid();
    ScalarField f(g);
    ExtendedField ext = reflect_extend(f, ReflectionPlane::Bottom, Parity::Odd);
    for (auto& z : ext.v) CHECK(z == cplx(0));
}

TEST_CASE("odd extension is antisymmetric and Lipschitz at the plane") {
    SlabGrid g = small_grid();
    // A3 = z * b(x'), vanishing trace; odd extension continues it linearly
    SmoothBump b{{0.0, 0.0, 0.0}, 0.8, 1.0, 1.0};
    ScalarField f = sample_function(g, [&](Vec3 p) {
        return cplx(p.z * b.value({p.x, p.y, 0.0}));
    });
    ExtendedField ext = reflect_extend(f, ReflectionPlane::Bottom, Parity::Odd);
    const int off = g.nn - 1;
    for (int m = 1; m < g.nn; m += 2)
        for (int j = 0; j < g.n2; j += 4)
            for (int i = 0; i < g.n1; i += 4)
                CHECK(ext.at(i, j, off - m) == -f.at(i, j, m));
    // one-sided difference quotients across the plane agree (linear field)
    const double dz = g.dz();
    for (int j = 0; j < g.n2; j += 4)
        for (int i = 0; i < g.n1; i += 4) {
            const cplx up = (ext.at(i, j, off + 1) - ext.at(i, j, off)) / dz;
            const cplx dn = (ext.at(i, j, off) - ext.at(i, j, off - 1)) / dz;
            CHECK(std::abs(up - dn) < 1e-12);
        }
}

TEST_CASE("odd extension rejects nonvanishing trace") {
    SlabGrid g = small_grid();
    ScalarField f = sample_function(g, [](Vec3) { return cplx(1.0); });
    CHECK_THROWS_AS(reflect_extend(f, ReflectionPlane::Bottom, Parity::Odd),
                    NonvanishingNormalTrace);
}

TEST_CASE("vector reflection uses tangential-even, normal-odd parity") {
    SlabGrid g = small_grid();
    SmoothBump b{{0.0, 0.0, 0.5}, 0.4, 1.0, 1.0};
    VectorField A(g);
    A.c1 = sample_function(g, [&](Vec3 p) { return cplx(b.value(p)); });
    A.c3 = sample_function(g, [&](Vec3 p) { return cplx(p.z * (1.0 - p.z) * b.value(p)); });
    ExtendedVectorField ext = reflect_extend(A, ReflectionPlane::Top);
    CHECK(ext.c1.parity == Parity::Even);
    CHECK(ext.c3.parity == Parity::Odd);
    const int off = g.nn - 1;
    const int m = g.nn - 4;
    CHECK(ext.c3.at(5, 5, 2 * off - m) == -A.c3.at(5, 5, m));
    CHECK(ext.c1.at(5, 5, 2 * off - m) == A.c1.at(5, 5, m));
}

TEST_CASE("field binary round trip and csv export") {
    SlabGrid g = small_grid();
    ScalarField f = random_band_limited(g, 4, 99);
    const std::string path = "/tmp/slabinv_test_field.slbf";
    write_field(path, f);
    ScalarField f2 = read_field(path);
    CHECK(f2.grid.same_as(g));
    CHECK(oracles::max_rel_field_err(f2, f) == 0.0);
    write_csv_slice("/tmp/slabinv_test_slice.csv", f, g.nn / 2);
    std::ifstream in("/tmp/slabinv_test_slice.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,re,im");
}

TEST_CASE("support ball geometry checks") {
    SupportBall b{{0.0, 0.0, 0.5}, 0.9};
    CHECK_NOTHROW(b.check_inside_box(2.0));
    SupportBall bad{{1.5, 0.0, 0.5}, 0.9};
    CHECK_THROWS_AS(bad.check_inside_box(2.0), ConstraintViolation);
    CHECK(b.contains({0.1, 0.1, 0.5}));
    CHECK(!b.contains({0.0, 0.0, 0.5}, 1.0));
}
