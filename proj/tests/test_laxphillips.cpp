#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "slabinv/fft.hpp"
#include "slabinv/laxphillips.hpp"
#include "slabinv/synthetic.hpp"

using namespace slabinv;

namespace {

SlabGrid test_grid(int n = 48, int nn = 25) { return SlabGrid(2.0, 1.0, n, n, nn); }

SyntheticPotential bump_potentials() {
    SyntheticPotential p;
    p.a_bumps = {{0, {{0.15, -0.1, 0.5}, 0.3, 0.8, 1.0}},
                 {2, {{-0.1, 0.2, 0.45}, 0.28, 0.6, 1.0}}};
    p.q_bumps = {{{0.0, 0.1, 0.55}, 0.3, 1.2, 1.0}};
    return p;
}

}  // namespace

TEST_CASE("interior resolvent: zero input, eigenfield value, round trip") {
    SlabGrid g = test_grid(64, 33);
    VectorField A(g);
    ScalarField q(g);
    auto op = std::make_shared<MagneticOperator>(g, A, q);
    const cplx z(0.0, 2.0);
    InteriorResolvent rz(op, z, 1e-10);

    ScalarField zero(g);
    CHECK(rz.apply(zero).max_abs() == 0.0);

    // periodic-in-x' eigenfield of the free operator
    ScalarField gfield = sample_function(g, [&](Vec3 p) {
        return cplx(std::cos(kPi * p.x / g.X) * std::cos(kPi * p.y / g.X) *
                    std::sin(kPi * p.z / g.L));
    });
    const double lam = 2.0 * (kPi / g.X) * (kPi / g.X) + (kPi / g.L) * (kPi / g.L);
    ScalarField u = rz.apply(gfield);
    double err = 0;
    for (int m = 1; m < g.nn - 1; ++m)
        for (int j = 0; j < g.n2; j += 3)
            for (int i = 0; i < g.n1; i += 3) {
                const cplx want = gfield.at(i, j, m) / (lam - z);
                err = std::max(err, std::abs(u.at(i, j, m) - want));
            }
    CHECK(err * std::abs(lam - z) < 1e-3);

    // resolvent then operator reproduces the input
    ScalarField back = op->apply(u, z);
    double rt = 0;
    for (int m = 1; m < g.nn - 1; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i)
                rt = std::max(rt, std::abs(back.at(i, j, m) - gfield.at(i, j, m)));
    CHECK(rt < 1e-8);
}

TEST_CASE("gluing scheme reduces to the free solver when A = q = 0") {
    SlabGrid g = test_grid();
    VectorField A(g);
    ScalarField q(g);
    SmoothBump b{{0.1, 0.0, 0.5}, 0.35, 1.0, 1.0};
    ScalarField F = sample_function(g, [&](Vec3 p) { return cplx(b.value(p)); });
    auto cfg = LaxPhillipsConfig::for_frequency(2.0);

    SolveDiagnostics diag;
    ScalarField u = lax_phillips_solve(A, q, 2.0, F, cfg, &diag);
    ScalarField u0 = free_dirichlet_solve(F, 2.0, Discretization::FiniteDifference);
    CHECK(oracles::max_rel_field_err(u, u0) < 1e-6);
    CHECK(diag.pde_residual < 1e-7);

    // uniqueness under the gluing scheme: zero source gives the zero field
    ScalarField zero(g);
    ScalarField uz = lax_phillips_solve(A, q, 2.0, zero, cfg);
    CHECK(uz.max_abs() == 0.0);
}

TEST_CASE("perturbed solve with bump potentials at k = 4.5") {
    SlabGrid g = test_grid(64, 25);
    SyntheticPotential pot = bump_potentials();
    VectorField A = pot.sample_vector(g);
    ScalarField q = pot.sample_scalar(g);
    SmoothBump b{{0.0, 0.0, 0.5}, 0.3, 1.0, 1.0};
    ScalarField F = sample_function(g, [&](Vec3 p) { return cplx(b.value(p)); });
    auto cfg = LaxPhillipsConfig::for_frequency(4.5);

    SolveDiagnostics diag;
    ScalarField u = lax_phillips_solve(A, q, 4.5, F, cfg, &diag);
    // this suite runs at a coarse grid; the acceptance suite pins 1e-3 at
    // its production resolution
    CHECK(diag.pde_residual < 8e-3);
    CHECK(oracles::residual_fd4_magnetic(u, F, A, q, 4.5) < 5e-2);
    CHECK(diag.admissibility.pass);
    CHECK(u.max_abs() > 0.0);

    CHECK_THROWS_AS(lax_phillips_solve(A, q, kPi, F, cfg), ThresholdFrequency);
}

TEST_CASE("boundary value problem: trace reproduction and discrete manufactured solution") {
    SlabGrid g = test_grid();
    VectorField A(g);
    ScalarField q(g);
    auto cfg = LaxPhillipsConfig::for_frequency(2.0);

    PlaneField f(g.n1, g.n2, g.X);
    SUBCASE("zero datum gives zero solution") {
        ScalarField u = dirichlet_bvp_solve(A, q, 2.0, f, cfg);
        CHECK(u.max_abs() < 1e-12);
    }

    SUBCASE("discrete separable solution is reproduced") {
        // G is an exact eigenvector of the periodic stencil; nu matches the
        // z-recurrence, so G(x') sinh(nu z)/sinh(nu L) solves the discrete system
        const double k = 2.0;
        const double sx =
            (2.0 - 2.0 * std::cos(2.0 * kPi * 1.0 / g.n1)) / (g.dx1() * g.dx1());
        const double sy =
            (2.0 - 2.0 * std::cos(2.0 * kPi * 1.0 / g.n2)) / (g.dx2() * g.dx2());
        const double mu = sx + sy - k * k;
        const double dz = g.dz();
        const double nu = std::acosh(1.0 + mu * dz * dz / 2.0) / dz;
        auto G = [&](double x, double y) {
            return std::cos(2 * kPi * (x + g.X) / (2 * g.X)) *
                   std::cos(2 * kPi * (y + g.X) / (2 * g.X));
        };
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) f.at(i, j) = G(g.x1(i), g.x2(j));
        ScalarField u = dirichlet_bvp_solve(A, q, k, f, cfg);
        double err = 0;
        for (int m = 0; m < g.nn; ++m)
            for (int j = 0; j < g.n2; j += 3)
                for (int i = 0; i < g.n1; i += 3) {
                    const cplx want =
                        G(g.x1(i), g.x2(j)) * std::sinh(nu * g.z(m)) / std::sinh(nu * g.L);
                    err = std::max(err, std::abs(u.at(i, j, m) - want));
                }
        CHECK(err < 1e-4);
        for (int j = 0; j < g.n2; j += 5)
            for (int i = 0; i < g.n1; i += 5) {
                CHECK(std::abs(u.at(i, j, g.nn - 1) - f.at(i, j)) < 1e-13);
                CHECK(u.at(i, j, 0) == cplx(0));
            }
    }
}

TEST_CASE("dtn: zero datum and the free single-bin oracle") {
    SlabGrid g = test_grid();
    VectorField A(g);
    ScalarField q(g);
    auto cfg = LaxPhillipsConfig::for_frequency(2.0);
    BoundaryPatch g1{BoundaryPlaneId::Gamma1, 0, 0, 10.0};  // whole box
    BoundaryPatch g2{BoundaryPlaneId::Gamma2, 0, 0, 10.0};

    PlaneField f(g.n1, g.n2, g.X);
    DtnSample s0 = dtn_apply(A, q, 2.0, f, g1, g2, cfg);
    CHECK(s0.output.max_abs() < 1e-12);

    // one periodic Fourier bin: the discrete z-recurrence gives the exact trace
    const double k = 2.0;
    const int p1 = 2, p2 = 1;
    const double sx = (2.0 - 2.0 * std::cos(2.0 * kPi * p1 / g.n1)) / (g.dx1() * g.dx1());
    const double sy = (2.0 - 2.0 * std::cos(2.0 * kPi * p2 / g.n2)) / (g.dx2() * g.dx2());
    const cplx mu(sx + sy - k * k, 0.0);
    const double dz = g.dz();
    const cplx nu = std::acosh(cplx(1.0) + mu * dz * dz / 2.0) / dz;
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i)
            f.at(i, j) = std::cos(2 * kPi * p1 * (g.x1(i) + g.X) / (2 * g.X)) *
                         std::cos(2 * kPi * p2 * (g.x2(j) + g.X) / (2 * g.X));
    DtnSample s = dtn_apply(A, q, k, f, g1, g2, cfg);
    auto v = [&](int m) { return std::sinh(nu * (m * dz)) / std::sinh(nu * g.L); };
    const cplx dn_oracle =
        (25.0 * v(0) - 48.0 * v(1) + 36.0 * v(2) - 16.0 * v(3) + 3.0 * v(4)) / (12.0 * dz);
    double err = 0;
    const double scale = std::abs(dn_oracle);
    for (int j = 0; j < g.n2; j += 3)
        for (int i = 0; i < g.n1; i += 3) {
            const cplx want = dn_oracle * f.at(i, j);
            err = std::max(err, std::abs(s.output.at(i, j) - want));
        }
    CHECK(err / scale < 1e-3);
}

TEST_CASE("patch containment of the ball sections") {
    SupportBall b{{0.0, 0.0, 0.5}, 0.9};
    BoundaryPatch small{BoundaryPlaneId::Gamma2, 0, 0, 0.5};
    BoundaryPatch big{BoundaryPlaneId::Gamma2, 0, 0, 1.0};
    CHECK(!small.covers_ball_section(b, 1.0));
    CHECK(big.covers_ball_section(b, 1.0));
}

TEST_CASE("gauge normalization removes the normal component") {
    SlabGrid g = test_grid();
    SUBCASE("already normal-free stays put") {
        SyntheticPotential pot = bump_potentials();
        VectorField A = pot.sample_vector(g);
        GaugeNormalization gn = gauge_normalize(A);
        CHECK(gn.psi.max_abs() == 0.0);
        CHECK(oracles::max_rel_field_err(gn.A_new.c3, A.c3) == 0.0);
    }
    SUBCASE("constant normal component near the bottom plane") {
        VectorField A(g);
        SmoothBump bx{{0.0, 0.0, 0.0}, 0.8, 1.0, 1.0};
        A.c3 = sample_function(g, [&](Vec3 p) {
            const double band =
                p.z < 0.25 ? 1.0 : std::max(0.0, 1.0 - (p.z - 0.25) / 0.1);
            return cplx(0.7 * bx.value({p.x, p.y, 0.0}) * band);
        });
        GaugeNormalization gn = gauge_normalize(A);
        for (int j = 0; j < g.n2; j += 3)
            for (int i = 0; i < g.n1; i += 3) {
                CHECK(std::abs(gn.A_new.c3.at(i, j, 0)) < 1e-10);
                CHECK(std::abs(gn.psi.at(i, j, 0)) < 1e-14);
                CHECK(std::abs(gn.psi.at(i, j, g.nn - 1)) < 1e-14);
            }
        for (int j = 0; j < g.n2; j += 7)
            for (int i = 0; i < g.n1; i += 7)
                CHECK(std::abs(gn.grad_psi.c3.at(i, j, 0) + A.c3.at(i, j, 0)) < 1e-9);

        // gauge adds a gradient: the curl difference is stencil mismatch
        // between the analytic z-profile and centered differences, O(dz^2)
        auto curl_gap = [&](const SlabGrid& gg) {
            VectorField Ag(gg);
            Ag.c3 = sample_function(gg, [&](Vec3 p) {
                const double s2 = 0.35 * 0.35;
                return cplx(0.7 * std::exp(-(p.x * p.x + p.y * p.y) / (2 * s2)) *
                            std::exp(-4.0 * p.z));
            });
            GaugeNormalization gnr = gauge_normalize(Ag);
            VectorField d1o = gradient(Ag.c1), d3o = gradient(Ag.c3);
            VectorField d1n = gradient(gnr.A_new.c1), d3n = gradient(gnr.A_new.c3);
            double dmax = 0;
            for (int m = 2; m < gg.nn - 2; ++m)
                for (int j = 0; j < gg.n2; ++j)
                    for (int i = 0; i < gg.n1; ++i) {
                        const cplx co = d3o.c1.at(i, j, m) - d1o.c3.at(i, j, m);
                        const cplx cn = d3n.c1.at(i, j, m) - d1n.c3.at(i, j, m);
                        dmax = std::max(dmax, std::abs(co - cn));
                    }
            return dmax;
        };
        const double c1g = curl_gap(SlabGrid(2.0, 1.0, 48, 48, 65));
        const double c2g = curl_gap(SlabGrid(2.0, 1.0, 48, 48, 129));
        CHECK(c2g < c1g);
        CHECK(std::log2(c1g / c2g) > 1.5);
    }
}

TEST_CASE("gauge transform: identity, inverse pair, gradient convergence") {
    SlabGrid g = test_grid();
    SyntheticPotential pot = bump_potentials();
    VectorField A = pot.sample_vector(g);

    ScalarField zero(g);
    VectorField same = gauge_transform(A, zero);
    CHECK(oracles::max_rel_field_err(same.c1, A.c1) == 0.0);

    SyntheticPotential gauge;
    gauge.psi_bumps = {{{0.0, 0.0, 0.5}, 0.35, 0.5, 1.0}};
    ScalarField psi = gauge.sample_psi(g);
    ScalarField neg(g);
    for (size_t p = 0; p < neg.v.size(); ++p) neg.v[p] = -psi.v[p];
    VectorField fwd = gauge_transform(A, psi);
    VectorField back = gauge_transform(fwd, neg);
    double err = 0;
    for (size_t p = 0; p < back.c1.v.size(); ++p)
        err = std::max({err, std::abs(back.c1.v[p] - A.c1.v[p]),
                        std::abs(back.c2.v[p] - A.c2.v[p]),
                        std::abs(back.c3.v[p] - A.c3.v[p])});
    CHECK(err < 1e-12);

    // centered differences approach the symbolic gradient at second order
    const double s2g = 0.45 * 0.45;
    auto psi_fn = [&](Vec3 p) {
        return std::exp(-(p.x * p.x + p.y * p.y) / (2 * s2g)) * std::sin(kPi * p.z);
    };
    auto grad_err = [&](int n, int nn) {
        SlabGrid gg(2.0, 1.0, n, n, nn);
        ScalarField ps = sample_function(gg, [&](Vec3 p) { return cplx(psi_fn(p)); });
        VectorField gt = gauge_transform(VectorField(gg), ps);
        double e = 0;
        for (int m = 1; m < gg.nn - 1; ++m)
            for (int j = 0; j < gg.n2; ++j)
                for (int i = 0; i < gg.n1; ++i) {
                    const Vec3 p{gg.x1(i), gg.x2(j), gg.z(m)};
                    const double gbase =
                        std::exp(-(p.x * p.x + p.y * p.y) / (2 * s2g));
                    const double gx = -p.x / s2g * gbase * std::sin(kPi * p.z);
                    const double gz = kPi * gbase * std::cos(kPi * p.z);
                    e = std::max({e, std::abs(gt.c1.at(i, j, m) - gx),
                                  std::abs(gt.c3.at(i, j, m) - gz)});
                }
        return e;
    };
    const double e1 = grad_err(32, 17), e2 = grad_err(64, 33);
    CHECK(e2 < e1);
    CHECK(std::log2(e1 / e2) > 1.5);

    // discrete curl of a centered-difference gradient vanishes identically
    SlabGrid gg(2.0, 1.0, 32, 32, 17);
    ScalarField ps = sample_function(gg, [&](Vec3 p) { return cplx(psi_fn(p)); });
    VectorField gradv = gauge_transform(VectorField(gg), ps);
    VectorField d1 = gradient(gradv.c1), d2 = gradient(gradv.c2);
    double cmax = 0;
    for (int m = 2; m < gg.nn - 2; ++m)
        for (int j = 0; j < gg.n2; ++j)
            for (int i = 0; i < gg.n1; ++i)
                cmax = std::max(cmax, std::abs(d1.c2.at(i, j, m) - d2.c1.at(i, j, m)));
    CHECK(cmax < 1e-13);
}

TEST_CASE("slab Green formula defect on manufactured pairs") {
    SlabGrid g(2.0, 1.0, 64, 64, 129);
    SyntheticPotential pot = bump_potentials();
    VectorField A = pot.sample_vector(g);
    ScalarField q = pot.sample_scalar(g);

    const double s2 = 0.55 * 0.55;
    ScalarField u = sample_function(g, [&](Vec3 p) {
        return cplx(std::exp(-(p.x * p.x + p.y * p.y) / (2 * s2)) *
                    std::sin(0.5 * kPi * p.z));
    });
    ScalarField v = sample_function(g, [&](Vec3 p) {
        return cplx(std::exp(-((p.x - 0.2) * (p.x - 0.2) + p.y * p.y) / (2 * s2)) *
                    std::sin(kPi * p.z));
    });
    const double free_defect =
        green_defect_slab(u, v, VectorField(g), ScalarField(g), 2.0);
    CHECK(free_defect < 1e-4);
    const double pert_defect = green_defect_slab(u, v, A, q, 2.0);
    CHECK(pert_defect < 5e-3);

    // defect shrinks under refinement
    SlabGrid gc(2.0, 1.0, 32, 32, 33);
    ScalarField uc = sample_function(gc, [&](Vec3 p) {
        return cplx(std::exp(-(p.x * p.x + p.y * p.y) / (2 * s2)) *
                    std::sin(0.5 * kPi * p.z));
    });
    ScalarField vc = sample_function(gc, [&](Vec3 p) {
        return cplx(std::exp(-((p.x - 0.2) * (p.x - 0.2) + p.y * p.y) / (2 * s2)) *
                    std::sin(kPi * p.z));
    });
    SyntheticPotential pc = bump_potentials();
    const double coarse =
        green_defect_slab(uc, vc, pc.sample_vector(gc), pc.sample_scalar(gc), 2.0);
    CHECK(pert_defect < coarse);
}

TEST_CASE("free spectrum probe finds the slab floor") {
    SlabGrid g(2.0, 1.0, 16, 16, 33);
    std::vector<double> ev = probe_free_spectrum(g, 2, 30);
    const double want = fd_sine_eigenvalue(1, g.nn - 2, g.dz());
    CHECK(ev[0] == doctest::Approx(want).epsilon(1e-6));
    CHECK(std::abs(ev[0] - kPi * kPi) / (kPi * kPi) < 0.01);
}

TEST_CASE("potential well pulls an eigenvalue below the essential floor") {
    SlabGrid g(2.0, 1.0, 24, 24, 17);
    VectorField A(g);
    SmoothBump well{{0.0, 0.0, 0.5}, 0.45, -40.0, 1.0};
    ScalarField q = sample_function(g, [&](Vec3 p) { return cplx(well.value(p)); });
    std::vector<double> ev = probe_discrete_spectrum(A, q, 2, 40);
    CHECK(ev[0] < kPi * kPi - 1.0);

    ScalarField qp = sample_function(g, [&](Vec3 p) {
        return cplx(0.2 * std::abs(well.value(p)) / 40.0);
    });
    std::vector<double> ev2 = probe_discrete_spectrum(A, qp, 2, 40);
    CHECK(ev2[0] > kPi * kPi - 0.5);
}
