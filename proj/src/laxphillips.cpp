#include "slabinv/laxphillips.hpp"

#include <cmath>
#include <random>

#include "slabinv/fft.hpp"
#include "slabinv/interp.hpp"
#include "slabinv/krylov.hpp"

namespace slabinv {

namespace {

double expbump(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }

// C-infinity monotone step: 0 for t <= 0, 1 for t >= 1.
double smoothstep(double t) {
    const double a = expbump(t), b = expbump(1.0 - t);
    return a / (a + b);
}

}  // namespace

double cutoff_profile(double r, double R, double S) {
    const double w = 0.5 * (S - R);
    return smoothstep((R + w - r) / w);
}

ScalarField sample_cutoff(const SlabGrid& g, const LaxPhillipsConfig& cfg) {
    ScalarField phi(g);
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i)
                phi.at(i, j, m) = cutoff_profile(std::hypot(g.x1(i), g.x2(j)), cfg.R, cfg.S);
    return phi;
}

// ---------------------------------------------------------------------------
// FFT (x') x DST (z) diagonalization of the free second-order operator,
// used as the resolvent preconditioner and by the spectrum probes.
namespace {

class SlabSpectral {
  public:
    explicit SlabSpectral(const SlabGrid& g) : g_(g), M_(g.nn - 2) {
        sine_.resize(size_t(M_) * M_);
        for (int l = 1; l <= M_; ++l)
            for (int m = 1; m <= M_; ++m)
                sine_[size_t(l - 1) * M_ + (m - 1)] = std::sin(kPi * l * m / (M_ + 1));
        sym_.resize(size_t(g.n1) * g.n2 * M_);
        for (int l = 1; l <= M_; ++l) {
            const double lz = fd_sine_eigenvalue(l, M_, g.dz());
            for (int j = 0; j < g.n2; ++j) {
                const double ly =
                    (2.0 - 2.0 * std::cos(2.0 * kPi * j / g.n2)) / (g.dx2() * g.dx2());
                for (int i = 0; i < g.n1; ++i) {
                    const double lx =
                        (2.0 - 2.0 * std::cos(2.0 * kPi * i / g.n1)) / (g.dx1() * g.dx1());
                    sym_[(size_t(l - 1) * g.n2 + j) * g.n1 + i] = lx + ly + lz;
                }
            }
        }
    }

    // full-field layout -> sine coefficients (l-major, interior planes)
    void forward(const std::vector<cplx>& v, std::vector<cplx>& c) const {
        const size_t plane = size_t(g_.n1) * g_.n2;
        std::vector<cplx> hat(plane * M_);
        for (int m = 1; m <= M_; ++m) {
            std::vector<cplx> slice(v.begin() + m * plane, v.begin() + (m + 1) * plane);
            fft2(slice, g_.n1, g_.n2, true);
            std::copy(slice.begin(), slice.end(), hat.begin() + (m - 1) * plane);
        }
        c.assign(plane * M_, cplx(0));
        for (int l = 1; l <= M_; ++l)
            for (int m = 1; m <= M_; ++m) {
                const double w = sine_[size_t(l - 1) * M_ + (m - 1)];
                const cplx* src = &hat[size_t(m - 1) * plane];
                cplx* dst = &c[size_t(l - 1) * plane];
                for (size_t p = 0; p < plane; ++p) dst[p] += w * src[p];
            }
    }

    void backward(const std::vector<cplx>& c, std::vector<cplx>& v) const {
        const size_t plane = size_t(g_.n1) * g_.n2;
        v.assign(size_t(g_.n1) * g_.n2 * g_.nn, cplx(0));
        const double scale = 2.0 / (M_ + 1);
        for (int m = 1; m <= M_; ++m) {
            std::vector<cplx> slice(plane, cplx(0));
            for (int l = 1; l <= M_; ++l) {
                const double w = scale * sine_[size_t(l - 1) * M_ + (m - 1)];
                const cplx* src = &c[size_t(l - 1) * plane];
                for (size_t p = 0; p < plane; ++p) slice[p] += w * src[p];
            }
            fft2(slice, g_.n1, g_.n2, false);
            std::copy(slice.begin(), slice.end(), v.begin() + m * plane);
        }
    }

    // v <- (L0 - z)^{-1} v with the second-order symbols
    void solve_shifted(std::vector<cplx>& v, cplx z) const {
        std::vector<cplx> c;
        forward(v, c);
        for (size_t p = 0; p < c.size(); ++p) c[p] /= (sym_[p] - z);
        backward(c, v);
    }

  private:
    SlabGrid g_;
    int M_;
    std::vector<double> sine_;
    std::vector<double> sym_;
};

}  // namespace

InteriorResolvent::InteriorResolvent(std::shared_ptr<const MagneticOperator> op, cplx z,
                                     double tol)
    : op_(std::move(op)), z_(z), tol_(tol) {}

ScalarField InteriorResolvent::apply(const ScalarField& g) const {
    const SlabGrid& grid = op_->grid();
    if (!g.grid.same_as(grid)) throw GridMismatch("InteriorResolvent: grid mismatch");
    static thread_local std::shared_ptr<SlabSpectral> cache;
    static thread_local SlabGrid cached_grid;
    if (!cache || !cached_grid.same_as(grid)) {
        cache = std::make_shared<SlabSpectral>(grid);
        cached_grid = grid;
    }
    SlabSpectral& sp = *cache;

    LinearMap Amap = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
        op_->apply(x, y, z_);
    };
    LinearMap Mmap = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
        y = x;
        sp.solve_shifted(y, z_);
    };
    ScalarField u(grid);
    KrylovResult kr = gmres(Amap, Mmap, g.v, u.v, tol_, 50, 800);
    if (!kr.converged)
        throw LinearSolveFailure("interior resolvent did not converge: residual " +
                                 std::to_string(kr.residual));
    last_residual_ = kr.residual;
    return u;
}

// ---------------------------------------------------------------------------

namespace {

void check_supported_inside(const VectorField& A, const ScalarField& q, double R) {
    const SlabGrid& g = A.grid;
    double outside = 0, scale = std::max({A.max_abs(), q.max_abs(), 1e-300});
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                if (std::hypot(g.x1(i), g.x2(j)) < R) continue;
                outside = std::max({outside, std::abs(A.c1.at(i, j, m)),
                                    std::abs(A.c2.at(i, j, m)), std::abs(A.c3.at(i, j, m)),
                                    std::abs(q.at(i, j, m))});
            }
    if (outside > 1e-10 * scale)
        throw ConstraintViolation("potentials are not supported inside |x'| < R");
}

}  // namespace

ScalarField lax_phillips_solve(const VectorField& A, const ScalarField& q, double k,
                               const ScalarField& F, const LaxPhillipsConfig& cfg,
                               SolveDiagnostics* diag) {
    const SlabGrid& g = F.grid;
    cfg.validate(g.X);
    check_supported_inside(A, q, cfg.R);
    FrequencyValidation fv = validate_frequency(k, g.L);
    if (!fv.valid())
        throw ThresholdFrequency("lax_phillips_solve: " + fv.violations.front());

    auto op = std::make_shared<MagneticOperator>(g, A, q);
    InteriorResolvent rz(op, cfg.z, cfg.solver_tol * 1e-2);
    FreeSlabSolver r0(g, k, Discretization::FiniteDifference);
    ScalarField phi = sample_cutoff(g, cfg);
    const cplx zk = cfg.z - k * k;
    const size_t plane = size_t(g.n1) * g.n2;

    // T g = phi (z - k^2) u1 + [L, phi](u1 - u2), the commutator formed by two
    // discrete applications; supp(Tg) stays inside supp(phi), so the Fredholm
    // unknown never reaches the truncation edge.
    auto apply_T = [&](const ScalarField& gf, ScalarField& u1, ScalarField& u2,
                       ScalarField& Tg) {
        u1 = rz.apply(gf);
        u2 = r0.solve(gf);
        ScalarField w(g);
        for (size_t p = 0; p < w.v.size(); ++p) w.v[p] = phi.v[p] * (u1.v[p] - u2.v[p]);
        const ScalarField Lw = op->apply(w, cplx(0));
        const ScalarField Ld = op->apply(
            [&] {
                ScalarField d(g);
                for (size_t p = 0; p < d.v.size(); ++p) d.v[p] = u1.v[p] - u2.v[p];
                return d;
            }(),
            cplx(0));
        Tg = ScalarField(g);
        for (size_t p = 0; p < Tg.v.size(); ++p) {
            const cplx comm = Lw.v[p] - phi.v[p] * Ld.v[p];
            Tg.v[p] = phi.v[p] * zk * u1.v[p] + comm;
        }
        for (size_t p = 0; p < plane; ++p) {
            Tg.v[p] = cplx(0);
            Tg.v[(size_t(g.nn) - 1) * plane + p] = cplx(0);
        }
    };

    LinearMap fredholm = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
        ScalarField gf(g), u1, u2, Tg;
        gf.v = x;
        apply_T(gf, u1, u2, Tg);
        y.resize(x.size());
        for (size_t p = 0; p < x.size(); ++p) y[p] = x[p] + Tg.v[p];
    };
    LinearMap ident = [](const std::vector<cplx>& x, std::vector<cplx>& y) { y = x; };

    ScalarField gsol(g);
    KrylovResult kr =
        gmres(fredholm, ident, F.v, gsol.v, cfg.solver_tol, cfg.gmres_restart, cfg.max_iters);
    if (!kr.converged)
        throw LinearSolveFailure("(I+T) solve failed (residual " +
                                 std::to_string(kr.residual) +
                                 "): k^2 may be near an eigenvalue or k non-admissible");

    const ScalarField u1 = rz.apply(gsol);
    const ScalarField u2 = r0.solve(gsol);
    ScalarField u(g);
    for (size_t p = 0; p < u.v.size(); ++p)
        u.v[p] = phi.v[p] * u1.v[p] + (1.0 - phi.v[p]) * u2.v[p];

    if (diag) {
        diag->outer_iterations = kr.iterations;
        diag->fredholm_residual = kr.residual;
        diag->pde_residual = op->residual(u, F, k, 2);
        diag->admissibility = check_admissible(u, k);
    }
    return u;
}

// ---------------------------------------------------------------------------

namespace {

// 0 below L/2, 1 at the top plane with flat derivative there
double lift_ramp(double z, double L) { return smoothstep(2.0 * z / L - 1.0); }

}  // namespace

ScalarField dirichlet_bvp_solve(const VectorField& A, const ScalarField& q, double k,
                                const PlaneField& f, const LaxPhillipsConfig& cfg,
                                SolveDiagnostics* diag) {
    const SlabGrid& g = A.grid;
    if (f.n1 != g.n1 || f.n2 != g.n2) throw GridMismatch("dirichlet_bvp_solve: trace grid");
    ScalarField lift(g);
    for (int m = 0; m < g.nn; ++m) {
        const double r = lift_ramp(g.z(m), g.L);
        if (r == 0.0) continue;
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) lift.at(i, j, m) = r * f.at(i, j);
    }
    MagneticOperator op(g, A, q);
    ScalarField rhs = op.apply(lift, cplx(k * k));
    for (auto& v : rhs.v) v = -v;  // (k^2 - L) lift
    ScalarField u0 = lax_phillips_solve(A, q, k, rhs, cfg, diag);
    ScalarField u(g);
    for (size_t p = 0; p < u.v.size(); ++p) u.v[p] = lift.v[p] + u0.v[p];
    return u;
}

bool BoundaryPatch::covers_ball_section(const SupportBall& b, double L) const {
    const double zp = plane == BoundaryPlaneId::Gamma1 ? L : 0.0;
    const double dz = std::abs(b.center.z - zp);
    if (dz >= b.radius) return true;  // empty section
    const double section_r = std::sqrt(b.radius * b.radius - dz * dz);
    const double dc = std::hypot(cx - b.center.x, cy - b.center.y);
    return dc + section_r <= radius + 1e-12;
}

PlaneField magnetic_neumann_trace(const ScalarField& u, const VectorField& A,
                                  BoundaryPlaneId plane) {
    const SlabGrid& g = u.grid;
    PlaneField out(g.n1, g.n2, g.X);
    const double dz = g.dz();
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) {
            cplx dn, ia;
            if (plane == BoundaryPlaneId::Gamma1) {
                const int N = g.nn - 1;
                dn = (25.0 * u.at(i, j, N) - 48.0 * u.at(i, j, N - 1) +
                      36.0 * u.at(i, j, N - 2) - 16.0 * u.at(i, j, N - 3) +
                      3.0 * u.at(i, j, N - 4)) /
                     (12.0 * dz);
                ia = kImag * A.c3.at(i, j, N) * u.at(i, j, N);
            } else {
                dn = (25.0 * u.at(i, j, 0) - 48.0 * u.at(i, j, 1) + 36.0 * u.at(i, j, 2) -
                      16.0 * u.at(i, j, 3) + 3.0 * u.at(i, j, 4)) /
                     (12.0 * dz);
                ia = -kImag * A.c3.at(i, j, 0) * u.at(i, j, 0);
            }
            out.at(i, j) = dn + ia;
        }
    return out;
}

DtnSample dtn_apply(const VectorField& A, const ScalarField& q, double k,
                    const PlaneField& f, const BoundaryPatch& in_patch,
                    const BoundaryPatch& out_patch, const LaxPhillipsConfig& cfg) {
    const SlabGrid& g = A.grid;
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i)
            if (std::abs(f.at(i, j)) > 0 &&
                std::hypot(f.x1(i) - in_patch.cx, f.x2(j) - in_patch.cy) > in_patch.radius)
                throw PatchMismatch("dtn_apply: datum support leaves gamma_1");

    ScalarField u = dirichlet_bvp_solve(A, q, k, f, cfg);
    PlaneField trace = magnetic_neumann_trace(u, A, out_patch.plane);
    DtnSample s;
    s.input = f;
    s.in_patch = in_patch;
    s.out_patch = out_patch;
    s.output = PlaneField(g.n1, g.n2, g.X);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i)
            if (std::hypot(trace.x1(i) - out_patch.cx, trace.x2(j) - out_patch.cy) <=
                out_patch.radius)
                s.output.at(i, j) = trace.at(i, j);
    return s;
}

// ---------------------------------------------------------------------------

GaugeNormalization gauge_normalize(const VectorField& A) {
    const SlabGrid& g = A.grid;
    const double L = g.L;
    PlaneField a(g.n1, g.n2, g.X), b(g.n1, g.n2, g.X);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) {
            a.at(i, j) = A.c3.at(i, j, 0);
            b.at(i, j) = A.c3.at(i, j, g.nn - 1);
        }
    auto eta0 = [&](double z) { return smoothstep((L / 3 - z) / (L / 6)); };
    auto etaL = [&](double z) { return smoothstep((z - 2 * L / 3) / (L / 6)); };
    auto ddz = [&](auto f, double z) {
        const double h = 1e-6 * L;
        return (f(z + h) - f(z - h)) / (2 * h);
    };
    auto ddx = [&](const PlaneField& p, int i, int j, bool along_x) {
        if (along_x) {
            const int ip = (i + 1) % g.n1, im = (i + g.n1 - 1) % g.n1;
            return (p.at(ip, j) - p.at(im, j)) / (2 * g.dx1());
        }
        const int jp = (j + 1) % g.n2, jm = (j + g.n2 - 1) % g.n2;
        return (p.at(i, jp) - p.at(i, jm)) / (2 * g.dx2());
    };

    GaugeNormalization out;
    out.psi = ScalarField(g);
    out.grad_psi = VectorField(g);
    for (int m = 0; m < g.nn; ++m) {
        const double z = g.z(m);
        const double w0 = z * eta0(z), wL = (z - L) * etaL(z);
        const double d0 = eta0(z) + z * ddz(eta0, z);
        const double dL = etaL(z) + (z - L) * ddz(etaL, z);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                out.psi.at(i, j, m) = -a.at(i, j) * w0 - b.at(i, j) * wL;
                out.grad_psi.c1.at(i, j, m) =
                    -ddx(a, i, j, true) * w0 - ddx(b, i, j, true) * wL;
                out.grad_psi.c2.at(i, j, m) =
                    -ddx(a, i, j, false) * w0 - ddx(b, i, j, false) * wL;
                out.grad_psi.c3.at(i, j, m) = -a.at(i, j) * d0 - b.at(i, j) * dL;
            }
    }
    out.A_new = VectorField(g);
    for (size_t p = 0; p < out.A_new.c1.v.size(); ++p) {
        out.A_new.c1.v[p] = A.c1.v[p] + out.grad_psi.c1.v[p];
        out.A_new.c2.v[p] = A.c2.v[p] + out.grad_psi.c2.v[p];
        out.A_new.c3.v[p] = A.c3.v[p] + out.grad_psi.c3.v[p];
    }
    out.A_new.support = A.support;
    return out;
}

VectorField gauge_transform(const VectorField& A, const ScalarField& psi) {
    if (!A.grid.same_as(psi.grid)) throw GridMismatch("gauge_transform: grids differ");
    VectorField grad = gradient(psi);
    VectorField out(A.grid);
    for (size_t p = 0; p < out.c1.v.size(); ++p) {
        out.c1.v[p] = A.c1.v[p] + grad.c1.v[p];
        out.c2.v[p] = A.c2.v[p] + grad.c2.v[p];
        out.c3.v[p] = A.c3.v[p] + grad.c3.v[p];
    }
    out.support = A.support;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// z-trapezoid with the plane rows of the integrand filled by quadratic
// extrapolation (operator applications leave them empty)
cplx slab_integral(const SlabGrid& g, const std::vector<cplx>& w) {
    cplx s(0);
    const size_t plane = size_t(g.n1) * g.n2;
    for (int m = 1; m < g.nn - 1; ++m)
        for (size_t p = 0; p < plane; ++p) s += w[size_t(m) * plane + p];
    for (size_t p = 0; p < plane; ++p) {
        const cplx bot = 2.0 * w[plane + p] - w[2 * plane + p];
        const cplx top =
            2.0 * w[(size_t(g.nn) - 2) * plane + p] - w[(size_t(g.nn) - 3) * plane + p];
        s += 0.5 * (bot + top);
    }
    return s * (g.dx1() * g.dx2() * g.dz());
}

VectorField conj_field(const VectorField& A) {
    VectorField out(A.grid);
    for (size_t p = 0; p < out.c1.v.size(); ++p) {
        out.c1.v[p] = std::conj(A.c1.v[p]);
        out.c2.v[p] = std::conj(A.c2.v[p]);
        out.c3.v[p] = std::conj(A.c3.v[p]);
    }
    return out;
}

ScalarField conj_field(const ScalarField& q) {
    ScalarField out(q.grid);
    for (size_t p = 0; p < out.v.size(); ++p) out.v[p] = std::conj(q.v[p]);
    return out;
}

}  // namespace

double green_defect_slab(const ScalarField& u, const ScalarField& v, const VectorField& A,
                         const ScalarField& q, double k) {
    const SlabGrid& g = u.grid;
    MagneticOperator op(g, A, q);
    MagneticOperator op_bar(g, conj_field(A), conj_field(q));

    const ScalarField Lu = op.apply(u, cplx(k * k));
    const ScalarField Lv = op_bar.apply(v, cplx(k * k));
    std::vector<cplx> w1(g.size()), w2(g.size());
    for (size_t p = 0; p < g.size(); ++p) {
        w1[p] = Lv.v[p] * std::conj(u.v[p]);
        w2[p] = v.v[p] * std::conj(Lu.v[p]);
    }
    const cplx t1 = slab_integral(g, w1);
    const cplx t2 = slab_integral(g, w2);
    cplx t3(0);
    const int N = g.nn - 1;
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i) {
            const cplx dv = (25.0 * v.at(i, j, N) - 48.0 * v.at(i, j, N - 1) +
                             36.0 * v.at(i, j, N - 2) - 16.0 * v.at(i, j, N - 3) +
                             3.0 * v.at(i, j, N - 4)) /
                            (12.0 * g.dz());
            t3 += dv * std::conj(u.at(i, j, N));
        }
    t3 *= g.dx1() * g.dx2();
    const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), 1e-300});
    return std::abs(t1 - t2 + t3) / scale;
}

double green_defect_ball(const ScalarField& u, const ScalarField& v, const VectorField& A,
                         const ScalarField& q, const SupportBall& ball) {
    const SlabGrid& g = u.grid;
    MagneticOperator op(g, A, q);
    MagneticOperator op_bar(g, conj_field(A), conj_field(q));
    const ScalarField Lu = op.apply(u, cplx(0));
    const ScalarField Lv = op_bar.apply(v, cplx(0));

    auto inside = [&](Vec3 p) { return norm(p - ball.center) <= ball.radius; };
    cplx vol(0);
    const double cell = g.dx1() * g.dx2() * g.dz();
    const double h = std::max({g.dx1(), g.dx2(), g.dz()});
    for (int m = 1; m < g.nn - 1; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 p{g.x1(i), g.x2(j), g.z(m)};
                const double dist = norm(p - ball.center) - ball.radius;
                double w;
                if (dist < -h)
                    w = 1.0;
                else if (dist > h)
                    w = 0.0;
                else {
                    int cnt = 0;
                    for (int a = 0; a < 6; ++a)
                        for (int b = 0; b < 6; ++b)
                            for (int c = 0; c < 6; ++c)
                                cnt += inside({p.x + (a - 2.5) * g.dx1() / 6,
                                               p.y + (b - 2.5) * g.dx2() / 6,
                                               p.z + (c - 2.5) * g.dz() / 6});
                    w = cnt / 216.0;
                }
                if (w == 0.0) continue;
                const size_t idx = g.idx(i, j, m);
                vol += w * (Lu.v[idx] * std::conj(v.v[idx]) - u.v[idx] * std::conj(Lv.v[idx]));
            }
    vol *= cell;

    auto disc_term = [&](BoundaryPlaneId plane) -> cplx {
        const double zp = plane == BoundaryPlaneId::Gamma1 ? g.L : 0.0;
        const double dzc = std::abs(ball.center.z - zp);
        if (dzc >= ball.radius) return cplx(0);
        const double rr = std::sqrt(ball.radius * ball.radius - dzc * dzc);
        PlaneField tu = magnetic_neumann_trace(u, A, plane);
        PlaneField tv = magnetic_neumann_trace(v, conj_field(A), plane);
        PlaneField uu(g.n1, g.n2, g.X), vv(g.n1, g.n2, g.X);
        const int mrow = plane == BoundaryPlaneId::Gamma1 ? g.nn - 1 : 0;
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                uu.at(i, j) = u.at(i, j, mrow);
                vv.at(i, j) = v.at(i, j, mrow);
            }
        const int nr = 48, nt = 96;
        cplx s(0);
        for (int ir = 0; ir < nr; ++ir) {
            const double r = rr * (ir + 0.5) / nr;
            for (int it = 0; it < nt; ++it) {
                const double th = 2 * kPi * it / nt;
                const double x = ball.center.x + r * std::cos(th);
                const double y = ball.center.y + r * std::sin(th);
                const cplx du = bicubic_sample(tu, x, y), dv = bicubic_sample(tv, x, y);
                const cplx su = bicubic_sample(uu, x, y), sv = bicubic_sample(vv, x, y);
                s += (su * std::conj(dv) - du * std::conj(sv)) * r;
            }
        }
        return s * (rr / nr) * (2 * kPi / nt);
    };
    const cplx discs =
        disc_term(BoundaryPlaneId::Gamma1) + disc_term(BoundaryPlaneId::Gamma2);

    const int ntheta = 64, nphi = 128;
    cplx belt(0);
    const double hstep = 0.75 * std::min({g.dx1(), g.dx2(), g.dz()});
    for (int a = 0; a < ntheta; ++a) {
        const double th = kPi * (a + 0.5) / ntheta;
        const double z = ball.center.z + ball.radius * std::cos(th);
        if (z <= 0.0 || z >= g.L) continue;
        for (int b = 0; b < nphi; ++b) {
            const double ph = 2 * kPi * b / nphi;
            const Vec3 n{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                         std::cos(th)};
            const Vec3 p = ball.center + ball.radius * n;
            auto dn = [&](const ScalarField& f) {
                const cplx fp = tricubic_sample(f, p + hstep * n);
                const cplx fm = tricubic_sample(f, p + (-hstep) * n);
                return (fp - fm) / (2 * hstep);
            };
            const cplx su = tricubic_sample(u, p), sv = tricubic_sample(v, p);
            const cplx Adotn = tricubic_sample(A.c1, p) * n.x +
                               tricubic_sample(A.c2, p) * n.y +
                               tricubic_sample(A.c3, p) * n.z;
            const cplx du = dn(u) + kImag * Adotn * su;
            const cplx dv = dn(v) + kImag * std::conj(Adotn) * sv;
            belt += (su * std::conj(dv) - du * std::conj(sv)) *
                    (ball.radius * ball.radius * std::sin(th));
        }
    }
    belt *= (kPi / ntheta) * (2 * kPi / nphi);

    const cplx surface = discs + belt;
    const double scale = std::max({std::abs(vol), std::abs(surface), 1e-300});
    return std::abs(vol - surface) / scale;
}

// ---------------------------------------------------------------------------

namespace {

// Jacobi sweeps for the eigenvalues of a small Hermitian matrix.
std::vector<double> small_hermitian_eigs(std::vector<cplx> H, int n) {
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += std::norm(H[size_t(i) * n + j]);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const cplx hpq = H[size_t(p) * n + q];
                if (std::abs(hpq) < 1e-15) continue;
                const double app = H[size_t(p) * n + p].real();
                const double aqq = H[size_t(q) * n + q].real();
                const double theta = 0.5 * std::atan2(2.0 * std::abs(hpq), aqq - app);
                const cplx phase = hpq / std::abs(hpq);
                const double c = std::cos(theta);
                const cplx s = std::sin(theta) * phase;
                for (int r = 0; r < n; ++r) {
                    const cplx hrp = H[size_t(r) * n + p], hrq = H[size_t(r) * n + q];
                    H[size_t(r) * n + p] = c * hrp - std::conj(s) * hrq;
                    H[size_t(r) * n + q] = s * hrp + c * hrq;
                }
                for (int r = 0; r < n; ++r) {
                    const cplx hpr = H[size_t(p) * n + r], hqr = H[size_t(q) * n + r];
                    H[size_t(p) * n + r] = c * hpr - s * hqr;
                    H[size_t(q) * n + r] = std::conj(s) * hpr + c * hqr;
                }
            }
    }
    std::vector<double> ev(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) ev[size_t(i)] = H[size_t(i) * n + i].real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

std::vector<double> subspace_iterate(const MagneticOperator& op,
                                     const std::function<void(std::vector<cplx>&)>& inv,
                                     int count, int iters) {
    const SlabGrid& g = op.grid();
    const size_t n = g.size();
    const int dim = count + 2;
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<std::vector<cplx>> X(size_t(dim), std::vector<cplx>(n, cplx(0)));
    const size_t plane = size_t(g.n1) * g.n2;
    for (auto& x : X)
        for (size_t p = plane; p < n - plane; ++p) x[p] = cplx(uni(rng), uni(rng));

    auto orthonormalize = [&] {
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < i; ++j) {
                cplx d(0);
                for (size_t p = 0; p < n; ++p)
                    d += std::conj(X[size_t(j)][p]) * X[size_t(i)][p];
                for (size_t p = 0; p < n; ++p) X[size_t(i)][p] -= d * X[size_t(j)][p];
            }
            double nn = 0;
            for (size_t p = 0; p < n; ++p) nn += std::norm(X[size_t(i)][p]);
            nn = std::sqrt(nn);
            for (size_t p = 0; p < n; ++p) X[size_t(i)][p] /= nn;
        }
    };

    orthonormalize();
    for (int it = 0; it < iters; ++it) {
        for (auto& x : X) inv(x);
        orthonormalize();
    }
    std::vector<cplx> H(size_t(dim) * dim, cplx(0));
    std::vector<cplx> Lx(n);
    for (int i = 0; i < dim; ++i) {
        op.apply(X[size_t(i)], Lx, cplx(0));
        for (int j = 0; j < dim; ++j) {
            cplx d(0);
            for (size_t p = 0; p < n; ++p) d += std::conj(X[size_t(j)][p]) * Lx[p];
            H[size_t(j) * dim + i] = d;
        }
    }
    std::vector<double> ev = small_hermitian_eigs(std::move(H), dim);
    ev.resize(size_t(count));
    return ev;
}

}  // namespace

std::vector<double> probe_free_spectrum(const SlabGrid& g, int count, int iters) {
    MagneticOperator op(g);
    SlabSpectral sp(g);
    auto inv = [&](std::vector<cplx>& x) { sp.solve_shifted(x, cplx(0)); };
    return subspace_iterate(op, inv, count, iters);
}

std::vector<double> probe_discrete_spectrum(const VectorField& A, const ScalarField& q,
                                            int count, int iters) {
    const SlabGrid& g = A.grid;
    auto op = std::make_shared<MagneticOperator>(g, A, q);
    double qmax = 0;
    for (const auto& z : q.v) qmax = std::max(qmax, std::abs(z));
    const cplx sigma(-qmax - 1.0, 0.0);
    InteriorResolvent rz(op, sigma, 1e-8);
    auto inv = [&](std::vector<cplx>& x) {
        ScalarField f(g);
        f.v = x;
        x = rz.apply(f).v;
    };
    return subspace_iterate(*op, inv, count, iters);
}

}  // namespace slabinv
