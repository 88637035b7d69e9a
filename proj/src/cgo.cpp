#include "slabinv/cgo.hpp"

#include <cmath>

#include "slabinv/fft.hpp"
#include "slabinv/interp.hpp"
#include "slabinv/krylov.hpp"

namespace slabinv {

namespace {

double expbump(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
double smoothstep(double t) {
    const double a = expbump(t), b = expbump(1.0 - t);
    return a / (a + b);
}

void check_unit(Vec3 v, const char* name) {
    if (std::abs(norm(v) - 1.0) > 1e-12)
        throw ConstraintViolation(std::string("frequency set: |") + name + "| != 1");
}

}  // namespace

CgoFrequencySet make_zetas(Vec3 xi, Vec3 mu1, Vec3 mu2, double h, CgoVariant variant) {
    check_unit(mu1, "mu1");
    check_unit(mu2, "mu2");
    if (std::abs(dot(mu1, mu2)) > 1e-12)
        throw ConstraintViolation("frequency set: mu1.mu2 != 0");
    if (std::abs(dot(mu1, xi)) > 1e-12 * std::max(1.0, norm(xi)))
        throw ConstraintViolation("frequency set: mu1.xi != 0");
    if (std::abs(dot(mu2, xi)) > 1e-12 * std::max(1.0, norm(xi)))
        throw ConstraintViolation("frequency set: mu2.xi != 0");
    if (!(h > 0) || h * norm(xi) >= 2.0)
        throw ConstraintViolation("frequency set: need 0 < h|xi| < 2");
    if (variant == CgoVariant::Thm1 || variant == CgoVariant::QRecov3) {
        if (!(mu2.z > 0))
            throw ConstraintViolation("frequency set: variant needs mu2_n > 0");
    } else {
        if (std::abs(mu2.z) > 1e-12)
            throw ConstraintViolation("frequency set: variant needs mu2_n = 0");
        if (std::abs(mu1.z) < 1e-12)
            throw ConstraintViolation("frequency set: variant needs mu1_n != 0");
    }

    CgoFrequencySet fs;
    fs.xi = xi;
    fs.mu1 = mu1;
    fs.mu2 = mu2;
    fs.h = h;
    fs.variant = variant;
    const double root = std::sqrt(1.0 - h * h * dot(xi, xi) / 4.0);
    for (int c = 0; c < 3; ++c) {
        fs.zeta1[c] = cplx(mu2[c], h * xi[c] / 2.0 + root * mu1[c]);
        fs.zeta2[c] = cplx(-mu2[c], -h * xi[c] / 2.0 + root * mu1[c]);
    }
    return fs;
}

Vec3 mu1_recipe_vector(Vec3 xi, CgoVariant variant, int j, int k) {
    if (variant == CgoVariant::Thm1 || variant == CgoVariant::Thm2) {
        if (j < 1 || j > 3 || k < 1 || k > 3 || j == k)
            throw ConstraintViolation("recipe needs distinct axes j, k in 1..3");
        Vec3 v{0, 0, 0};
        v[j - 1] = -xi[k - 1];
        v[k - 1] = xi[j - 1];
        return v;
    }
    throw ConstraintViolation("mu1_recipe_vector: curl recipes only");
}

std::pair<Vec3, Vec3> choose_mus(Vec3 xi, CgoVariant variant, int j, int k,
                                 double cone_theta) {
    const double xin = norm(xi);
    if (xin < 1e-12) throw OutsideRecipeCone("xi = 0 has no recipe directions");

    switch (variant) {
        case CgoVariant::Thm1: {
            Vec3 m1 = mu1_recipe_vector(xi, variant, j, k);
            const double m1n = norm(m1);
            if (m1n < 1e-12 * xin)
                throw OutsideRecipeCone("mu1 recipe vector vanishes for this xi");
            Vec3 m2{0, 0, 0};
            if (j != 3 && k != 3) {
                m2[j - 1] = -xi[j - 1] * xi.z;
                m2[k - 1] = -xi[k - 1] * xi.z;
                m2.z = xi[j - 1] * xi[j - 1] + xi[k - 1] * xi[k - 1];
            } else {
                const int jt = (j == 3) ? k : j;  // the tangential axis of the pair
                const int l = 3 - jt;             // remaining in-plane axis (1<->2)
                m2[l - 1] = -(xi[jt - 1] * xi[jt - 1] + xi.z * xi.z);
                m2[jt - 1] = xi[l - 1] * xi[jt - 1];
                m2.z = xi[l - 1] * xi.z;
            }
            const double m2n = norm(m2);
            if (m2n < 1e-12 * xin * xin)
                throw OutsideRecipeCone("mu2 companion vanishes for this xi");
            if (m2.z < 0) m2 = -1.0 * m2;  // the construction fixes mu2 only up to sign
            if (!(m2.z / m2n > std::max(cone_theta, 1e-9)))
                throw OutsideRecipeCone("mu2_n too small: xi outside the decay cone");
            return {(1.0 / m1n) * m1, (1.0 / m2n) * m2};
        }
        case CgoVariant::Thm2:
        case CgoVariant::QRecov4: {
            const double rho = std::hypot(xi.x, xi.y);
            if (!(rho > std::max(cone_theta * xin, 1e-12)))
                throw OutsideRecipeCone("xi too close to the normal axis");
            const Vec3 m2{-xi.y / rho, xi.x / rho, 0.0};
            Vec3 m1{-xi.x * xi.z, -xi.y * xi.z, rho * rho};
            return {normalized(m1), m2};
        }
        case CgoVariant::QRecov3: {
            if (std::abs(xi.y) < 1e-12)
                throw OutsideRecipeCone("recipe needs xi_2 != 0");
            Vec3 m2{0.0, -xi.z / xi.y, 1.0};
            m2 = normalized(m2);
            if (m2.z < 0) m2 = -1.0 * m2;
            if (!(m2.z > std::max(cone_theta, 1e-9)))
                throw OutsideRecipeCone("mu2_n too small: xi outside the decay cone");
            Vec3 m1 = cross(m2, (1.0 / xin) * xi);
            const double m1n = norm(m1);
            if (m1n < 1e-9) throw OutsideRecipeCone("degenerate direction pair");
            return {(1.0 / m1n) * m1, m2};
        }
    }
    throw ConstraintViolation("unknown variant");
}

// ---------------------------------------------------------------------------

MollifiedPotential mollify(const ExtendedVectorField& A, double eps) {
    const BoxGrid& g = A.grid;
    if (!(eps > 0)) throw ConstraintViolation("mollify: eps must be positive");

    MollifiedPotential out;
    out.grid = g;
    out.eps = eps;
    out.sharp.grid = g;
    out.flat.grid = g;

    auto taps = [&](double d) {
        const int m = std::max(1, int(std::floor(eps / d)));
        std::vector<double> w(size_t(2 * m + 1));
        double s = 0;
        for (int o = -m; o <= m; ++o) {
            const double t = o * d / eps;
            w[size_t(o + m)] = t * t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
            s += w[size_t(o + m)];
        }
        for (auto& v : w) v /= s;
        return w;
    };
    const auto wx = taps(g.dx1()), wy = taps(g.dx2()), wz = taps(g.dz());

    auto convolve = [&](const std::vector<cplx>& in) {
        std::vector<cplx> a = in, b(in.size());
        const int mx = (int(wx.size()) - 1) / 2, my = (int(wy.size()) - 1) / 2,
                  mz = (int(wz.size()) - 1) / 2;
        for (int m = 0; m < g.nz; ++m)
            for (int jj = 0; jj < g.n2; ++jj)
                for (int i = 0; i < g.n1; ++i) {
                    cplx s(0);
                    for (int o = -mx; o <= mx; ++o)
                        s += wx[size_t(o + mx)] * a[g.idx((i + o + g.n1) % g.n1, jj, m)];
                    b[g.idx(i, jj, m)] = s;
                }
        std::swap(a, b);
        for (int m = 0; m < g.nz; ++m)
            for (int jj = 0; jj < g.n2; ++jj)
                for (int i = 0; i < g.n1; ++i) {
                    cplx s(0);
                    for (int o = -my; o <= my; ++o)
                        s += wy[size_t(o + my)] * a[g.idx(i, (jj + o + g.n2) % g.n2, m)];
                    b[g.idx(i, jj, m)] = s;
                }
        std::swap(a, b);
        for (int m = 0; m < g.nz; ++m)
            for (int jj = 0; jj < g.n2; ++jj)
                for (int i = 0; i < g.n1; ++i) {
                    cplx s(0);
                    for (int o = -mz; o <= mz; ++o) {
                        const int mm = m + o;
                        if (mm < 0 || mm >= g.nz) continue;
                        s += wz[size_t(o + mz)] * a[g.idx(i, jj, mm)];
                    }
                    b[g.idx(i, jj, m)] = s;
                }
        return b;
    };

    for (int c = 0; c < 3; ++c) {
        const ExtendedField& src = A.comp(c);
        ExtendedField& sh = out.sharp.comp(c);
        ExtendedField& fl = out.flat.comp(c);
        sh.grid = g;
        fl.grid = g;
        sh.v = convolve(src.v);
        fl.v.resize(src.v.size());
        for (size_t p = 0; p < src.v.size(); ++p) {
            fl.v[p] = src.v[p] - sh.v[p];
            out.flat_sup = std::max(out.flat_sup, std::abs(fl.v[p]));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

PhaseField cauchy_phase(const ExtendedVectorField& A, CVec3 zeta0,
                        const CauchyPhaseOptions& opt) {
    const BoxGrid& g = A.grid;
    const Vec3 re{zeta0.x.real(), zeta0.y.real(), zeta0.z.real()};
    const Vec3 im{zeta0.x.imag(), zeta0.y.imag(), zeta0.z.imag()};
    if (std::abs(norm(re) - 1.0) > 1e-10 || std::abs(norm(im) - 1.0) > 1e-10 ||
        std::abs(dot(re, im)) > 1e-10)
        throw ConstraintViolation("cauchy_phase: Re/Im of zeta0 must be orthonormal");

    std::vector<cplx> f(g.size());
    double sup_a = 0;
    for (int m = 0; m < g.nz; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const size_t p = g.idx(i, j, m);
                const cplx za =
                    zeta0.x * A.c1.v[p] + zeta0.y * A.c2.v[p] + zeta0.z * A.c3.v[p];
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                const double r = norm(x - opt.chi_center);
                const double chi =
                    smoothstep((opt.chi_outer - r) / (opt.chi_outer - opt.chi_inner));
                f[p] = za * chi;
                sup_a = std::max(sup_a, std::abs(za));
            }

    PhaseField out;
    out.grid = g;
    out.zeta0 = zeta0;
    out.region_center = opt.chi_center;
    out.region_radius = opt.eval_radius;
    out.phi.assign(g.size(), cplx(0));
    out.g1.assign(g.size(), cplx(0));
    out.g2.assign(g.size(), cplx(0));
    out.g3.assign(g.size(), cplx(0));
    if (sup_a == 0.0) {
        out.transport_residual = 0;
        return out;
    }

    const Vec3 e3 = cross(re, im);
    const double hr = opt.rot_spacing;
    const double Wp = std::max(opt.eval_radius, opt.chi_outer) + 2 * hr;
    const double W3 = opt.chi_outer + 2 * hr;
    const int np = 2 * int(std::ceil(Wp / hr)) + 1;
    const int n3 = 2 * int(std::ceil(W3 / hr)) + 1;
    int P = 4 * np;
    P += P % 2;

    auto rot_to_box = [&](double y1, double y2, double y3) {
        return opt.chi_center + y1 * re + y2 * im + y3 * e3;
    };

    std::vector<cplx> phi_rot(size_t(np) * np * n3, cplx(0));
    parallel_for(size_t(n3), [&](size_t s3) {
        const double y3 = (int(s3) - (n3 - 1) / 2) * hr;
        std::vector<cplx> pad(size_t(P) * P, cplx(0));
        bool any = false;
        for (int b = 0; b < np; ++b)
            for (int a = 0; a < np; ++a) {
                const double y1 = (a - (np - 1) / 2) * hr;
                const double y2 = (b - (np - 1) / 2) * hr;
                const Vec3 x = rot_to_box(y1, y2, y3);
                if (std::abs(x.x) >= g.X - g.dx1() || std::abs(x.y) >= g.X - g.dx2() ||
                    x.z <= g.z0 || x.z >= g.z1)
                    continue;
                const cplx v = tricubic_sample(f, g.n1, g.n2, g.nz, -g.X, -g.X, g.z0,
                                               g.dx1(), g.dx2(), g.dz(), x);
                if (v != cplx(0)) any = true;
                pad[size_t(b) * P + a] = v;
            }
        if (!any) return;
        fft2(pad, P, P, true);
        for (int b = 0; b < P; ++b) {
            const int mb = b <= P / 2 ? b : b - P;
            const double xi2 = 2.0 * kPi * mb / (P * hr);
            for (int a = 0; a < P; ++a) {
                const int ma = a <= P / 2 ? a : a - P;
                const double xi1 = 2.0 * kPi * ma / (P * hr);
                pad[size_t(b) * P + a] = (ma == 0 && mb == 0)
                                             ? cplx(0)
                                             : -pad[size_t(b) * P + a] / cplx(xi1, xi2);
            }
        }
        fft2(pad, P, P, false);
        for (int b = 0; b < np; ++b)
            for (int a = 0; a < np; ++a)
                phi_rot[(s3 * np + b) * np + a] = pad[size_t(b) * P + a];
    });

    parallel_for(size_t(g.nz), [&](size_t mz) {
        const int m = int(mz);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                const Vec3 d = x - opt.chi_center;
                if (norm(d) > opt.eval_radius) continue;
                const Vec3 y{dot(d, re), dot(d, im), dot(d, e3)};
                out.phi[g.idx(i, j, m)] = tricubic_sample(
                    phi_rot, np, np, n3, -(np - 1) / 2.0 * hr, -(np - 1) / 2.0 * hr,
                    -(n3 - 1) / 2.0 * hr, hr, hr, hr, y);
            }
    });

    for (int m = 1; m < g.nz - 1; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const int ip = (i + 1) % g.n1, iq = (i + g.n1 - 1) % g.n1;
                const int jp = (j + 1) % g.n2, jq = (j + g.n2 - 1) % g.n2;
                out.g1[g.idx(i, j, m)] =
                    (out.phi[g.idx(ip, j, m)] - out.phi[g.idx(iq, j, m)]) / (2 * g.dx1());
                out.g2[g.idx(i, j, m)] =
                    (out.phi[g.idx(i, jp, m)] - out.phi[g.idx(i, jq, m)]) / (2 * g.dx2());
                out.g3[g.idx(i, j, m)] =
                    (out.phi[g.idx(i, j, m + 1)] - out.phi[g.idx(i, j, m - 1)]) /
                    (2 * g.dz());
            }

    double res = 0;
    const double rmargin = opt.eval_radius - 3 * std::max({g.dx1(), g.dx2(), g.dz()});
    for (int m = 2; m < g.nz - 2; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                if (norm(x - opt.chi_center) > rmargin) continue;
                const size_t p = g.idx(i, j, m);
                const cplx t = zeta0.x * out.g1[p] + zeta0.y * out.g2[p] +
                               zeta0.z * out.g3[p] + kImag * f[p];
                res = std::max(res, std::abs(t));
            }
    out.transport_residual = res / sup_a;
    return out;
}

// ---------------------------------------------------------------------------

CgoAmplitude CgoAmplitude::one(const BoxGrid& g) {
    CgoAmplitude a;
    a.grid = g;
    a.val.assign(g.size(), cplx(1));
    a.g1.assign(g.size(), cplx(0));
    a.g2 = a.g1;
    a.g3 = a.g1;
    return a;
}

CgoAmplitude CgoAmplitude::from_phase(const PhaseField& phase, cplx scale) {
    CgoAmplitude a;
    a.grid = phase.grid;
    const size_t n = phase.phi.size();
    a.val.resize(n);
    a.g1.resize(n);
    a.g2.resize(n);
    a.g3.resize(n);
    for (size_t p = 0; p < n; ++p) {
        a.val[p] = std::exp(scale * phase.phi[p]);
        a.g1[p] = scale * phase.g1[p] * a.val[p];
        a.g2[p] = scale * phase.g2[p] * a.val[p];
        a.g3[p] = scale * phase.g3[p] * a.val[p];
    }
    return a;
}

void CgoAmplitude::multiply(const CgoAmplitude& o) {
    if (!grid.same_as(o.grid)) throw GridMismatch("amplitude grids differ");
    for (size_t p = 0; p < val.size(); ++p) {
        g1[p] = g1[p] * o.val[p] + val[p] * o.g1[p];
        g2[p] = g2[p] * o.val[p] + val[p] * o.g2[p];
        g3[p] = g3[p] * o.val[p] + val[p] * o.g3[p];
        val[p] *= o.val[p];
    }
}

CgoAmplitude amplitude_exp_on(const BoxGrid& target, const PhaseField& phase, cplx scale,
                              bool conjugate) {
    const BoxGrid& src = phase.grid;
    if (target.n1 != src.n1 || target.n2 != src.n2 ||
        std::abs(target.dz() - src.dz()) > 1e-14)
        throw GridMismatch("amplitude_exp_on: incompatible grids");
    CgoAmplitude a;
    a.grid = target;
    const size_t n = target.size();
    a.val.resize(n);
    for (int m = 0; m < target.nz; ++m) {
        // fold the target height into the source range across the slab planes
        double z = target.z(m);
        if (z < src.z0) z = 2 * src.z0 - z;
        if (z > src.z1) z = 2 * src.z1 - z;
        const int ms = std::clamp(int(std::lround((z - src.z0) / src.dz())), 0, src.nz - 1);
        for (int j = 0; j < target.n2; ++j)
            for (int i = 0; i < target.n1; ++i) {
                cplx ph = phase.phi[src.idx(i, j, ms)];
                if (conjugate) ph = std::conj(ph);
                a.val[target.idx(i, j, m)] = std::exp(scale * ph);
            }
    }
    a.g1.assign(n, cplx(0));
    a.g2.assign(n, cplx(0));
    a.g3.assign(n, cplx(0));
    const BoxGrid& g = target;
    for (int m = 1; m < g.nz - 1; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const int ip = (i + 1) % g.n1, iq = (i + g.n1 - 1) % g.n1;
                const int jp = (j + 1) % g.n2, jq = (j + g.n2 - 1) % g.n2;
                a.g1[g.idx(i, j, m)] =
                    (a.val[g.idx(ip, j, m)] - a.val[g.idx(iq, j, m)]) / (2 * g.dx1());
                a.g2[g.idx(i, j, m)] =
                    (a.val[g.idx(i, jp, m)] - a.val[g.idx(i, jq, m)]) / (2 * g.dx2());
                a.g3[g.idx(i, j, m)] =
                    (a.val[g.idx(i, j, m + 1)] - a.val[g.idx(i, j, m - 1)]) / (2 * g.dz());
            }
    return a;
}

// ---------------------------------------------------------------------------

double weighted_cgo_residual(const ExtendedVectorField& A, const ExtendedField& q,
                             const CgoAmplitude& a, CVec3 zeta, double h, double k,
                             Vec3 region_center, double region_radius) {
    const BoxGrid& g = A.grid;
    // P_h a = h^2 (-Lap a + 2 A.D a + (q + A.A - i div A - k^2) a)
    //         - 2 i h zeta.(D a + A a),   D = -i grad;
    // the conjugating exponential never appears numerically.
    const double i1 = 1.0 / (g.dx1() * g.dx1());
    const double i2 = 1.0 / (g.dx2() * g.dx2());
    const double i3 = 1.0 / (g.dz() * g.dz());
    double acc = 0;
    for (int m = 2; m < g.nz - 2; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                if (norm(x - region_center) > region_radius) continue;
                const size_t p = g.idx(i, j, m);
                const int ip = (i + 1) % g.n1, iq = (i + g.n1 - 1) % g.n1;
                const int jp = (j + 1) % g.n2, jq = (j + g.n2 - 1) % g.n2;
                const cplx lap =
                    (a.val[g.idx(ip, j, m)] - 2.0 * a.val[p] + a.val[g.idx(iq, j, m)]) * i1 +
                    (a.val[g.idx(i, jp, m)] - 2.0 * a.val[p] + a.val[g.idx(i, jq, m)]) * i2 +
                    (a.val[g.idx(i, j, m + 1)] - 2.0 * a.val[p] +
                     a.val[g.idx(i, j, m - 1)]) *
                        i3;
                const cplx A1 = A.c1.v[p], A2 = A.c2.v[p], A3 = A.c3.v[p];
                const cplx divA =
                    (A.c1.v[g.idx(ip, j, m)] - A.c1.v[g.idx(iq, j, m)]) / (2 * g.dx1()) +
                    (A.c2.v[g.idx(i, jp, m)] - A.c2.v[g.idx(i, jq, m)]) / (2 * g.dx2()) +
                    (A.c3.v[g.idx(i, j, m + 1)] - A.c3.v[g.idx(i, j, m - 1)]) / (2 * g.dz());
                const cplx Lterm =
                    -lap - 2.0 * kImag * (A1 * a.g1[p] + A2 * a.g2[p] + A3 * a.g3[p]) +
                    (q.v[p] - kImag * divA + A1 * A1 + A2 * A2 + A3 * A3 - k * k) *
                        a.val[p];
                const cplx zdotDa =
                    -kImag * (zeta.x * a.g1[p] + zeta.y * a.g2[p] + zeta.z * a.g3[p]);
                const cplx zdotAa = (zeta.x * A1 + zeta.y * A2 + zeta.z * A3) * a.val[p];
                acc += std::norm(h * h * Lterm - 2.0 * kImag * h * (zdotDa + zdotAa));
            }
    return std::sqrt(acc * g.dx1() * g.dx2() * g.dz());
}

namespace {

struct ReflectedIndices {
    int fwd;
    int bwd;
};

ReflectedIndices ext_indices(int m, int nn, ReflectionPlane plane) {
    if (plane == ReflectionPlane::Bottom) return {nn - 1 + m, nn - 1 - m};
    return {m, 2 * (nn - 1) - m};
}

CgoField build_reflected(const ExtendedVectorField& Aext, const ExtendedField& qext,
                         const CgoFrequencySet& fs, double k, CVec3 zeta,
                         ReflectionPlane plane, const CgoAmplitude& amp,
                         const std::vector<cplx>* remainder) {
    const BoxGrid& bg = Aext.grid;
    SlabGrid g;
    g.X = bg.X;
    g.n1 = bg.n1;
    g.n2 = bg.n2;
    g.nn = (bg.nz + 1) / 2;
    g.L = (bg.z1 - bg.z0) / 2.0;

    CgoField out;
    out.grid = g;
    out.fs = fs;
    out.plane = plane;
    out.u.assign(g.size(), cplx(0));

    const double ih = 1.0 / fs.h;
    for (int m = 0; m < g.nn; ++m) {
        const auto [mf, mb] = ext_indices(m, g.nn, plane);
        const double zf = bg.z(mf), zb = bg.z(mb);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const double x1 = g.x1(i), x2 = g.x2(j);
                const cplx ef = std::exp((x1 * zeta.x + x2 * zeta.y + zf * zeta.z) * ih);
                const cplx eb = std::exp((x1 * zeta.x + x2 * zeta.y + zb * zeta.z) * ih);
                cplx af = amp.val[bg.idx(i, j, mf)];
                cplx ab = amp.val[bg.idx(i, j, mb)];
                if (remainder) {
                    af += (*remainder)[bg.idx(i, j, mf)];
                    ab += (*remainder)[bg.idx(i, j, mb)];
                }
                out.u[g.idx(i, j, m)] = ef * af - eb * ab;
            }
    }
    const int m_trace = plane == ReflectionPlane::Bottom ? 0 : g.nn - 1;
    for (int j = 0; j < g.n2; ++j)
        for (int i = 0; i < g.n1; ++i)
            out.trace_max = std::max(out.trace_max, std::abs(out.u[g.idx(i, j, m_trace)]));

    const Vec3 center{0, 0, 0.5 * (bg.z0 + bg.z1)};
    out.weighted_residual =
        weighted_cgo_residual(Aext, qext, amp, zeta, fs.h, k, center,
                              std::hypot(bg.X, 0.5 * (bg.z1 - bg.z0)));
    return out;
}

}  // namespace

CgoField build_reflected_u1(const ExtendedVectorField& A1ext, const ExtendedField& q1ext,
                            const CgoFrequencySet& fs, double k,
                            const CgoAmplitude& amplitude,
                            const std::vector<cplx>* remainder) {
    return build_reflected(A1ext, q1ext, fs, k, fs.zeta1, ReflectionPlane::Bottom,
                           amplitude, remainder);
}

CgoField build_reflected_u2(const ExtendedVectorField& A2ext_conj,
                            const ExtendedField& q2ext_conj, const CgoFrequencySet& fs,
                            double k, const CgoAmplitude& amplitude,
                            const std::vector<cplx>* remainder) {
    const ReflectionPlane plane =
        fs.variant == CgoVariant::Thm1 ? ReflectionPlane::Top : ReflectionPlane::Bottom;
    return build_reflected(A2ext_conj, q2ext_conj, fs, k, fs.zeta2, plane, amplitude,
                           remainder);
}

// ---------------------------------------------------------------------------

ExtendedScenario extend_for_variant(const VectorField& A1, const ScalarField& q1,
                                    const VectorField& A2, const ScalarField& q2,
                                    CgoVariant variant) {
    ExtendedScenario sc;
    sc.plane2 =
        variant == CgoVariant::Thm1 ? ReflectionPlane::Top : ReflectionPlane::Bottom;
    sc.A1 = reflect_extend(A1, ReflectionPlane::Bottom);
    sc.q1 = reflect_extend(q1, ReflectionPlane::Bottom, Parity::Even);
    sc.grid1 = sc.A1.grid;

    VectorField A2c(A2.grid);
    ScalarField q2c(q2.grid);
    for (size_t p = 0; p < A2c.c1.v.size(); ++p) {
        A2c.c1.v[p] = std::conj(A2.c1.v[p]);
        A2c.c2.v[p] = std::conj(A2.c2.v[p]);
        A2c.c3.v[p] = std::conj(A2.c3.v[p]);
        q2c.v[p] = std::conj(q2.v[p]);
    }
    sc.A2c = reflect_extend(A2c, sc.plane2);
    sc.q2c = reflect_extend(q2c, sc.plane2, Parity::Even);
    sc.grid2 = sc.A2c.grid;
    return sc;
}

// ---------------------------------------------------------------------------

RemainderResult solve_remainder(const CgoFrequencySet& fs, bool first_factor,
                                const ExtendedVectorField& A, const ExtendedField& q,
                                double k, const CgoAmplitude& a,
                                const MollifiedPotential* moll) {
    (void)moll;
    const BoxGrid& g = A.grid;
    const CVec3 zeta = first_factor ? fs.zeta1 : fs.zeta2;
    const double h = fs.h;
    const double i1 = 1.0 / (g.dx1() * g.dx1());
    const double i2 = 1.0 / (g.dx2() * g.dx2());
    const double i3 = 1.0 / (g.dz() * g.dz());

    auto conj_op = [&](const std::vector<cplx>& r, std::vector<cplx>& out,
                       const std::vector<cplx>* rg1, const std::vector<cplx>* rg2,
                       const std::vector<cplx>* rg3) {
        out.assign(g.size(), cplx(0));
        for (int m = 1; m < g.nz - 1; ++m)
            for (int j = 0; j < g.n2; ++j)
                for (int i = 0; i < g.n1; ++i) {
                    const size_t p = g.idx(i, j, m);
                    const int ip = (i + 1) % g.n1, iq = (i + g.n1 - 1) % g.n1;
                    const int jp = (j + 1) % g.n2, jq = (j + g.n2 - 1) % g.n2;
                    const cplx rx = rg1 ? (*rg1)[p]
                                        : (r[g.idx(ip, j, m)] - r[g.idx(iq, j, m)]) /
                                              (2 * g.dx1());
                    const cplx ry = rg2 ? (*rg2)[p]
                                        : (r[g.idx(i, jp, m)] - r[g.idx(i, jq, m)]) /
                                              (2 * g.dx2());
                    const cplx rz = rg3 ? (*rg3)[p]
                                        : (r[g.idx(i, j, m + 1)] - r[g.idx(i, j, m - 1)]) /
                                              (2 * g.dz());
                    const cplx lap =
                        (r[g.idx(ip, j, m)] - 2.0 * r[p] + r[g.idx(iq, j, m)]) * i1 +
                        (r[g.idx(i, jp, m)] - 2.0 * r[p] + r[g.idx(i, jq, m)]) * i2 +
                        (r[g.idx(i, j, m + 1)] - 2.0 * r[p] + r[g.idx(i, j, m - 1)]) * i3;
                    const cplx A1 = A.c1.v[p], A2 = A.c2.v[p], A3 = A.c3.v[p];
                    const cplx divA =
                        (A.c1.v[g.idx(ip, j, m)] - A.c1.v[g.idx(iq, j, m)]) / (2 * g.dx1()) +
                        (A.c2.v[g.idx(i, jp, m)] - A.c2.v[g.idx(i, jq, m)]) / (2 * g.dx2()) +
                        (A.c3.v[g.idx(i, j, m + 1)] - A.c3.v[g.idx(i, j, m - 1)]) /
                            (2 * g.dz());
                    const cplx Lterm =
                        -lap - 2.0 * kImag * (A1 * rx + A2 * ry + A3 * rz) +
                        (q.v[p] - kImag * divA + A1 * A1 + A2 * A2 + A3 * A3 - k * k) * r[p];
                    const cplx zDr = -kImag * (zeta.x * rx + zeta.y * ry + zeta.z * rz);
                    const cplx zAr = (zeta.x * A1 + zeta.y * A2 + zeta.z * A3) * r[p];
                    out[p] = h * h * Lterm - 2.0 * kImag * h * (zDr + zAr);
                }
    };

    std::vector<cplx> rhs;
    conj_op(a.val, rhs, &a.g1, &a.g2, &a.g3);
    for (auto& v : rhs) v = -v;

    LinearMap Pmap = [&](const std::vector<cplx>& r, std::vector<cplx>& out) {
        conj_op(r, out, nullptr, nullptr, nullptr);
    };
    LinearMap ident = [](const std::vector<cplx>& x, std::vector<cplx>& y) { y = x; };

    RemainderResult res;
    res.r.assign(g.size(), cplx(0));
    KrylovResult kr = gmres(Pmap, ident, rhs, res.r, 1e-6, 80, 1500);
    res.converged = kr.converged;
    res.achieved_residual = kr.residual;
    if (!kr.converged) {
        res.r.assign(g.size(), cplx(0));
        return res;
    }
    double n0 = 0, ngrad = 0;
    for (int m = 1; m < g.nz - 1; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const size_t p = g.idx(i, j, m);
                n0 += std::norm(res.r[p]);
                const int ip = (i + 1) % g.n1, iq = (i + g.n1 - 1) % g.n1;
                const int jp = (j + 1) % g.n2, jq = (j + g.n2 - 1) % g.n2;
                const cplx rx =
                    (res.r[g.idx(ip, j, m)] - res.r[g.idx(iq, j, m)]) / (2 * g.dx1());
                const cplx ry =
                    (res.r[g.idx(i, jp, m)] - res.r[g.idx(i, jq, m)]) / (2 * g.dx2());
                const cplx rz =
                    (res.r[g.idx(i, j, m + 1)] - res.r[g.idx(i, j, m - 1)]) / (2 * g.dz());
                ngrad += h * h * (std::norm(rx) + std::norm(ry) + std::norm(rz));
            }
    const double cell = g.dx1() * g.dx2() * g.dz();
    res.h1_scl_norm = std::sqrt(n0 * cell) + std::sqrt(ngrad * cell);
    return res;
}

}  // namespace slabinv
