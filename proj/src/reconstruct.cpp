#include "slabinv/reconstruct.hpp"

#include <cmath>

namespace slabinv {

PairingContext PairingContext::build(const SlabGrid& g, const SupportBall& ball,
                                     const VectorField& A1, const ScalarField& q1,
                                     const VectorField& A2, const ScalarField& q2,
                                     CgoVariant variant) {
    PairingContext ctx;
    ctx.grid = g;
    ctx.ball = ball;
    ctx.variant = variant;
    ctx.ext = extend_for_variant(A1, q1, A2, q2, variant);

    double scale = std::max({A1.max_abs(), A2.max_abs(), q1.max_abs(), q2.max_abs(),
                             1e-300});
    double adiff_max = 0, imag_max = 0;
    for (size_t p = 0; p < g.size(); ++p) {
        adiff_max = std::max({adiff_max, std::abs(A1.c1.v[p] - A2.c1.v[p]),
                              std::abs(A1.c2.v[p] - A2.c2.v[p]),
                              std::abs(A1.c3.v[p] - A2.c3.v[p])});
        imag_max = std::max({imag_max, std::abs(A1.c1.v[p].imag()),
                             std::abs(A2.c1.v[p].imag()), std::abs(q1.v[p].imag()),
                             std::abs(A1.c2.v[p].imag()), std::abs(A2.c2.v[p].imag()),
                             std::abs(A1.c3.v[p].imag()), std::abs(A2.c3.v[p].imag()),
                             std::abs(q2.v[p].imag())});
    }
    ctx.a_trivial = adiff_max <= 1e-13 * scale;
    ctx.real_fields = imag_max <= 1e-13 * scale;

    for (int m = 1; m < g.nn - 1; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                if (!ball.contains(x)) continue;
                const size_t p = g.idx(i, j, m);
                const std::array<cplx, 3> ad{A1.c1.v[p] - A2.c1.v[p],
                                             A1.c2.v[p] - A2.c2.v[p],
                                             A1.c3.v[p] - A2.c3.v[p]};
                const cplx sq = A1.c1.v[p] * A1.c1.v[p] + A1.c2.v[p] * A1.c2.v[p] +
                                A1.c3.v[p] * A1.c3.v[p] - A2.c1.v[p] * A2.c1.v[p] -
                                A2.c2.v[p] * A2.c2.v[p] - A2.c3.v[p] * A2.c3.v[p] +
                                q1.v[p] - q2.v[p];
                if (std::abs(ad[0]) + std::abs(ad[1]) + std::abs(ad[2]) +
                        std::abs(sq) <
                    1e-15 * scale)
                    continue;
                ctx.nodes.push_back({i, j, m, g.dx1() * g.dx2() * g.dz()});
                ctx.adiff.push_back(ad);
                ctx.sq.push_back(sq);
            }
    return ctx;
}

cplx interior_pairing(const PairingContext& ctx, const CgoFrequencySet& fs,
                      const CgoAmplitude& a1, const CgoAmplitude& a2) {
    const SlabGrid& g = ctx.grid;
    const BoxGrid& g1 = ctx.ext.grid1;
    const BoxGrid& g2 = ctx.ext.grid2;
    const double ih = 1.0 / fs.h;
    const CVec3 z1 = fs.zeta1, z2 = fs.zeta2;
    const bool top2 = ctx.ext.plane2 == ReflectionPlane::Top;

    cplx total(0);
    const int nn = g.nn;
    for (size_t t = 0; t < ctx.nodes.size(); ++t) {
        const auto& nd = ctx.nodes[t];
        const double x1 = g.x1(nd.i), x2 = g.x2(nd.j), z = g.z(nd.m);

        // u1 pieces: reflected across the bottom plane
        const int m1f = (nn - 1) + nd.m, m1b = (nn - 1) - nd.m;
        const cplx e1f = std::exp((x1 * z1.x + x2 * z1.y + z * z1.z) * ih);
        const cplx e1b = std::exp((x1 * z1.x + x2 * z1.y - z * z1.z) * ih);
        const size_t p1f = g1.idx(nd.i, nd.j, m1f), p1b = g1.idx(nd.i, nd.j, m1b);
        const cplx u1 = e1f * a1.val[p1f] - e1b * a1.val[p1b];
        // D u1 = -i grad u1; the reflected piece flips the z-derivative sign
        cplx du1[3];
        for (int c = 0; c < 3; ++c) {
            const cplx gf = c == 0 ? a1.g1[p1f] : (c == 1 ? a1.g2[p1f] : a1.g3[p1f]);
            const cplx gb = c == 0 ? a1.g1[p1b] : (c == 1 ? a1.g2[p1b] : a1.g3[p1b]);
            const double sgn = c == 2 ? -1.0 : 1.0;
            du1[c] = -kImag * (e1f * (z1[c] * ih * a1.val[p1f] + gf) -
                               e1b * (sgn * z1[c] * ih * a1.val[p1b] + sgn * gb));
        }

        // u2 pieces: reflected across the variant plane
        const int m2f = top2 ? nd.m : (nn - 1) + nd.m;
        const int m2b = top2 ? 2 * (nn - 1) - nd.m : (nn - 1) - nd.m;
        const double zb2 = top2 ? 2.0 * g.L - z : -z;
        const cplx e2f = std::exp((x1 * z2.x + x2 * z2.y + z * z2.z) * ih);
        const cplx e2b = std::exp((x1 * z2.x + x2 * z2.y + zb2 * z2.z) * ih);
        const size_t p2f = g2.idx(nd.i, nd.j, m2f), p2b = g2.idx(nd.i, nd.j, m2b);
        const cplx u2 = e2f * a2.val[p2f] - e2b * a2.val[p2b];
        cplx du2[3];
        for (int c = 0; c < 3; ++c) {
            const cplx gf = c == 0 ? a2.g1[p2f] : (c == 1 ? a2.g2[p2f] : a2.g3[p2f]);
            const cplx gb = c == 0 ? a2.g1[p2b] : (c == 1 ? a2.g2[p2b] : a2.g3[p2b]);
            const double sgn = c == 2 ? -1.0 : 1.0;
            du2[c] = -kImag * (e2f * (z2[c] * ih * a2.val[p2f] + gf) -
                               e2b * (sgn * z2[c] * ih * a2.val[p2b] + sgn * gb));
        }

        const cplx u2c = std::conj(u2);
        cplx term(0);
        if (!ctx.a_trivial) {
            const auto& ad = ctx.adiff[t];
            for (int c = 0; c < 3; ++c)
                term += ad[size_t(c)] * (du1[c] * u2c + u1 * std::conj(du2[c]));
        }
        term += ctx.sq[t] * u1 * u2c;
        total += nd.w * term;
    }
    return total;
}

// ---------------------------------------------------------------------------

namespace {

// Richardson extrapolation in h (first order), with a divergence guard that
// falls back to the smallest-h value.
cplx extrapolate(const std::vector<double>& hs, const std::vector<cplx>& vals,
                 bool enabled, bool* fallback) {
    if (fallback) *fallback = false;
    const size_t n = vals.size();
    if (!enabled || n < 2) return vals.back();
    const double r = hs[n - 2] / hs[n - 1];
    const cplx ex = (r * vals[n - 1] - vals[n - 2]) / (r - 1.0);
    if (n >= 3) {
        const double r2 = hs[n - 3] / hs[n - 2];
        const cplx ex_prev = (r2 * vals[n - 2] - vals[n - 3]) / (r2 - 1.0);
        if (std::abs(ex - ex_prev) > 2.0 * std::abs(vals[n - 1] - vals[n - 2]) +
                                         1e-12 * std::abs(vals[n - 1])) {
            if (fallback) *fallback = true;
            return vals.back();
        }
    }
    return ex;
}

struct AmplitudePair {
    CgoAmplitude a1, a2;
};

// Amplitudes for the transport-annihilated pairing: a2 = e^{Phi2}, and the
// multiplier device cancels Phi1, leaving a1 = e^{-conj Phi2} carried onto
// the u1-side grid.
AmplitudePair make_amplitudes(const PairingContext& ctx, const PhaseField* phi2) {
    AmplitudePair ap;
    if (!phi2) {
        ap.a1 = CgoAmplitude::one(ctx.ext.grid1);
        ap.a2 = CgoAmplitude::one(ctx.ext.grid2);
        return ap;
    }
    ap.a2 = CgoAmplitude::from_phase(*phi2, cplx(1));
    ap.a1 = amplitude_exp_on(ctx.ext.grid1, *phi2, cplx(-1), true);
    return ap;
}

bool a2_vanishes(const PairingContext& ctx) {
    double m = 0;
    for (const auto& v : ctx.ext.A2c.c1.v) m = std::max(m, std::abs(v));
    for (const auto& v : ctx.ext.A2c.c2.v) m = std::max(m, std::abs(v));
    for (const auto& v : ctx.ext.A2c.c3.v) m = std::max(m, std::abs(v));
    return m == 0.0;
}

CauchyPhaseOptions phase_opts_for(const PairingContext& ctx, const ExtractOptions& opt) {
    CauchyPhaseOptions po = opt.phase;
    const double zc = ctx.ext.plane2 == ReflectionPlane::Top ? ctx.grid.L : 0.0;
    po.chi_center = {ctx.ball.center.x, ctx.ball.center.y, zc};
    if (po.eval_radius <= 0) {
        const double zr = std::abs(ctx.ball.center.z - zc) + ctx.ball.radius;
        po.eval_radius = std::hypot(ctx.ball.radius, zr) + 0.1;
        po.chi_inner = po.eval_radius + 0.05;
        po.chi_outer = 1.2 * po.chi_inner;
    }
    return po;
}

}  // namespace

DirectionalSample extract_vector_sample(const PairingContext& ctx, Vec3 xi, int j, int k,
                                        const ExtractOptions& opt, SampleDiag* diag) {
    auto [m1, m2] = choose_mus(xi, ctx.variant, j, k, opt.cone_theta);
    DirectionalSample out;
    out.xi = xi;
    out.mu1 = m1;
    out.mu2 = m2;

    // one phase build serves both +mu1 and -mu1 for real potentials
    const bool trivial2 = a2_vanishes(ctx);
    PhaseField phi2_plus, phi2_minus;
    const PhaseField* pp = nullptr;
    const PhaseField* pm = nullptr;
    if (!trivial2) {
        const CauchyPhaseOptions po = phase_opts_for(ctx, opt);
        CgoFrequencySet fs0 = make_zetas(xi, m1, m2, opt.h_list.front(), ctx.variant);
        phi2_plus = cauchy_phase(ctx.ext.A2c, fs0.zeta0_2(), po);
        pp = &phi2_plus;
        if (ctx.real_fields) {
            // zeta0 of the -mu1 set is the conjugate; phi flips to -conj(phi)
            phi2_minus = phi2_plus;
            for (auto& v : phi2_minus.phi) v = -std::conj(v);
            for (auto& v : phi2_minus.g1) v = -std::conj(v);
            for (auto& v : phi2_minus.g2) v = -std::conj(v);
            for (auto& v : phi2_minus.g3) v = -std::conj(v);
        } else {
            CgoFrequencySet fsm =
                make_zetas(xi, -1.0 * m1, m2, opt.h_list.front(), ctx.variant);
            phi2_minus = cauchy_phase(ctx.ext.A2c, fsm.zeta0_2(), po);
        }
        pm = &phi2_minus;
    }

    auto run_side = [&](Vec3 mu1_side, const PhaseField* phi) {
        AmplitudePair ap = make_amplitudes(ctx, phi);
        std::vector<cplx> vals;
        for (double h : opt.h_list) {
            CgoFrequencySet fs = make_zetas(xi, mu1_side, m2, h, ctx.variant);
            const cplx P = interior_pairing(ctx, fs, ap.a1, ap.a2);
            vals.push_back(h * P / cplx(0, -2.0));
        }
        if (diag) diag->per_h.insert(diag->per_h.end(), vals.begin(), vals.end());
        bool fb = false;
        const cplx v = extrapolate(opt.h_list, vals, opt.extrapolate, &fb);
        if (diag) diag->fallback = diag->fallback || fb;
        return v;
    };

    const cplx vp = run_side(m1, pp);
    const cplx vm = run_side(-1.0 * m1, pm);
    out.mu1_dot = (vp - vm) / cplx(0, 2.0);
    out.mu2_dot = (vp + vm) / 2.0;
    return out;
}

cplx extract_q_sample(const PairingContext& ctx, Vec3 xi, const ExtractOptions& opt,
                      SampleDiag* diag) {
    if (!ctx.a_trivial)
        throw ConstraintViolation(
            "extract_q_sample: requires A1 = A2 (gauge-correct first)");
    const CgoVariant qvariant =
        ctx.variant == CgoVariant::Thm1 ? CgoVariant::QRecov3 : CgoVariant::QRecov4;
    auto [m1, m2] = choose_mus(xi, qvariant, 1, 2, opt.cone_theta);

    const bool trivial2 = a2_vanishes(ctx);
    PhaseField phi2;
    const PhaseField* pp = nullptr;
    if (!trivial2) {
        const CauchyPhaseOptions po = phase_opts_for(ctx, opt);
        CgoFrequencySet fs0 = make_zetas(xi, m1, m2, opt.h_list.front(), qvariant);
        phi2 = cauchy_phase(ctx.ext.A2c, fs0.zeta0_2(), po);
        pp = &phi2;
    }
    AmplitudePair ap = make_amplitudes(ctx, pp);
    std::vector<cplx> vals;
    for (double h : opt.h_list) {
        CgoFrequencySet fs = make_zetas(xi, m1, m2, h, qvariant);
        vals.push_back(interior_pairing(ctx, fs, ap.a1, ap.a2));
    }
    if (diag) diag->per_h = vals;
    bool fb = false;
    const cplx v = extrapolate(opt.h_list, vals, opt.extrapolate, &fb);
    if (diag) diag->fallback = fb;
    return v;
}

// ---------------------------------------------------------------------------

double CurlSpectrum::bianchi_defect() const {
    double num = 0, den = 0;
    for (int c = 0; c < grid.n; ++c)
        for (int b = 0; b < grid.n; ++b)
            for (int a = 0; a < grid.n; ++a) {
                const Vec3 xi = grid.value(a, b, c);
                const size_t p = grid.idx(a, b, c);
                num += std::norm(xi.x * c23[p] - xi.y * c13[p] + xi.z * c12[p]);
                den += dot(xi, xi) *
                       (std::norm(c12[p]) + std::norm(c13[p]) + std::norm(c23[p]));
            }
    return den == 0 ? 0.0 : std::sqrt(num / den);
}

CurlSpectrum assemble_curl_spectrum(const FrequencySamples& samples,
                                    const AssemblyOptions& opt) {
    const XiGrid& xg = samples.grid;
    CurlSpectrum spec(xg);

    for (int c = 0; c < xg.n; ++c)
        for (int b = 0; b < xg.n; ++b)
            for (int a = 0; a < xg.n; ++a) {
                const size_t p = xg.idx(a, b, c);
                const auto& data = samples.dirs[p];
                const Vec3 xi = xg.value(a, b, c);
                const double xin = norm(xi);
                if (xin < 1e-12) {  // curl components vanish at xi = 0
                    spec.known[p] = 1;
                    continue;
                }
                if (data.size() < 2) continue;
                // tangent basis
                Vec3 t1 = std::abs(xi.x) < 0.9 * xin ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
                t1 = normalized(t1 - (dot(t1, xi) / (xin * xin)) * xi);
                const Vec3 t2 = normalized(cross((1.0 / xin) * xi, t1));
                double m11 = 0, m12 = 0, m22 = 0;
                cplx r1(0), r2(0);
                for (const auto& [dir, val] : data) {
                    const double d1 = dot(dir, t1), d2 = dot(dir, t2);
                    m11 += d1 * d1;
                    m12 += d1 * d2;
                    m22 += d2 * d2;
                    r1 += d1 * val;
                    r2 += d2 * val;
                }
                const double det = m11 * m22 - m12 * m12;
                if (std::abs(det) < 1e-12) continue;
                const cplx alpha = (m22 * r1 - m12 * r2) / det;
                const cplx beta = (m11 * r2 - m12 * r1) / det;
                const cplx dx = alpha * t1.x + beta * t2.x;
                const cplx dy = alpha * t1.y + beta * t2.y;
                const cplx dz = alpha * t1.z + beta * t2.z;
                spec.c12[p] = xi.x * dy - xi.y * dx;
                spec.c13[p] = xi.x * dz - xi.z * dx;
                spec.c23[p] = xi.y * dz - xi.z * dy;
                spec.known[p] = 1;
            }

    // Hermitian symmetry of real potentials fills the mirrored lattice
    for (int c = 0; c < xg.n; ++c)
        for (int b = 0; b < xg.n; ++b)
            for (int a = 0; a < xg.n; ++a) {
                const size_t p = xg.idx(a, b, c);
                if (spec.known[p]) continue;
                const int am = xg.n - 1 - a, bm = xg.n - 1 - b, cm = xg.n - 1 - c;
                const size_t pm = xg.idx(am, bm, cm);
                if (!spec.known[pm]) continue;
                spec.c12[p] = std::conj(spec.c12[pm]);
                spec.c13[p] = std::conj(spec.c13[pm]);
                spec.c23[p] = std::conj(spec.c23[pm]);
                spec.known[p] = 1;
            }

    // harmonic in-fill of the remaining holes, sampled points pinned
    auto fill = [&](std::vector<cplx>& f) {
        std::vector<cplx> next = f;
        for (int it = 0; it < opt.fill_iterations; ++it) {
            for (int c = 0; c < xg.n; ++c)
                for (int b = 0; b < xg.n; ++b)
                    for (int a = 0; a < xg.n; ++a) {
                        const size_t p = xg.idx(a, b, c);
                        if (spec.known[p]) continue;
                        cplx s(0);
                        int cnt = 0;
                        auto acc = [&](int aa, int bb, int cc) {
                            if (aa < 0 || bb < 0 || cc < 0 || aa >= xg.n || bb >= xg.n ||
                                cc >= xg.n)
                                return;
                            s += f[xg.idx(aa, bb, cc)];
                            ++cnt;
                        };
                        acc(a + 1, b, c);
                        acc(a - 1, b, c);
                        acc(a, b + 1, c);
                        acc(a, b - 1, c);
                        acc(a, b, c + 1);
                        acc(a, b, c - 1);
                        if (cnt) next[p] = s / double(cnt);
                    }
            std::swap(f, next);
        }
    };
    fill(spec.c12);
    fill(spec.c13);
    fill(spec.c23);
    return spec;
}

CurlFields invert_curl(const CurlSpectrum& spec, const SlabGrid& g) {
    CurlFields out{ScalarField(g), ScalarField(g), ScalarField(g)};
    const XiGrid& xg = spec.grid;
    const double w = std::pow(xg.step() / (2.0 * kPi), 3);
    parallel_for(size_t(g.nn), [&](size_t mz) {
        const int m = int(mz);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                cplx s12(0), s13(0), s23(0);
                for (int c = 0; c < xg.n; ++c)
                    for (int b = 0; b < xg.n; ++b)
                        for (int a = 0; a < xg.n; ++a) {
                            const Vec3 xi = xg.value(a, b, c);
                            const size_t p = xg.idx(a, b, c);
                            // dA_jk = IFT of -i (xi_j D_k - xi_k D_j)
                            const cplx ph =
                                cplx(0, -1) *
                                std::polar(1.0, -(x.x * xi.x + x.y * xi.y + x.z * xi.z));
                            s12 += ph * spec.c12[p];
                            s13 += ph * spec.c13[p];
                            s23 += ph * spec.c23[p];
                        }
                const size_t pg = g.idx(i, j, m);
                out.c12.v[pg] = w * s12;
                out.c13.v[pg] = w * s13;
                out.c23.v[pg] = w * s23;
            }
    });
    return out;
}

ScalarField invert_q(const FrequencySamples& samples, const SlabGrid& g) {
    ScalarField out(g);
    const XiGrid& xg = samples.grid;
    const double w = std::pow(xg.step() / (2.0 * kPi), 3);
    parallel_for(size_t(g.nn), [&](size_t mz) {
        const int m = int(mz);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                cplx s(0);
                for (int c = 0; c < xg.n; ++c)
                    for (int b = 0; b < xg.n; ++b)
                        for (int a = 0; a < xg.n; ++a) {
                            const size_t p = xg.idx(a, b, c);
                            if (!samples.has_q[p]) continue;
                            const Vec3 xi = xg.value(a, b, c);
                            s += samples.q_values[p] *
                                 std::polar(1.0, -(x.x * xi.x + x.y * xi.y + x.z * xi.z));
                        }
                out.v[g.idx(i, j, m)] = w * s;
            }
    });
    return out;
}

// ---------------------------------------------------------------------------

GaugeRecovery gauge_from_curl(const XiGrid& xg, const std::vector<CVec3>& d_hat,
                              const SlabGrid& g, double curl_tol) {
    if (d_hat.size() != xg.size()) throw GridMismatch("gauge_from_curl: sample count");

    double curl_num = 0, curl_den = 0;
    for (int c = 0; c < xg.n; ++c)
        for (int b = 0; b < xg.n; ++b)
            for (int a = 0; a < xg.n; ++a) {
                const Vec3 xi = xg.value(a, b, c);
                const CVec3& d = d_hat[xg.idx(a, b, c)];
                curl_num += std::norm(xi.x * d.y - xi.y * d.x) +
                            std::norm(xi.x * d.z - xi.z * d.x) +
                            std::norm(xi.y * d.z - xi.z * d.y);
                curl_den +=
                    dot(xi, xi) * (std::norm(d.x) + std::norm(d.y) + std::norm(d.z));
            }
    if (curl_den > 0 && std::sqrt(curl_num / curl_den) > curl_tol)
        throw NonGradientInput("gauge_from_curl: input data carry curl");

    GaugeRecovery out;
    out.psi = ScalarField(g);
    const double w = std::pow(xg.step() / (2.0 * kPi), 3);
    ScalarField gx(g), gy(g), gz(g), dx(g), dy(g), dz(g);
    parallel_for(size_t(g.nn), [&](size_t mz) {
        const int m = int(mz);
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 x{g.x1(i), g.x2(j), g.z(m)};
                cplx ps(0), g1(0), g2(0), g3(0), d1(0), d2(0), d3(0);
                for (int c = 0; c < xg.n; ++c)
                    for (int b = 0; b < xg.n; ++b)
                        for (int a = 0; a < xg.n; ++a) {
                            const Vec3 xi = xg.value(a, b, c);
                            const double n2x = dot(xi, xi);
                            const size_t p = xg.idx(a, b, c);
                            const CVec3& d = d_hat[p];
                            const cplx ph =
                                std::polar(1.0, -(x.x * xi.x + x.y * xi.y + x.z * xi.z));
                            d1 += ph * d.x;
                            d2 += ph * d.y;
                            d3 += ph * d.z;
                            if (n2x < 1e-12) continue;
                            const cplx psi_hat = cplx(0, -1) *
                                                 (xi.x * d.x + xi.y * d.y + xi.z * d.z) /
                                                 n2x;
                            ps += ph * psi_hat;
                            g1 += ph * cplx(0, -xi.x) * psi_hat;
                            g2 += ph * cplx(0, -xi.y) * psi_hat;
                            g3 += ph * cplx(0, -xi.z) * psi_hat;
                        }
                const size_t pg = g.idx(i, j, m);
                out.psi.v[pg] = w * ps;
                gx.v[pg] = w * g1;
                gy.v[pg] = w * g2;
                gz.v[pg] = w * g3;
                dx.v[pg] = w * d1;
                dy.v[pg] = w * d2;
                dz.v[pg] = w * d3;
            }
    });

    // fix the additive constant: psi -> 0 where D vanishes (near the box edge)
    cplx shell_mean(0);
    int shell_count = 0;
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                if (std::hypot(g.x1(i), g.x2(j)) < g.X - 3 * g.dx1()) continue;
                shell_mean += out.psi.at(i, j, m);
                ++shell_count;
            }
    if (shell_count) {
        shell_mean /= double(shell_count);
        for (auto& v : out.psi.v) v -= shell_mean;
    }

    double num = 0, den = 0, trace = 0;
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const size_t p = g.idx(i, j, m);
                num += std::norm(gx.v[p] - dx.v[p]) + std::norm(gy.v[p] - dy.v[p]) +
                       std::norm(gz.v[p] - dz.v[p]);
                den += std::norm(dx.v[p]) + std::norm(dy.v[p]) + std::norm(dz.v[p]);
                if (m == 0 || m == g.nn - 1)
                    trace = std::max(trace, std::abs(out.psi.v[p]));
            }
    out.gradient_rel_err = den == 0 ? 0.0 : std::sqrt(num / den);
    out.boundary_trace = trace;
    return out;
}

// ---------------------------------------------------------------------------

cplx uniqueness_pairing_defect(const DtnSample& s1, const DtnSample& s2,
                               const PlaneField& test_trace) {
    const PlaneField& o1 = s1.output;
    const PlaneField& o2 = s2.output;
    if (o1.n1 != o2.n1 || o1.n2 != o2.n2 || o1.n1 != test_trace.n1 ||
        o1.n2 != test_trace.n2 || o1.X != o2.X)
        throw PatchMismatch("uniqueness_pairing_defect: incompatible traces");
    if (s1.out_patch.plane != s2.out_patch.plane ||
        s1.out_patch.radius != s2.out_patch.radius)
        throw PatchMismatch("uniqueness_pairing_defect: patches differ");
    cplx s(0);
    for (int j = 0; j < o1.n2; ++j)
        for (int i = 0; i < o1.n1; ++i)
            s += (o1.at(i, j) - o2.at(i, j)) * std::conj(test_trace.at(i, j));
    return s * (o1.dx1() * o1.dx2());
}

}  // namespace slabinv
