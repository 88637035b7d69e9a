// Closed-form compactly supported potentials with analytic derivatives,
// used as ground truth by the pipelines and oracles.
#pragma once

#include "slabinv/grid.hpp"

namespace slabinv {

// amp * exp(-a u / (1 - u)), u = |x-c|^2 / rho^2, supported in |x-c| < rho.
struct SmoothBump {
    Vec3 center{0, 0, 0.5};
    double rho{0.3};
    double amp{1.0};
    double sharp{1.0};

    double value(Vec3 p) const {
        const Vec3 d = p - center;
        const double u = dot(d, d) / (rho * rho);
        if (u >= 1.0) return 0.0;
        return amp * std::exp(-sharp * u / (1.0 - u));
    }
    Vec3 grad(Vec3 p) const {
        const Vec3 d = p - center;
        const double u = dot(d, d) / (rho * rho);
        if (u >= 1.0) return {0, 0, 0};
        const double f = amp * std::exp(-sharp * u / (1.0 - u));
        const double fp = -sharp / ((1.0 - u) * (1.0 - u)) * f;
        return (2.0 * fp / (rho * rho)) * d;
    }
    double laplacian(Vec3 p) const {
        const Vec3 d = p - center;
        const double u = dot(d, d) / (rho * rho);
        if (u >= 1.0) return 0.0;
        const double f = amp * std::exp(-sharp * u / (1.0 - u));
        const double g1 = 1.0 - u;
        const double fp = -sharp / (g1 * g1) * f;
        const double fpp = (sharp * sharp / (g1 * g1 * g1 * g1) - 2.0 * sharp / (g1 * g1 * g1)) * f;
        return fpp * 4.0 * u / (rho * rho) + fp * 6.0 / (rho * rho);
    }
};

// A = sum of bumps attached to components, q = sum of scalar bumps;
// an optional gauge bump generates Psi with analytic gradient.
struct SyntheticPotential {
    std::vector<std::pair<int, SmoothBump>> a_bumps;  // component index 0..2
    std::vector<SmoothBump> q_bumps;
    std::vector<SmoothBump> psi_bumps;

    Vec3 vector_at(Vec3 p) const {
        Vec3 a{0, 0, 0};
        for (const auto& [c, b] : a_bumps) a[c] += b.value(p);
        return a;
    }
    double scalar_at(Vec3 p) const {
        double q = 0;
        for (const auto& b : q_bumps) q += b.value(p);
        return q;
    }
    double psi_at(Vec3 p) const {
        double s = 0;
        for (const auto& b : psi_bumps) s += b.value(p);
        return s;
    }
    Vec3 grad_psi_at(Vec3 p) const {
        Vec3 g{0, 0, 0};
        for (const auto& b : psi_bumps) g = g + b.grad(p);
        return g;
    }
    // (d_j A_k - d_k A_j)(p), 0-based component indices
    double curl_at(Vec3 p, int j, int k) const {
        double c = 0;
        for (const auto& [comp, b] : a_bumps) {
            const Vec3 g = b.grad(p);
            if (comp == k) c += g[j];
            if (comp == j) c -= g[k];
        }
        return c;
    }

    VectorField sample_vector(const SlabGrid& g) const;
    ScalarField sample_scalar(const SlabGrid& g) const;
    ScalarField sample_psi(const SlabGrid& g) const;
    VectorField sample_grad_psi(const SlabGrid& g) const;

    // True when every bump ball fits inside B and inside the slab interior.
    bool supported_in(const SupportBall& ball, double L) const;
};

// Default Theorem 1.1 style scenario used by tests and the CLI defaults.
struct Scenario {
    SlabGrid grid;
    SupportBall ball;
    double k{4.5};
    SyntheticPotential pot1, pot2;
};

ScalarField sample_function(const SlabGrid& g, const std::function<cplx(Vec3)>& f);

}  // namespace slabinv
