#include "slabinv/synthetic.hpp"

namespace slabinv {

ScalarField sample_function(const SlabGrid& g, const std::function<cplx(Vec3)>& f) {
    ScalarField out(g);
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i)
                out.at(i, j, m) = f({g.x1(i), g.x2(j), g.z(m)});
    return out;
}

VectorField SyntheticPotential::sample_vector(const SlabGrid& g) const {
    VectorField A(g);
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 p{g.x1(i), g.x2(j), g.z(m)};
                const Vec3 a = vector_at(p);
                A.c1.at(i, j, m) = a.x;
                A.c2.at(i, j, m) = a.y;
                A.c3.at(i, j, m) = a.z;
            }
    return A;
}

ScalarField SyntheticPotential::sample_scalar(const SlabGrid& g) const {
    return sample_function(g, [this](Vec3 p) { return cplx(scalar_at(p)); });
}

ScalarField SyntheticPotential::sample_psi(const SlabGrid& g) const {
    return sample_function(g, [this](Vec3 p) { return cplx(psi_at(p)); });
}

VectorField SyntheticPotential::sample_grad_psi(const SlabGrid& g) const {
    VectorField G(g);
    for (int m = 0; m < g.nn; ++m)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const Vec3 p{g.x1(i), g.x2(j), g.z(m)};
                const Vec3 gr = grad_psi_at(p);
                G.c1.at(i, j, m) = gr.x;
                G.c2.at(i, j, m) = gr.y;
                G.c3.at(i, j, m) = gr.z;
            }
    return G;
}

bool SyntheticPotential::supported_in(const SupportBall& ball, double L) const {
    auto ok = [&](const SmoothBump& b) {
        if (!ball.contains(b.center, b.rho)) return false;
        return b.center.z - b.rho > 0.0 && b.center.z + b.rho < L;
    };
    for (const auto& [c, b] : a_bumps)
        if (!ok(b)) return false;
    for (const auto& b : q_bumps)
        if (!ok(b)) return false;
    for (const auto& b : psi_bumps)
        if (!ok(b)) return false;
    return true;
}

}  // namespace slabinv
