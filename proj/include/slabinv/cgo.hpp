// Complex geometric optics machinery: frequency vectors, direction recipes,
// mollification, the Cauchy-transform phase, reflected CGO pairs and the
// optional remainder solve.
#pragma once

#include "slabinv/grid.hpp"
#include "slabinv/synthetic.hpp"

namespace slabinv {

enum class CgoVariant { Thm1, Thm2, QRecov3, QRecov4 };

// (xi, mu1, mu2, h) with the zero-quadric frequency vectors
//   zeta1 = i h xi / 2 + i sqrt(1 - h^2|xi|^2/4) mu1 + mu2
//   zeta2 = -i h xi / 2 + i sqrt(1 - h^2|xi|^2/4) mu1 - mu2,
// so zeta.zeta = 0 and (zeta1 + conj(zeta2))/h = i xi.
struct CgoFrequencySet {
    Vec3 xi{};
    Vec3 mu1{}, mu2{};
    double h{0.1};
    CgoVariant variant{CgoVariant::Thm1};
    CVec3 zeta1{}, zeta2{};

    CVec3 zeta0_1() const {  // h-independent leading frequency i mu1 + mu2
        return {cplx(mu2.x, mu1.x), cplx(mu2.y, mu1.y), cplx(mu2.z, mu1.z)};
    }
    CVec3 zeta0_2() const {  // i mu1 - mu2
        return {cplx(-mu2.x, mu1.x), cplx(-mu2.y, mu1.y), cplx(-mu2.z, mu1.z)};
    }
};

CgoFrequencySet make_zetas(Vec3 xi, Vec3 mu1, Vec3 mu2, double h,
                           CgoVariant variant = CgoVariant::Thm1);

// Direction recipes.  Thm1 uses the antisymmetric pair
//   mu1 ~ -xi_k e_j + xi_j e_k  with its companion mu2 (mu2_n > 0);
// Thm2 keeps mu2_n = 0 with mu1_n != 0; the q-recovery recipes pick the
// plane orthogonal to xi.  Indices j, k are 1-based axes.  Throws
// OutsideRecipeCone when xi leaves the recipe's admissible cone; cone_theta
// is the quantitative margin on the constrained component.
std::pair<Vec3, Vec3> choose_mus(Vec3 xi, CgoVariant variant, int j = 1, int k = 2,
                                 double cone_theta = 0.0);

// Unnormalized mu1 recipe vector (i.e. -xi_k e_j + xi_j e_k for Thm1/Thm2);
// directional samples scale by its length to yield curl components.
Vec3 mu1_recipe_vector(Vec3 xi, CgoVariant variant, int j, int k);

// --- mollification -----------------------------------------------------

struct MollifiedPotential {
    BoxGrid grid;
    ExtendedVectorField sharp;  // A * phi_eps
    ExtendedVectorField flat;   // A - sharp
    double eps{0};
    double flat_sup{0};         // ||A_flat||_inf, reported for the rate sweep
};

MollifiedPotential mollify(const ExtendedVectorField& A, double eps);

// --- transport phase -----------------------------------------------------

struct PhaseField {
    BoxGrid grid;
    CVec3 zeta0{};
    double eps{0};               // mollification scale of the input (0 = raw)
    std::vector<cplx> phi;       // zero outside the validity ball
    std::vector<cplx> g1, g2, g3;  // centered-difference gradient
    Vec3 region_center{};
    double region_radius{0};
    double transport_residual{0};  // sup |zeta0.grad phi + i zeta0.A chi| / sup|zeta0.A|
};

struct CauchyPhaseOptions {
    Vec3 chi_center{0, 0, 0};
    double chi_inner{1.75};   // chi = 1 inside this radius
    double chi_outer{2.1};    // support of chi
    double eval_radius{1.7};  // where the phase is needed
    double rot_spacing{0.05}; // rotated-grid spacing
};

// Solves zeta0 . grad(phi) = -i zeta0 . A chi by the two-dimensional Cauchy
// transform in the plane spanned by (Re zeta0, Im zeta0): the field is
// resampled onto a rotated grid, convolved slice by slice with the exact
// Fourier symbol of 1/(pi z) on a padded FFT grid, and resampled back.
PhaseField cauchy_phase(const ExtendedVectorField& A, CVec3 zeta0,
                        const CauchyPhaseOptions& opt);

// --- CGO amplitudes and reflected solutions -------------------------------

// exp of a phase combination, with gradient, on the extended grid
struct CgoAmplitude {
    BoxGrid grid;
    std::vector<cplx> val, g1, g2, g3;

    static CgoAmplitude one(const BoxGrid& g);
    // a = exp(s1 * phi1 + s2 * conj(phi2_on_this_grid))
    static CgoAmplitude from_phase(const PhaseField& phase, cplx scale);
    void multiply(const CgoAmplitude& other);
};

// Amplitude exp(scale * phi~) on `target`, where phi~ carries the phase over
// node by node, folding the height into the source range across the slab
// planes (even reflection); `conjugate` applies to the phase first.
CgoAmplitude amplitude_exp_on(const BoxGrid& target, const PhaseField& phase, cplx scale,
                              bool conjugate);

struct CgoField {
    SlabGrid grid;
    CgoFrequencySet fs;
    ReflectionPlane plane{ReflectionPlane::Bottom};
    std::vector<cplx> u;       // on the slab grid
    double trace_max{0};       // on the vanishing boundary line
    double weighted_residual{0};  // h^2 || e^{-x.zeta/h} (L - k^2) u ||_2
};

// u1(x) = e^{x.zeta1/h} a(x) - e^{x*.zeta1/h} a(x*), reflected across
// x_n = 0; potentials enter through the amplitude (phase) and the recorded
// residual.  The trace on the reflection plane vanishes by construction.
CgoField build_reflected_u1(const ExtendedVectorField& A1ext, const ExtendedField& q1ext,
                            const CgoFrequencySet& fs, double k,
                            const CgoAmplitude& amplitude,
                            const std::vector<cplx>* remainder = nullptr);

// u2 for the conjugated operator, reflected across x_n = L (Thm1) or
// x_n = 0 (Thm2), built with zeta2.
CgoField build_reflected_u2(const ExtendedVectorField& A2ext_conj,
                            const ExtendedField& q2ext_conj, const CgoFrequencySet& fs,
                            double k, const CgoAmplitude& amplitude,
                            const std::vector<cplx>* remainder = nullptr);

// h^2 || e^{-x.zeta/h}(L_{A,q} - k^2) e^{x.zeta/h} a ||_2 over the region,
// evaluated analytically through the conjugated operator (the exponential
// never appears numerically).
double weighted_cgo_residual(const ExtendedVectorField& A, const ExtendedField& q,
                             const CgoAmplitude& a, CVec3 zeta, double h, double k,
                             Vec3 region_center, double region_radius);

struct RemainderResult {
    std::vector<cplx> r;           // on the extended grid
    double h1_scl_norm{0};         // ||r|| + ||h grad r||
    bool converged{false};
    double achieved_residual{0};
};

// Least-squares style solve of the conjugated equation for the remainder
// with zero exterior condition; optional (pipelines default to r = 0).
RemainderResult solve_remainder(const CgoFrequencySet& fs, bool first_factor,
                                const ExtendedVectorField& A, const ExtendedField& q,
                                double k, const CgoAmplitude& amplitude,
                                const MollifiedPotential* moll = nullptr);

// Helpers assembling the reflected potentials for each variant.
struct ExtendedScenario {
    BoxGrid grid1, grid2;
    ExtendedVectorField A1, A2c;  // A2c carries conj(A2) components
    ExtendedField q1, q2c;
    ReflectionPlane plane2{ReflectionPlane::Top};
};

ExtendedScenario extend_for_variant(const VectorField& A1, const ScalarField& q1,
                                    const VectorField& A2, const ScalarField& q2,
                                    CgoVariant variant);

}  // namespace slabinv
