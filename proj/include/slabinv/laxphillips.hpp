// Perturbed slab solver: interior resolvent, the compact-perturbation
// gluing scheme for (L_{A,q} - k^2) u = F, boundary value problems, the
// partial-data Dirichlet-to-Neumann map, gauge operations, Green-formula
// defects and a discrete spectrum probe.
#pragma once

#include <memory>

#include "slabinv/modes.hpp"
#include "slabinv/operators.hpp"

namespace slabinv {

struct LaxPhillipsConfig {
    double R{1.0};  // A, q, F supported in |x'| < R
    double S{2.0};  // cutoff supported in |x'| < S, S > R
    cplx z{0.0, 1.0};
    double solver_tol{1e-9};
    int gmres_restart{60};
    int max_iters{600};

    // z sits just above k^2: the compact part of the Fredholm operator
    // scales with |z - k^2|, so a nearby shift keeps the band sources small
    // while Im z > 0 keeps the interior resolvent away from the spectrum.
    static LaxPhillipsConfig for_frequency(double k, double R = 1.0, double S = 2.0) {
        LaxPhillipsConfig c;
        c.R = R;
        c.S = S;
        c.z = cplx(k * k, std::max(1.0, 0.1 * k * k));
        return c;
    }
    void validate(double X) const {
        if (!(S > R) || !(R > 0)) throw ConstraintViolation("cutoff radii need 0 < R < S");
        if (S > X + 1e-12) throw ConstraintViolation("cutoff support exceeds the box");
        if (std::abs(z.imag()) == 0.0) throw ConstraintViolation("shift needs Im z != 0");
    }
};

// C-infinity profile: 1 on [0,R], 0 beyond R + (S-R)/2, radial in x'.
double cutoff_profile(double r, double R, double S);
ScalarField sample_cutoff(const SlabGrid& g, const LaxPhillipsConfig& cfg);

// (L_{A,q} - z)^{-1} on the slab with Dirichlet planes, periodic x' box.
// Krylov solve preconditioned by the exact free-Laplacian inverse.
class InteriorResolvent {
  public:
    InteriorResolvent(std::shared_ptr<const MagneticOperator> op, cplx z,
                      double tol = 1e-9);
    ScalarField apply(const ScalarField& g) const;
    cplx shift() const { return z_; }
    double last_residual() const { return last_residual_; }

  private:
    std::shared_ptr<const MagneticOperator> op_;
    cplx z_;
    double tol_;
    mutable double last_residual_{0};
};

struct SolveDiagnostics {
    int outer_iterations{0};
    double fredholm_residual{0};
    double pde_residual{0};
    AdmissibilityReport admissibility;
};

// Admissible solution of (L_{A,q} - k^2) u = F built by gluing the interior
// resolvent to the outgoing free solver through the cutoff.  The Fredholm
// unknown g solves (I + T) g = F with
//   T g = phi (z - k^2) u1 + [L, phi](u1 - u2) + (1 - phi)((L - k^2) u2 - g),
//   u1 = (L - z)^{-1} g,  u2 = R0(k) g,
// where the commutator and the trailing free-solver defect are formed with
// the discrete operator itself, so the assembled field satisfies the
// discrete equation to solver tolerance.
ScalarField lax_phillips_solve(const VectorField& A, const ScalarField& q, double k,
                               const ScalarField& F, const LaxPhillipsConfig& cfg,
                               SolveDiagnostics* diag = nullptr);

// Dirichlet data on Gamma_1, zero on Gamma_2; solved via a smooth lift.
ScalarField dirichlet_bvp_solve(const VectorField& A, const ScalarField& q, double k,
                                const PlaneField& f, const LaxPhillipsConfig& cfg,
                                SolveDiagnostics* diag = nullptr);

enum class BoundaryPlaneId { Gamma1, Gamma2 };  // x_n = L resp. x_n = 0

struct BoundaryPatch {
    BoundaryPlaneId plane{BoundaryPlaneId::Gamma1};
    double cx{0}, cy{0};
    double radius{1.2};

    bool covers_ball_section(const SupportBall& b, double L) const;
};

struct DtnSample {
    PlaneField input;         // trace on gamma_1
    BoundaryPatch in_patch;
    PlaneField output;        // (d_nu + i A.nu) u on the requested patch
    BoundaryPatch out_patch;
};

// Dirichlet-to-Neumann sample: solve with datum f on Gamma_1 and return the
// magnetic Neumann trace on the requested patch (zero outside the patch).
DtnSample dtn_apply(const VectorField& A, const ScalarField& q, double k,
                    const PlaneField& f, const BoundaryPatch& in_patch,
                    const BoundaryPatch& out_patch, const LaxPhillipsConfig& cfg);

// (d_nu + i A.nu) u on a boundary plane, one-sided fourth-order stencil.
PlaneField magnetic_neumann_trace(const ScalarField& u, const VectorField& A,
                                  BoundaryPlaneId plane);

struct GaugeNormalization {
    VectorField A_new;
    ScalarField psi;
    VectorField grad_psi;  // z-derivative analytic, so A_new . nu = 0 exactly
};

// Boundary normalization A -> A + grad Psi with Psi|planes = 0 and
// d_nu Psi = -A.nu, removing the normal component on both planes.
GaugeNormalization gauge_normalize(const VectorField& A);

// A -> A + grad Psi (centered differences), q unchanged.
VectorField gauge_transform(const VectorField& A, const ScalarField& psi);

// Green formula defect in the slab: |(L_bar v, u) - (v, L u) + (d_nu v, u)_G1|
// over the max term magnitude; operators applied discretely.
double green_defect_slab(const ScalarField& u, const ScalarField& v, const VectorField& A,
                         const ScalarField& q, double k);

// Bounded-domain Green formula on (slab intersect ball), including the
// sphere-belt terms; fields sampled on the grid, surface integrals by
// interpolated quadrature.
double green_defect_ball(const ScalarField& u, const ScalarField& v, const VectorField& A,
                         const ScalarField& q, const SupportBall& ball);

// Lowest eigenvalues of the Dirichlet-plane operator by shifted inverse
// subspace iteration (meaningful for self-adjoint inputs).
std::vector<double> probe_discrete_spectrum(const VectorField& A, const ScalarField& q,
                                            int count = 4, int iters = 60);
std::vector<double> probe_free_spectrum(const SlabGrid& g, int count = 4, int iters = 40);

}  // namespace slabinv
