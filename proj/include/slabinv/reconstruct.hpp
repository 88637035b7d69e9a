// Fourier-data extraction from the interior integral identity with CGO
// pairs, curl-spectrum assembly from directional samples, inversion to the
// magnetic field difference, gauge recovery and q recovery.
#pragma once

#include <functional>

#include "slabinv/cgo.hpp"
#include "slabinv/laxphillips.hpp"

namespace slabinv {

// Cartesian lattice of xi samples on [-max, max]^3.
struct XiGrid {
    int n{17};
    double max{8.0};

    double step() const { return 2.0 * max / (n - 1); }
    Vec3 value(int a, int b, int c) const {
        return {-max + a * step(), -max + b * step(), -max + c * step()};
    }
    size_t size() const { return size_t(n) * n * n; }
    size_t idx(int a, int b, int c) const { return (size_t(c) * n + b) * n + a; }
};

// Precomputed quadrature data for the interior pairing: the integrand is
// supported where the potentials differ, so only those nodes are kept.
struct PairingContext {
    SlabGrid grid;
    SupportBall ball;
    CgoVariant variant{CgoVariant::Thm1};
    bool a_trivial{true};   // A1 == A2 (q recovery after gauge correction)
    bool real_fields{true};

    struct Node {
        int i, j, m;
        double w;  // quadrature weight including the cell volume
    };
    std::vector<Node> nodes;
    std::vector<std::array<cplx, 3>> adiff;  // A1 - A2
    std::vector<cplx> sq;                    // A1.A1 - A2.A2 + q1 - q2
    ExtendedScenario ext;                    // reflected potentials per variant

    static PairingContext build(const SlabGrid& g, const SupportBall& ball,
                                const VectorField& A1, const ScalarField& q1,
                                const VectorField& A2, const ScalarField& q2,
                                CgoVariant variant);
};

// int (A1-A2).((D u1) conj(u2) + u1 conj(D u2)) + (A1^2-A2^2+q1-q2) u1 conj(u2)
// over the slab ball, by trapezoid quadrature on the context nodes.  The CGO
// pair is evaluated analytically per node from the frequency set and the
// amplitude fields (value + gradient) on the two extended grids.
cplx interior_pairing(const PairingContext& ctx, const CgoFrequencySet& fs,
                      const CgoAmplitude& a1, const CgoAmplitude& a2);

struct ExtractOptions {
    std::vector<double> h_list{0.2, 0.1, 0.05};
    double cone_theta{0.45};
    CauchyPhaseOptions phase;
    bool extrapolate{true};
};

struct SampleDiag {
    std::vector<cplx> per_h;
    bool fallback{false};
};

// Directional magnetic-potential datum at xi: both tangential projections
// mu1.FT(D) and mu2.FT(D) obtained from the +/- mu1 pair of CGO builds.
// Thm1 integrates over the slab ball, Thm2 over the doubled region.
struct DirectionalSample {
    Vec3 xi, mu1, mu2;
    cplx mu1_dot, mu2_dot;
};

DirectionalSample extract_vector_sample(const PairingContext& ctx, Vec3 xi, int j, int k,
                                        const ExtractOptions& opt,
                                        SampleDiag* diag = nullptr);

// (q1 - q2)^ at xi with the transport-annihilated amplitude pair; requires
// A1 == A2 on the context.
cplx extract_q_sample(const PairingContext& ctx, Vec3 xi, const ExtractOptions& opt,
                      SampleDiag* diag = nullptr);

// --- spectra and inversion -------------------------------------------------

struct FrequencySamples {
    XiGrid grid;
    CgoVariant variant{CgoVariant::Thm1};
    // per lattice point: directional data (unit direction, dir.FT(D))
    std::vector<std::vector<std::pair<Vec3, cplx>>> dirs;
    std::vector<cplx> q_values;  // q recovery path
    std::vector<uint8_t> has_q;

    explicit FrequencySamples(const XiGrid& g = XiGrid{})
        : grid(g), dirs(g.size()), q_values(g.size(), cplx(0)), has_q(g.size(), 0) {}
};

struct CurlSpectrum {
    XiGrid grid;
    std::vector<cplx> c12, c13, c23;  // xi_j D_k - xi_k D_j
    std::vector<uint8_t> known;

    explicit CurlSpectrum(const XiGrid& g = XiGrid{})
        : grid(g),
          c12(g.size(), cplx(0)),
          c13(g.size(), cplx(0)),
          c23(g.size(), cplx(0)),
          known(g.size(), 0) {}

    // cyclic identity xi_1 C23 - xi_2 C13 + xi_3 C12 = 0, relative L2 defect
    double bianchi_defect() const;
};

struct AssemblyOptions {
    int fill_iterations{600};
};

// Least-squares tangential reconstruction of FT(D) per lattice point from
// the directional data, Hermitian symmetry fill for real potentials, and
// harmonic in-fill of cone holes ("analyticity" operationalized).
CurlSpectrum assemble_curl_spectrum(const FrequencySamples& samples,
                                    const AssemblyOptions& opt = {});

// Inverse Fourier synthesis of the three curl-difference components on the
// slab grid (dA_jk = partial_j D_k - partial_k D_j in real space).
struct CurlFields {
    ScalarField c12, c13, c23;
};
CurlFields invert_curl(const CurlSpectrum& spec, const SlabGrid& g);

ScalarField invert_q(const FrequencySamples& samples, const SlabGrid& g);

// --- gauge recovery --------------------------------------------------------

struct GaugeRecovery {
    ScalarField psi;
    double gradient_rel_err{0};   // grad psi against the synthesized D
    double boundary_trace{0};     // max |psi| on the boundary planes
};

// Psi^ = -i xi.D^ / |xi|^2 for curl-free data; throws NonGradientInput when
// the curl defect of the samples exceeds the tolerance.
GaugeRecovery gauge_from_curl(const XiGrid& grid, const std::vector<CVec3>& d_hat,
                              const SlabGrid& g, double curl_tol = 5e-2);

// --- data-mode uniqueness pairing -------------------------------------------

// Boundary pairing of (N1 - N2) f against the conjugate trace of a test
// solution on the output patch; the Green-formula chain equates it with the
// interior identity, so it vanishes when the maps coincide there.
cplx uniqueness_pairing_defect(const DtnSample& s1, const DtnSample& s2,
                               const PlaneField& test_trace);

}  // namespace slabinv
