// Thin FFTW wrappers.  Plan creation is serialized (FFTW planning is not
// thread-safe); execution uses the new-array interface so one plan serves
// concurrent callers with distinct buffers.
#pragma once

#include <vector>

#include "slabinv/common.hpp"

namespace slabinv {

// In-place 2D complex transform on row-major (ny rows, nx fast) data.
void fft2(std::vector<cplx>& data, int nx, int ny, bool forward);

// 3D DST-I applied to interior-node data, one call per real array.
// Layout: row-major (nz slow, ny, nx fast), sizes are the interior counts.
// Applying it twice multiplies by 8 (n+1)(m+1)(k+1).
class Dst3 {
  public:
    Dst3(int nx, int ny, int nz);
    ~Dst3();
    Dst3(const Dst3&) = delete;
    Dst3& operator=(const Dst3&) = delete;
    void execute(double* data) const;
    double round_trip_scale() const {
        return 8.0 * (nx_ + 1.0) * (ny_ + 1.0) * (nz_ + 1.0);
    }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }

  private:
    int nx_, ny_, nz_;
    void* plan_{nullptr};
    mutable std::vector<double> scratch_;
};

// 1D FD Dirichlet Laplacian eigenvalue for DST-I mode p (1-based) at
// spacing d with M interior nodes: (2 - 2 cos(pi p/(M+1))) / d^2.
inline double fd_sine_eigenvalue(int p, int M, double d) {
    return (2.0 - 2.0 * std::cos(kPi * p / (M + 1))) / (d * d);
}

}  // namespace slabinv
