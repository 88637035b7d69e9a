// Matrix-free restarted GMRES for the complex linear systems (interior
// resolvent solves and the Fredholm equation of the gluing scheme).
#pragma once

#include <functional>

#include "slabinv/common.hpp"

namespace slabinv {

struct KrylovResult {
    bool converged{false};
    int iterations{0};
    double residual{0};  // relative to ||b||
};

using LinearMap = std::function<void(const std::vector<cplx>&, std::vector<cplx>&)>;

// Right-preconditioned GMRES(m): solves A x = b with x = M y.  Pass an
// identity map when no preconditioner is wanted.  x holds the result.
KrylovResult gmres(const LinearMap& A, const LinearMap& M, const std::vector<cplx>& b,
                   std::vector<cplx>& x, double tol, int restart = 60,
                   int max_iters = 2000);

}  // namespace slabinv
