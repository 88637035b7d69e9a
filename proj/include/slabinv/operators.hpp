// Second-order discretization of the magnetic Schrodinger operator
// sum_j (D_j + A_j)^2 + q on the slab grid: periodic across the x'
// truncation box, Dirichlet boundary planes.  Written in divergence-free
// form L = -Delta + 2 A.D + (q - i div A + A^2).
#pragma once

#include "slabinv/grid.hpp"

namespace slabinv {

class MagneticOperator {
  public:
    MagneticOperator(const SlabGrid& grid, const VectorField& A, const ScalarField& q);
    // Free Laplacian variant (A = 0, q = 0).
    explicit MagneticOperator(const SlabGrid& grid);

    const SlabGrid& grid() const { return grid_; }
    bool trivial() const { return trivial_; }

    // out = (L - shift) u on interior z planes; boundary planes of out are
    // set to zero.  u is read at all nodes, so fields that do not vanish on
    // the planes are differentiated faithfully.
    void apply(const std::vector<cplx>& u, std::vector<cplx>& out, cplx shift) const;

    ScalarField apply(const ScalarField& u, cplx shift) const;

    // || (L - k^2) u - F ||_2 / ||F||_2 over interior z planes.  Radiating
    // fields are not box-periodic, so x' margins exclude stencils that cross
    // the truncation seam.
    double residual(const ScalarField& u, const ScalarField& F, double k,
                    int margin = 0) const;

  private:
    SlabGrid grid_;
    bool trivial_{true};
    std::vector<cplx> a1_, a2_, a3_, qt_;  // qt = q - i div A + A.A
};

// Centered gradient of a scalar field: periodic in x', one-sided second
// order at the boundary planes.
VectorField gradient(const ScalarField& f);

}  // namespace slabinv
