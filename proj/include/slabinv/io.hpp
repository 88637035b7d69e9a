// Field serialization: "SLBF" binary format and CSV slice export.
// Layout: magic "SLBF", version u32, N1 N2 Nn u32, X L f64 (36-byte header),
// then little-endian interleaved (re, im) f64 samples, x1 fastest.
#pragma once

#include <string>

#include "slabinv/grid.hpp"

namespace slabinv {

void write_field(const std::string& path, const ScalarField& f);
ScalarField read_field(const std::string& path);

// Boundary traces are stored as Nn = 1 slices of the same format.
void write_boundary_trace(const std::string& path, double X, double L, int n1, int n2,
                          const std::vector<cplx>& values);
std::vector<cplx> read_boundary_trace(const std::string& path, int& n1, int& n2,
                                      double& X, double& L);

// CSV of the z-slice m (columns x1,x2,re,im).
void write_csv_slice(const std::string& path, const ScalarField& f, int m);

}  // namespace slabinv
