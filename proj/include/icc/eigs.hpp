#pragma once

#include <cstdint>
#include <functional>

#include "icc/core.hpp"

namespace icc {

using LinOp = std::function<Vector(const Vector&)>;

struct SymEigsResult {
  Vector values;   // descending
  Matrix vectors;  // dim x nev, columns match values
  bool converged = false;
  int matvecs = 0;
};

/// Largest algebraic eigenpairs of a symmetric operator, by Lanczos with
/// full reorthogonalization. Converged Ritz vectors are deflated and the
/// iteration restarted, so eigenvalues of multiplicity > 1 are resolved.
SymEigsResult lanczos_largest(const LinOp& op, Index dim, int nev,
                              double tol = 1e-10, int max_restarts = 8,
                              std::uint64_t seed = 0x51a3c5d2u);

}  // namespace icc
