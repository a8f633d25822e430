#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icc/data_model.hpp"

namespace icc {

enum class Reduction { Svd, Pca, Nmf };

std::string reduction_name(Reduction r);
Reduction reduction_from_name(const std::string& name);

struct SvdResult {
  Matrix U;  // n x r, orthonormal columns
  Vector S;  // r singular values, descending
  Matrix V;  // m x r, orthonormal columns
};

/// Best rank-r factorization X ~ U diag(S) V^T. Small dense inputs use a
/// full solver; large or sparse inputs use an iterative solver on the Gram
/// operator of the smaller side. Columns of V are oriented so that their
/// largest-magnitude entry is positive.
SvdResult truncated_svd(const Matrix& X, int r);
SvdResult truncated_svd(const SpMatrix& X, int r);
SvdResult truncated_svd(const DataMatrix& X, int r);

struct NmfOptions {
  int max_iters = 200;
  double tol = 1e-4;
  std::uint64_t seed = 0x5eedf00dull;
};

struct NmfFactors {
  Matrix W;  // n x r, entries >= 0
  Matrix H;  // r x m, entries >= 0
  std::vector<double> residual_history;  // Frobenius residual per iteration
};

/// Nonnegative factorization by alternating least squares: exact solves for
/// H given W and W given H, with negative entries projected to zero after
/// each solve. Stops at max_iters or when the relative residual change
/// drops below tol; the best iterate seen is returned.
NmfFactors nmf_acls(const Matrix& X, int r, const NmfOptions& opts = {});
NmfFactors nmf_acls(const SpMatrix& X, int r, const NmfOptions& opts = {});
NmfFactors nmf_acls(const DataMatrix& X, int r, const NmfOptions& opts = {});

struct ReducedMatrix {
  Matrix values;  // n x r scores
  Reduction method;
  int rank = 0;
  std::uint64_t source_hash = 0;
};

/// Low-rank representation of X: svd scores U diag(S), pca scores of the
/// column-wise z-scored matrix (zero-variance columns dropped first), or
/// the W factor of nmf_acls.
ReducedMatrix reduce(const DataMatrix& X, Reduction method, int r,
                     const NmfOptions& nmf_opts = {});

}  // namespace icc
