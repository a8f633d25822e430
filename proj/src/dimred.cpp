#include "icc/dimred.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "icc/eigs.hpp"

namespace icc {

std::string reduction_name(Reduction r) {
  switch (r) {
    case Reduction::Svd: return "svd";
    case Reduction::Pca: return "pca";
    case Reduction::Nmf: return "nmf";
  }
  throw std::logic_error("reduction_name: bad enum");
}

Reduction reduction_from_name(const std::string& name) {
  if (name == "svd") return Reduction::Svd;
  if (name == "pca") return Reduction::Pca;
  if (name == "nmf") return Reduction::Nmf;
  throw std::invalid_argument("unknown reduction: " + name);
}

namespace {

constexpr Index kDenseSvdCutoff = 512;
constexpr double kIterTol = 1e-8;

void check_rank(Index n, Index m, int r) {
  if (r < 1 || r > std::min(n, m))
    throw std::invalid_argument("truncated_svd: rank out of range");
}

// Orient each column of V so its largest-magnitude entry is positive,
// flipping the matching column of U to keep U S V^T unchanged.
void fix_signs(Matrix& U, Matrix& V) {
  for (Index j = 0; j < V.cols(); ++j) {
    Index imax;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0.0) {
      V.col(j) = -V.col(j);
      U.col(j) = -U.col(j);
    }
  }
}

// Iterative path: eigenpairs of the Gram operator on the smaller side.
template <class MatT>
SvdResult svd_via_gram(const MatT& X, int r) {
  const Index n = X.rows(), m = X.cols();
  SvdResult out;
  if (m <= n) {
    LinOp op = [&X](const Vector& v) -> Vector {
      return X.transpose() * (X * v).eval();
    };
    auto eig = lanczos_largest(op, m, r, kIterTol);
    out.V = eig.vectors;
    out.S = eig.values.cwiseMax(0.0).cwiseSqrt();
    out.U = Matrix(n, r);
    for (int j = 0; j < r; ++j) {
      Vector u = X * out.V.col(j);
      const double s = out.S(j);
      out.U.col(j) = s > 1e-14 * out.S(0) ? Vector(u / s) : Vector(u.setZero());
    }
  } else {
    LinOp op = [&X](const Vector& v) -> Vector {
      return X * (X.transpose() * v).eval();
    };
    auto eig = lanczos_largest(op, n, r, kIterTol);
    out.U = eig.vectors;
    out.S = eig.values.cwiseMax(0.0).cwiseSqrt();
    out.V = Matrix(m, r);
    for (int j = 0; j < r; ++j) {
      Vector v = X.transpose() * out.U.col(j);
      const double s = out.S(j);
      out.V.col(j) = s > 1e-14 * out.S(0) ? Vector(v / s) : Vector(v.setZero());
    }
  }
  fix_signs(out.U, out.V);
  return out;
}

}  // namespace

SvdResult truncated_svd(const Matrix& X, int r) {
  check_rank(X.rows(), X.cols(), r);
  if (!all_finite(X)) throw std::invalid_argument("truncated_svd: non-finite input");
  if (std::min(X.rows(), X.cols()) <= kDenseSvdCutoff) {
    Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult out;
    out.U = svd.matrixU().leftCols(r);
    out.S = svd.singularValues().head(r);
    out.V = svd.matrixV().leftCols(r);
    if (!all_finite(out.U) || !all_finite(out.S) || !all_finite(out.V)) {
      // BDCSVD deflation can emit NaNs on some rank-deficient inputs
      // (Eigen 3.4.0); Jacobi is slower but does not.
      Eigen::JacobiSVD<Matrix> jsvd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
      out.U = jsvd.matrixU().leftCols(r);
      out.S = jsvd.singularValues().head(r);
      out.V = jsvd.matrixV().leftCols(r);
    }
    fix_signs(out.U, out.V);
    return out;
  }
  return svd_via_gram(X, r);
}

SvdResult truncated_svd(const SpMatrix& X, int r) {
  check_rank(X.rows(), X.cols(), r);
  if (!all_finite(X)) throw std::invalid_argument("truncated_svd: non-finite input");
  return svd_via_gram(X, r);
}

SvdResult truncated_svd(const DataMatrix& X, int r) {
  return X.storage() == Storage::Dense ? truncated_svd(X.dense(), r)
                                       : truncated_svd(X.sparse(), r);
}

namespace {

// Least-squares solve of A * Z = B for small square PSD A, tolerating rank
// deficiency (zeroed factor columns after projection).
Matrix solve_normal(const Matrix& A, const Matrix& B) {
  return A.colPivHouseholderQr().solve(B);
}

template <class MatT>
NmfFactors nmf_acls_impl(const MatT& X, int r, const NmfOptions& opts) {
  const Index n = X.rows(), m = X.cols();
  if (r < 1 || r > std::min(n, m))
    throw std::invalid_argument("nmf_acls: rank out of range");
  const double norm_x = X.norm();
  if (norm_x == 0.0) throw std::invalid_argument("nmf_acls: all-zero matrix");

  auto eng = make_engine(opts.seed);
  std::uniform_real_distribution<double> unif(
      std::nextafter(0.0, 1.0), 1.0);  // entries in (0, 1]
  Matrix W(n, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < n; ++i) W(i, j) = unif(eng);
  Matrix H = Matrix::Zero(r, m);

  NmfFactors best;
  double best_res = std::numeric_limits<double>::infinity();
  std::size_t best_len = 0;
  std::vector<double> history;
  double prev_res = std::numeric_limits<double>::infinity();

  for (int it = 0; it < opts.max_iters; ++it) {
    Matrix WtX = W.transpose() * X;
    H = solve_normal(W.transpose() * W, WtX).cwiseMax(0.0);
    Matrix HXt = H * X.transpose();
    W = solve_normal(H * H.transpose(), HXt).cwiseMax(0.0).transpose();

    // ||X - WH||_F^2 via traces; avoids materializing WH for sparse X.
    WtX.noalias() = W.transpose() * X;
    const double cross = (H.array() * WtX.array()).sum();
    const double wh = ((W.transpose() * W) * (H * H.transpose())).trace();
    const double res = std::sqrt(std::max(0.0, norm_x * norm_x - 2.0 * cross + wh));
    history.push_back(res);

    if (res < best_res) {
      best_res = res;
      best.W = W;
      best.H = H;
      best_len = history.size();
    }
    if (it > 0 && std::abs(prev_res - res) < opts.tol * std::max(prev_res, 1e-30))
      break;
    prev_res = res;
  }

  // Projected ALS is not monotone; keep the best iterate seen.
  best.residual_history.assign(history.begin(),
                               history.begin() + static_cast<long>(best_len));
  return best;
}

}  // namespace

NmfFactors nmf_acls(const Matrix& X, int r, const NmfOptions& opts) {
  if (!all_finite(X)) throw std::invalid_argument("nmf_acls: non-finite input");
  if ((X.array() < 0.0).any())
    throw std::invalid_argument("nmf_acls: input has negative entries");
  return nmf_acls_impl(X, r, opts);
}

NmfFactors nmf_acls(const SpMatrix& X, int r, const NmfOptions& opts) {
  if (!all_finite(X)) throw std::invalid_argument("nmf_acls: non-finite input");
  for (int k = 0; k < X.outerSize(); ++k)
    for (SpMatrix::InnerIterator it(X, k); it; ++it)
      if (it.value() < 0.0)
        throw std::invalid_argument("nmf_acls: input has negative entries");
  return nmf_acls_impl(X, r, opts);
}

NmfFactors nmf_acls(const DataMatrix& X, int r, const NmfOptions& opts) {
  if (!X.nonneg()) throw std::invalid_argument("nmf_acls: input has negative entries");
  return X.storage() == Storage::Dense ? nmf_acls(X.dense(), r, opts)
                                       : nmf_acls(X.sparse(), r, opts);
}

ReducedMatrix reduce(const DataMatrix& X, Reduction method, int r,
                     const NmfOptions& nmf_opts) {
  if (r < 1 || r > std::min(X.rows(), X.cols()))
    throw std::invalid_argument("reduce: rank out of range");
  ReducedMatrix out;
  out.method = method;
  out.rank = r;
  out.source_hash = X.fingerprint();

  switch (method) {
    case Reduction::Svd: {
      auto svd = truncated_svd(X, r);
      out.values = svd.U * svd.S.asDiagonal();
      break;
    }
    case Reduction::Pca: {
      // z-scoring densifies anyway, so work on the dense form.
      Matrix D = X.to_dense();
      const Index n = D.rows();
      std::vector<Index> kept;
      Vector mean(D.cols()), inv_std(D.cols());
      for (Index j = 0; j < D.cols(); ++j) {
        mean(j) = D.col(j).mean();
        const double var = (D.col(j).array() - mean(j)).square().sum() / n;
        if (var > 0.0) {
          inv_std(j) = 1.0 / std::sqrt(var);
          kept.push_back(j);
        }
      }
      if (r > std::min(n, static_cast<Index>(kept.size())))
        throw std::invalid_argument(
            "reduce: rank out of range after zero-variance column removal");
      Matrix Z(n, static_cast<Index>(kept.size()));
      for (std::size_t c = 0; c < kept.size(); ++c) {
        const Index j = kept[c];
        Z.col(static_cast<Index>(c)) = (D.col(j).array() - mean(j)) * inv_std(j);
      }
      auto svd = truncated_svd(Z, r);
      out.values = svd.U * svd.S.asDiagonal();
      break;
    }
    case Reduction::Nmf: {
      out.values = nmf_acls(X, r, nmf_opts).W;
      break;
    }
  }
  if (!all_finite(out.values)) throw std::runtime_error("reduce: non-finite scores");
  return out;
}

}  // namespace icc
