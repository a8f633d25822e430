#include "icc/synth.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numeric>

namespace icc {

BlobData gaussian_blobs(const BlobSpec& spec) {
  if (spec.k < 1) throw std::invalid_argument("gaussian_blobs: k < 1");
  if (static_cast<int>(spec.per_cluster.size()) != spec.k)
    throw std::invalid_argument("gaussian_blobs: need one size per cluster");
  for (int s : spec.per_cluster)
    if (s < 2) throw std::invalid_argument("gaussian_blobs: cluster size < 2");
  if (spec.separation <= 0.0)
    throw std::invalid_argument("gaussian_blobs: separation must be positive");
  if (spec.dim < spec.k)
    throw std::invalid_argument("gaussian_blobs: dim must be at least k");

  const Index n = std::accumulate(spec.per_cluster.begin(), spec.per_cluster.end(), 0);
  auto eng = make_engine(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Centers at s * e_i are pairwise sqrt(2) * s apart.
  const double scale = spec.separation / std::sqrt(2.0);
  Matrix X(n, spec.dim);
  std::vector<int> labels(n);
  Index row = 0;
  for (int c = 0; c < spec.k; ++c) {
    for (int t = 0; t < spec.per_cluster[c]; ++t, ++row) {
      labels[row] = c;
      for (int j = 0; j < spec.dim; ++j) X(row, j) = gauss(eng);
      X(row, c) += scale;
    }
  }

  // Random rotation so the clusters are not axis-aligned.
  Matrix G(spec.dim, spec.dim);
  for (int i = 0; i < spec.dim; ++i)
    for (int j = 0; j < spec.dim; ++j) G(i, j) = gauss(eng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < spec.dim; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  X = X * Q.transpose();

  return BlobData{DataMatrix(std::move(X)), partition_from_labels(labels)};
}

SimilarityMatrix noisy_block_matrix(const std::vector<int>& sizes, double epsilon,
                                    std::uint64_t seed) {
  if (sizes.empty()) throw std::invalid_argument("noisy_block_matrix: no sizes");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("noisy_block_matrix: size < 1");
  if (epsilon < 0.0) throw std::invalid_argument("noisy_block_matrix: epsilon < 0");

  const Index n = std::accumulate(sizes.begin(), sizes.end(), 0);
  std::vector<int> block(n);
  Index at = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b)
    for (int t = 0; t < sizes[b]; ++t) block[at++] = static_cast<int>(b);

  auto eng = make_engine(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix M = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    M(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = block[i] == block[j] ? 1.0 : epsilon * unif(eng);
      M(i, j) = M(j, i) = v;
    }
  }
  return SimilarityMatrix(std::move(M));
}

}  // namespace icc
