#pragma once

#include <cstdint>
#include <string>

#include "icc/data_model.hpp"

namespace icc {

/// Symmetric nonnegative similarity matrix with positive diagonal.
class SimilarityMatrix {
 public:
  explicit SimilarityMatrix(Matrix values);

  const Matrix& values() const { return values_; }
  Index size() const { return values_.rows(); }

 private:
  Matrix values_;
};

/// Pairwise cosines of the rows of X. Throws on zero rows.
Matrix cosine_similarity(const Matrix& X);

struct KmeansOptions {
  int restarts = 100;
  int max_iters = 300;
};

struct KmeansResult {
  Clustering clustering;
  double objective = 0.0;  // sum of squared distances of unit rows to centroids
  int restarts_used = 0;
};

/// k-means on unit-normalized rows with cosine assignment; keeps the best
/// of `restarts` randomly initialized runs. Empty clusters are repaired by
/// reseeding with the point farthest from its centroid.
KmeansResult spherical_kmeans(const Matrix& X, int k,
                              const KmeansOptions& opts = {},
                              std::uint64_t seed = 0);

/// Principal direction divisive partitioning: repeatedly splits the
/// largest-scatter cluster by the sign of the projections of its centered
/// rows onto their leading principal direction. Deterministic.
Clustering pddp(const Matrix& X, int k);

/// One spherical k-means run initialized from the pddp(X, k) centroids.
KmeansResult pddp_kmeans(const Matrix& X, int k, int max_iters = 300);

/// Clustering by rank-k nonnegative factorization: object i goes to the
/// largest coefficient of row i of W (ties to the lowest index).
Clustering nmf_cluster(const Matrix& X, int k, std::uint64_t seed = 0);

/// Power iteration clustering: early-stopped power iteration on the
/// row-normalized similarity matrix, then 1-d k-means on the embedding.
Clustering pic(const SimilarityMatrix& S, int k, std::uint64_t seed = 0);

/// Normalized cuts (random-walk form): embeds rows by the eigenvectors for
/// the k smallest normalized-Laplacian eigenvalues, rescaled by D^{-1/2},
/// then Euclidean k-means.
Clustering ncut(const SimilarityMatrix& S, int k, std::uint64_t seed = 0);

/// Spectral clustering on the top-k eigenvectors of D^{-1/2} S D^{-1/2}
/// with row normalization, then Euclidean k-means.
Clustering njw(const SimilarityMatrix& S, int k, std::uint64_t seed = 0);

}  // namespace icc
