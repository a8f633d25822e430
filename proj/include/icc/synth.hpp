#pragma once

#include <cstdint>
#include <vector>

#include "icc/cluster.hpp"
#include "icc/data_model.hpp"

namespace icc {

struct BlobSpec {
  int k = 1;
  std::vector<int> per_cluster;  // one size per cluster, each >= 2
  int dim = 1;
  double separation = 1.0;  // center distance in within-cluster std units
  std::uint64_t seed = 0;
};

struct BlobData {
  DataMatrix X;
  Clustering truth;
};

/// k isotropic unit-variance Gaussian clusters whose centers sit at
/// pairwise distance >= separation. Requires dim >= k (centers are placed
/// on scaled coordinate axes, then the whole cloud is randomly rotated).
BlobData gaussian_blobs(const BlobSpec& spec);

/// Block-diagonal all-ones blocks plus epsilon-scaled symmetric uniform
/// noise on the off-diagonal blocks.
SimilarityMatrix noisy_block_matrix(const std::vector<int>& sizes, double epsilon,
                                    std::uint64_t seed);

}  // namespace icc
