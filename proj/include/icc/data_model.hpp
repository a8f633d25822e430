#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icc/core.hpp"

namespace icc {

enum class Storage { Dense, Sparse };

/// Immutable n x m data matrix (rows are objects, columns are features),
/// stored dense or sparse-compressed. Construction validates shape and
/// finiteness and records whether all entries are nonnegative.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values);
  explicit DataMatrix(SpMatrix values);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Storage storage() const { return storage_; }
  bool nonneg() const { return nonneg_; }

  const Matrix& dense() const;    // throws unless storage() == Dense
  const SpMatrix& sparse() const; // throws unless storage() == Sparse
  Matrix to_dense() const;        // materializes either storage

  /// Content hash over shape and entries; stable across runs.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  Storage storage_;
  Matrix dense_;
  SpMatrix sparse_;
  Index rows_ = 0, cols_ = 0;
  bool nonneg_ = false;
  std::uint64_t fingerprint_ = 0;
};

/// A partition of n objects into k non-empty clusters. Labels are kept in
/// canonical form: cluster ids are assigned in order of first appearance,
/// so two equal partitions have identical label vectors.
class Clustering {
 public:
  Clustering() = default;

  static Clustering from_labels(const std::vector<int>& raw_labels);

  const std::vector<int>& labels() const { return labels_; }
  int k() const { return k_; }
  Index size() const { return static_cast<Index>(labels_.size()); }
  bool empty() const { return labels_.empty(); }

  /// Object indices per cluster, in increasing order.
  std::vector<std::vector<int>> blocks() const;

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

Clustering partition_from_labels(const std::vector<int>& raw_labels);

/// True iff the two clusterings induce the same set partition.
bool partitions_equal(const Clustering& a, const Clustering& b);

/// Fraction of objects classified correctly under the best one-to-one
/// assignment of predicted clusters to reference classes; unmatched
/// clusters contribute nothing.
double accuracy(const Clustering& pred, const Clustering& truth);

/// Maximum-weight one-to-one assignment on a nonnegative score matrix.
/// Exposed for testing against exhaustive search.
long long max_assignment_score(const IntMatrix& scores);

struct Provenance {
  std::string algorithm;
  std::string input_id;
  int rank = 0;  // 0 when not applicable
  int ktilde = 0;
  std::uint64_t seed = 0;
};

/// A list of clusterings of the same n objects plus per-entry provenance.
class Ensemble {
 public:
  void add(Clustering c, Provenance p);

  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  Index n_objects() const { return n_; }

  const Clustering& clustering(int i) const { return members_.at(i).first; }
  const Provenance& provenance(int i) const { return members_.at(i).second; }

 private:
  std::vector<std::pair<Clustering, Provenance>> members_;
  Index n_ = 0;
};

}  // namespace icc
