#include "icc/data_model.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <unordered_map>

namespace icc {

namespace {

std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return hash_bytes(h, &bits, sizeof bits);
}

void check_shape(Index n, Index m) {
  if (n < 2) throw std::invalid_argument("DataMatrix: need at least 2 objects (rows)");
  if (m < 1) throw std::invalid_argument("DataMatrix: need at least 1 feature (column)");
}

}  // namespace

DataMatrix::DataMatrix(Matrix values)
    : storage_(Storage::Dense), dense_(std::move(values)) {
  rows_ = dense_.rows();
  cols_ = dense_.cols();
  check_shape(rows_, cols_);
  if (!all_finite(dense_)) throw std::invalid_argument("DataMatrix: non-finite entry");
  nonneg_ = (dense_.array() >= 0.0).all();
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = hash_bytes(h, &rows_, sizeof rows_);
  h = hash_bytes(h, &cols_, sizeof cols_);
  for (Index j = 0; j < cols_; ++j)
    for (Index i = 0; i < rows_; ++i) h = hash_double(h, dense_(i, j));
  fingerprint_ = splitmix64(h);
}

DataMatrix::DataMatrix(SpMatrix values)
    : storage_(Storage::Sparse), sparse_(std::move(values)) {
  sparse_.makeCompressed();
  rows_ = sparse_.rows();
  cols_ = sparse_.cols();
  check_shape(rows_, cols_);
  if (!all_finite(sparse_)) throw std::invalid_argument("DataMatrix: non-finite entry");
  nonneg_ = true;
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = hash_bytes(h, &rows_, sizeof rows_);
  h = hash_bytes(h, &cols_, sizeof cols_);
  for (int k = 0; k < sparse_.outerSize(); ++k)
    for (SpMatrix::InnerIterator it(sparse_, k); it; ++it) {
      if (it.value() < 0.0) nonneg_ = false;
      Index r = it.row(), c = it.col();
      h = hash_bytes(h, &r, sizeof r);
      h = hash_bytes(h, &c, sizeof c);
      h = hash_double(h, it.value());
    }
  fingerprint_ = splitmix64(h);
}

const Matrix& DataMatrix::dense() const {
  if (storage_ != Storage::Dense)
    throw std::logic_error("DataMatrix::dense: matrix is sparse; use to_dense()");
  return dense_;
}

const SpMatrix& DataMatrix::sparse() const {
  if (storage_ != Storage::Sparse)
    throw std::logic_error("DataMatrix::sparse: matrix is dense");
  return sparse_;
}

Matrix DataMatrix::to_dense() const {
  return storage_ == Storage::Dense ? dense_ : Matrix(sparse_);
}

Clustering Clustering::from_labels(const std::vector<int>& raw_labels) {
  if (raw_labels.empty()) throw std::invalid_argument("Clustering: empty label vector");
  Clustering c;
  c.labels_.resize(raw_labels.size());
  std::unordered_map<int, int> remap;
  int next = 0;
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(raw_labels[i], next);
    if (inserted) ++next;
    c.labels_[i] = it->second;
  }
  c.k_ = next;
  return c;
}

std::vector<std::vector<int>> Clustering::blocks() const {
  std::vector<std::vector<int>> out(k_);
  for (std::size_t i = 0; i < labels_.size(); ++i)
    out[labels_[i]].push_back(static_cast<int>(i));
  return out;
}

Clustering partition_from_labels(const std::vector<int>& raw_labels) {
  return Clustering::from_labels(raw_labels);
}

bool partitions_equal(const Clustering& a, const Clustering& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("partitions_equal: length mismatch");
  // Canonical form makes equality a plain vector comparison.
  return a.labels() == b.labels();
}

namespace {

// Hungarian algorithm (potentials form) for a square min-cost assignment.
long long min_cost_assignment(const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& cost) {
  const int n = static_cast<int>(cost.rows());
  const long long INF = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(n + 1, INF);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      long long delta = INF;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        long long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  long long total = 0;
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) total += cost(p[j] - 1, j - 1);
  return total;
}

}  // namespace

long long max_assignment_score(const IntMatrix& scores) {
  const int s = static_cast<int>(std::max(scores.rows(), scores.cols()));
  if (s == 0) return 0;
  const long long maxval = static_cast<long long>(scores.size() > 0 ? scores.maxCoeff() : 0);
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> cost(s, s);
  cost.setConstant(maxval);  // padding rows/cols score 0
  for (Index i = 0; i < scores.rows(); ++i)
    for (Index j = 0; j < scores.cols(); ++j)
      cost(i, j) = maxval - static_cast<long long>(scores(i, j));
  const long long min_total = min_cost_assignment(cost);
  return static_cast<long long>(s) * maxval - min_total;
}

double accuracy(const Clustering& pred, const Clustering& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("accuracy: length mismatch");
  IntMatrix confusion = IntMatrix::Zero(pred.k(), truth.k());
  const auto& pl = pred.labels();
  const auto& tl = truth.labels();
  for (std::size_t i = 0; i < pl.size(); ++i) confusion(pl[i], tl[i]) += 1;
  return static_cast<double>(max_assignment_score(confusion)) /
         static_cast<double>(pred.size());
}

void Ensemble::add(Clustering c, Provenance p) {
  if (c.empty()) throw std::invalid_argument("Ensemble: empty clustering");
  if (members_.empty()) {
    n_ = c.size();
  } else if (c.size() != n_) {
    throw std::invalid_argument("Ensemble: clustering over different object count");
  }
  members_.emplace_back(std::move(c), std::move(p));
}

}  // namespace icc
