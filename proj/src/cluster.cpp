#include "icc/cluster.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "icc/dimred.hpp"
#include "icc/eigs.hpp"

namespace icc {

SimilarityMatrix::SimilarityMatrix(Matrix values) : values_(std::move(values)) {
  const Index n = values_.rows();
  if (n < 2 || values_.cols() != n)
    throw std::invalid_argument("SimilarityMatrix: need a square matrix, n >= 2");
  if (!all_finite(values_))
    throw std::invalid_argument("SimilarityMatrix: non-finite entry");
  if ((values_.array() < 0.0).any())
    throw std::invalid_argument("SimilarityMatrix: negative entry");
  const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
  if ((values_ - values_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("SimilarityMatrix: not symmetric");
  for (Index i = 0; i < n; ++i)
    if (values_(i, i) <= 0.0)
      throw std::invalid_argument("SimilarityMatrix: diagonal must be positive");
}

Matrix cosine_similarity(const Matrix& X) {
  Vector norms = X.rowwise().norm();
  if ((norms.array() <= 0.0).any())
    throw std::invalid_argument("cosine_similarity: zero row");
  Matrix Xn = norms.cwiseInverse().asDiagonal() * X;
  Matrix S = Xn * Xn.transpose();
  return S;
}

namespace {

// ----- shared Lloyd loop ---------------------------------------------------
//
// Works on prepared rows (unit-normalized for the spherical variant).
// Assignment ties go to the lowest centroid index; empty clusters are
// repaired by moving the point farthest from its centroid.

struct LloydOutcome {
  std::vector<int> assign;
  double objective = 0.0;
  int iters = 0;
};

void assign_points(const Matrix& X, const Matrix& C, bool spherical,
                   std::vector<int>& assign, Vector& dist) {
  const Index n = X.rows();
  const int k = static_cast<int>(C.rows());
  // Distances per centroid. The spherical variant works on unit rows and
  // unit centroids, where 2 - 2 cos equals the squared distance and the
  // cosines come from one well-scaled product. The Euclidean variant
  // forms explicit differences: the x^2 + c^2 - 2xc shortcut cancels
  // catastrophically when centroids sit closer than sqrt(eps) * |x|,
  // which degenerate spectral embeddings do produce.
  Matrix d2(n, k);
  if (spherical) {
    d2.noalias() = X * C.transpose();
    d2 = (2.0 - 2.0 * d2.array()).max(0.0);
  } else {
    for (int j = 0; j < k; ++j)
      d2.col(j) = (X.rowwise() - C.row(j)).rowwise().squaredNorm();
  }
  for (Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      // Ties keep the lowest index.
      if (d2(i, j) < best_d) {
        best_d = d2(i, j);
        best = j;
      }
    }
    assign[i] = best;
    dist[i] = best_d;
  }
}

void repair_empty(const Matrix& X, Matrix& C, std::vector<int>& assign,
                  Vector& dist, int k) {
  std::vector<int> count(k, 0);
  for (int a : assign) ++count[a];
  for (int j = 0; j < k; ++j) {
    if (count[j] > 0) continue;
    // Reseed with the worst-fit point from a cluster that can spare one.
    Index worst = -1;
    double worst_d = -1.0;
    for (Index i = 0; i < X.rows(); ++i) {
      if (count[assign[i]] <= 1) continue;
      if (dist(i) > worst_d) {
        worst_d = dist(i);
        worst = i;
      }
    }
    if (worst < 0) throw std::runtime_error("kmeans: cannot repair empty cluster");
    --count[assign[worst]];
    assign[worst] = j;
    ++count[j];
    C.row(j) = X.row(worst);
    dist(worst) = 0.0;
  }
}

void update_centroids(const Matrix& X, const std::vector<int>& assign, int k,
                      bool spherical, Matrix& C) {
  C.setZero(k, X.cols());
  std::vector<int> count(k, 0);
  for (Index i = 0; i < X.rows(); ++i) {
    C.row(assign[i]) += X.row(i);
    ++count[assign[i]];
  }
  for (int j = 0; j < k; ++j) {
    if (count[j] == 0) continue;
    if (spherical) {
      const double nrm = C.row(j).norm();
      if (nrm > 1e-300)
        C.row(j) /= nrm;
      else
        C.row(j).setZero();  // antipodal cancellation; next repair reseeds
    } else {
      C.row(j) /= static_cast<double>(count[j]);
    }
  }
}

LloydOutcome lloyd(const Matrix& X, int k, Matrix C, int max_iters, bool spherical) {
  const Index n = X.rows();
  LloydOutcome out;
  out.assign.assign(n, -1);
  Vector dist(n);
  std::vector<int> prev;
  for (int it = 0; it < std::max(1, max_iters); ++it) {
    assign_points(X, C, spherical, out.assign, dist);
    repair_empty(X, C, out.assign, dist, k);
    out.iters = it + 1;
    if (out.assign == prev) break;
    prev = out.assign;
    update_centroids(X, out.assign, k, spherical, C);
  }
  update_centroids(X, out.assign, k, spherical, C);
  assign_points(X, C, spherical, out.assign, dist);
  repair_empty(X, C, out.assign, dist, k);
  out.objective = dist.sum();
  return out;
}

Matrix pick_rows(const Matrix& X, int k, std::mt19937_64& eng) {
  // Partial Fisher-Yates over row indices.
  std::vector<Index> idx(X.rows());
  std::iota(idx.begin(), idx.end(), Index{0});
  Matrix C(k, X.cols());
  for (int j = 0; j < k; ++j) {
    std::uniform_int_distribution<Index> pick(j, static_cast<Index>(idx.size()) - 1);
    std::swap(idx[j], idx[pick(eng)]);
    C.row(j) = X.row(idx[j]);
  }
  return C;
}

Matrix unit_rows(const Matrix& X) {
  Vector norms = X.rowwise().norm();
  if ((norms.array() <= 0.0).any())
    throw std::invalid_argument("spherical kmeans: zero row");
  return norms.cwiseInverse().asDiagonal() * X;
}

KmeansResult best_of_restarts(const Matrix& Xp, int k, const KmeansOptions& opts,
                              std::uint64_t seed, bool spherical) {
  KmeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int t = 0; t < std::max(1, opts.restarts); ++t) {
    auto eng = make_engine(mix_seed(seed, static_cast<std::uint64_t>(t)));
    Matrix C = pick_rows(Xp, k, eng);
    auto run = lloyd(Xp, k, std::move(C), opts.max_iters, spherical);
    if (run.objective < best.objective) {
      best.objective = run.objective;
      best.clustering = partition_from_labels(run.assign);
    }
    ++best.restarts_used;
  }
  if (best.clustering.k() != k)
    throw std::runtime_error("kmeans: fewer than k non-empty clusters");
  return best;
}

}  // namespace

KmeansResult spherical_kmeans(const Matrix& X, int k, const KmeansOptions& opts,
                              std::uint64_t seed) {
  if (k < 1 || k > X.rows())
    throw std::invalid_argument("spherical_kmeans: k out of range");
  if (!all_finite(X)) throw std::invalid_argument("spherical_kmeans: non-finite input");
  Matrix Xn = unit_rows(X);
  return best_of_restarts(Xn, k, opts, seed, /*spherical=*/true);
}

namespace {

// Projections of the centered block onto its leading principal direction,
// computed from whichever Gram side is smaller. Orientation is fixed by
// making the largest-magnitude projection positive.
Vector leading_projections(const Matrix& B) {
  const Index c = B.rows(), m = B.cols();
  Vector p;
  constexpr Index kDenseCutoff = 1024;
  if (c <= m) {
    if (c <= kDenseCutoff) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(B * B.transpose());
      p = es.eigenvectors().col(c - 1) * std::sqrt(std::max(0.0, es.eigenvalues()(c - 1)));
    } else {
      LinOp op = [&B](const Vector& v) -> Vector { return B * (B.transpose() * v).eval(); };
      auto eig = lanczos_largest(op, c, 1, 1e-10);
      p = eig.vectors.col(0) * std::sqrt(std::max(0.0, eig.values(0)));
    }
  } else {
    Vector v1;
    if (m <= kDenseCutoff) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(B.transpose() * B);
      v1 = es.eigenvectors().col(m - 1);
    } else {
      LinOp op = [&B](const Vector& v) -> Vector { return B.transpose() * (B * v).eval(); };
      v1 = lanczos_largest(op, m, 1, 1e-10).vectors.col(0);
    }
    p = B * v1;
  }
  Index imax;
  p.cwiseAbs().maxCoeff(&imax);
  if (p(imax) < 0.0) p = -p;
  return p;
}

struct PddpLeaf {
  std::vector<int> members;  // increasing object indices
  double scatter = 0.0;
};

double cluster_scatter(const Matrix& X, const std::vector<int>& members) {
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(X.cols());
  for (int i : members) mu += X.row(i);
  mu /= static_cast<double>(members.size());
  double s = 0.0;
  for (int i : members) s += (X.row(i) - mu).squaredNorm();
  return s;
}

}  // namespace

Clustering pddp(const Matrix& X, int k) {
  const Index n = X.rows();
  if (k < 1 || k > n) throw std::invalid_argument("pddp: k out of range");
  if (!all_finite(X)) throw std::invalid_argument("pddp: non-finite input");

  std::vector<PddpLeaf> leaves;
  {
    PddpLeaf root;
    root.members.resize(n);
    std::iota(root.members.begin(), root.members.end(), 0);
    root.scatter = cluster_scatter(X, root.members);
    leaves.push_back(std::move(root));
  }

  while (static_cast<int>(leaves.size()) < k) {
    // Largest scatter among splittable leaves; ties to the earliest leaf.
    int pick = -1;
    for (std::size_t j = 0; j < leaves.size(); ++j) {
      if (leaves[j].members.size() < 2) continue;
      if (pick < 0 || leaves[j].scatter > leaves[pick].scatter) pick = static_cast<int>(j);
    }
    if (pick < 0) throw std::runtime_error("pddp: no splittable cluster left");

    const auto members = leaves[pick].members;
    const Index c = static_cast<Index>(members.size());
    Matrix B(c, X.cols());
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(X.cols());
    for (Index t = 0; t < c; ++t) mu += X.row(members[t]);
    mu /= static_cast<double>(c);
    for (Index t = 0; t < c; ++t) B.row(t) = X.row(members[t]) - mu;

    std::vector<int> left, right;
    Vector p = leading_projections(B);
    const double spread = p.maxCoeff() - p.minCoeff();
    if (spread <= 1e-12 * std::max(1.0, p.cwiseAbs().maxCoeff())) {
      // Degenerate direction (identical points): split at the median index.
      const Index half = (c + 1) / 2;
      for (Index t = 0; t < c; ++t)
        (t < half ? left : right).push_back(members[t]);
    } else {
      for (Index t = 0; t < c; ++t)
        (p(t) >= 0.0 ? left : right).push_back(members[t]);
      if (left.empty() || right.empty()) {
        // Numerically one-sided; fall back to the median split.
        left.clear();
        right.clear();
        const Index half = (c + 1) / 2;
        for (Index t = 0; t < c; ++t)
          (t < half ? left : right).push_back(members[t]);
      }
    }

    PddpLeaf l, r;
    l.members = std::move(left);
    r.members = std::move(right);
    l.scatter = cluster_scatter(X, l.members);
    r.scatter = cluster_scatter(X, r.members);
    leaves[pick] = std::move(l);
    leaves.push_back(std::move(r));
  }

  std::vector<int> labels(n, -1);
  for (std::size_t j = 0; j < leaves.size(); ++j)
    for (int i : leaves[j].members) labels[i] = static_cast<int>(j);
  return partition_from_labels(labels);
}

KmeansResult pddp_kmeans(const Matrix& X, int k, int max_iters) {
  Clustering seed_partition = pddp(X, k);
  Matrix Xn = unit_rows(X);
  Matrix C = Matrix::Zero(k, X.cols());
  std::vector<int> count(k, 0);
  for (Index i = 0; i < Xn.rows(); ++i) {
    C.row(seed_partition.labels()[i]) += Xn.row(i);
    ++count[seed_partition.labels()[i]];
  }
  for (int j = 0; j < k; ++j) {
    const double nrm = C.row(j).norm();
    if (nrm > 1e-300) C.row(j) /= nrm;
  }
  auto run = lloyd(Xn, k, std::move(C), max_iters, /*spherical=*/true);
  KmeansResult out;
  out.clustering = partition_from_labels(run.assign);
  out.objective = run.objective;
  out.restarts_used = 1;
  if (out.clustering.k() != k)
    throw std::runtime_error("pddp_kmeans: fewer than k non-empty clusters");
  return out;
}

Clustering nmf_cluster(const Matrix& X, int k, std::uint64_t seed) {
  if (k < 1 || k > std::min(X.rows(), X.cols()))
    throw std::invalid_argument("nmf_cluster: k out of range");
  NmfOptions opts;
  opts.seed = seed;
  NmfFactors f = nmf_acls(X, k, opts);
  std::vector<int> labels(X.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    Index jmax = 0;
    f.W.row(i).maxCoeff(&jmax);  // Eigen returns the lowest tied index
    labels[i] = static_cast<int>(jmax);
  }
  Clustering c = partition_from_labels(labels);
  if (c.k() != k)
    throw std::runtime_error("nmf_cluster: factorization left an empty cluster");
  return c;
}

namespace {

Clustering kmeans_on_embedding(const Matrix& E, int k, std::uint64_t seed,
                               const KmeansOptions& opts = {}) {
  KmeansResult r = best_of_restarts(E, k, opts, seed, /*spherical=*/false);
  return r.clustering;
}

Vector degrees_checked(const SimilarityMatrix& S, const char* who) {
  Vector d = S.values().rowwise().sum();
  if ((d.array() <= 0.0).any())
    throw std::invalid_argument(std::string(who) + ": zero-degree vertex");
  return d;
}

}  // namespace

Clustering pic(const SimilarityMatrix& S, int k, std::uint64_t seed) {
  const Index n = S.size();
  if (k < 1 || k > n) throw std::invalid_argument("pic: k out of range");
  Vector d = degrees_checked(S, "pic");

  // Degree-proportional start with a tiny seeded jitter; on exactly
  // symmetric graphs the plain degree vector is a fixed point and carries
  // no block information.
  auto eng = make_engine(mix_seed(seed, "pic-start"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = d(i) * (1.0 + 1e-6 * unif(eng));
  v /= v.lpNorm<1>();

  Matrix W = d.cwiseInverse().asDiagonal() * S.values();
  const double eps_hat = 1e-5 / static_cast<double>(n);
  Vector prev_delta = Vector::Zero(n);
  for (int t = 0; t < 1000; ++t) {
    Vector next = W * v;
    next /= next.lpNorm<1>();
    Vector delta = (next - v).cwiseAbs();
    const double accel = (delta - prev_delta).cwiseAbs().maxCoeff();
    v = next;
    prev_delta = delta;
    if (t >= 1 && accel < eps_hat) break;
  }

  return kmeans_on_embedding(v, k, mix_seed(seed, "pic-kmeans"));
}

namespace {

// Top-k eigenvectors of D^{-1/2} S D^{-1/2} (largest eigenvalues, which
// match the smallest normalized-Laplacian eigenvalues).
Matrix normalized_embedding(const SimilarityMatrix& S, const Vector& d, int k) {
  const Index n = S.size();
  Vector dmh = d.cwiseSqrt().cwiseInverse();
  Matrix N = dmh.asDiagonal() * S.values() * dmh.asDiagonal();
  constexpr Index kDenseCutoff = 2000;
  if (n <= kDenseCutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(N);
    return es.eigenvectors().rightCols(k).rowwise().reverse();
  }
  LinOp op = [&N](const Vector& v) -> Vector { return N * v; };
  return lanczos_largest(op, n, k, 1e-10).vectors;
}

}  // namespace

Clustering ncut(const SimilarityMatrix& S, int k, std::uint64_t seed) {
  const Index n = S.size();
  if (k < 1 || k > n) throw std::invalid_argument("ncut: k out of range");
  Vector d = degrees_checked(S, "ncut");
  Matrix U = normalized_embedding(S, d, k);
  Matrix E = d.cwiseSqrt().cwiseInverse().asDiagonal() * U;  // random-walk eigenvectors
  return kmeans_on_embedding(E, k, mix_seed(seed, "ncut-kmeans"));
}

Clustering njw(const SimilarityMatrix& S, int k, std::uint64_t seed) {
  const Index n = S.size();
  if (k < 1 || k > n) throw std::invalid_argument("njw: k out of range");
  Vector d = degrees_checked(S, "njw");
  Matrix U = normalized_embedding(S, d, k);

  Vector rn = U.rowwise().norm();
  const double tiny = 1e-12 * std::max(1e-300, rn.maxCoeff());
  std::vector<Index> valid, deferred;
  for (Index i = 0; i < n; ++i) (rn(i) > tiny ? valid : deferred).push_back(i);
  if (static_cast<int>(valid.size()) < k)
    throw std::runtime_error("njw: embedding collapsed below k usable rows");

  Matrix E(static_cast<Index>(valid.size()), k);
  for (std::size_t t = 0; t < valid.size(); ++t)
    E.row(static_cast<Index>(t)) = U.row(valid[t]) / rn(valid[t]);

  Clustering sub = kmeans_on_embedding(E, k, mix_seed(seed, "njw-kmeans"));

  std::vector<int> labels(n, -1);
  for (std::size_t t = 0; t < valid.size(); ++t) labels[valid[t]] = sub.labels()[t];
  // Rows the embedding could not place follow their most similar placed
  // neighbor.
  for (Index i : deferred) {
    Index best = -1;
    double best_s = -1.0;
    for (Index j : valid)
      if (S.values()(i, j) > best_s) {
        best_s = S.values()(i, j);
        best = j;
      }
    labels[i] = labels[best];
  }
  Clustering c = partition_from_labels(labels);
  if (c.k() != k) throw std::runtime_error("njw: fewer than k non-empty clusters");
  return c;
}

}  // namespace icc
