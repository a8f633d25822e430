#include <doctest.h>

#include <random>

#include "icc/cluster.hpp"
#include "icc/data_model.hpp"

using namespace icc;

namespace {

// Two bundles of nearly parallel unit directions, pointing opposite ways.
Matrix antipodal_bundles(std::mt19937_64& eng, int per_side, int dim) {
  std::normal_distribution<double> gauss(0.0, 0.01);
  Matrix X(2 * per_side, dim);
  for (int i = 0; i < 2 * per_side; ++i) {
    Vector v = Vector::Zero(dim);
    v(0) = i < per_side ? 1.0 : -1.0;
    for (int j = 0; j < dim; ++j) v(j) += gauss(eng);
    X.row(i) = v.normalized();
  }
  return X;
}

Matrix two_blobs(std::mt19937_64& eng, int per_side, int dim, double sep) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix X(2 * per_side, dim);
  for (int i = 0; i < 2 * per_side; ++i) {
    for (int j = 0; j < dim; ++j) X(i, j) = gauss(eng);
    X(i, 0) += i < per_side ? sep : -sep;
  }
  return X;
}

Clustering half_labels(int per_side) {
  std::vector<int> raw(2 * per_side, 0);
  for (int i = per_side; i < 2 * per_side; ++i) raw[i] = 1;
  return partition_from_labels(raw);
}

Matrix block_similarity(const std::vector<int>& sizes) {
  int n = 0;
  for (int s : sizes) n += s;
  Matrix S = Matrix::Zero(n, n);
  int at = 0;
  for (int s : sizes) {
    S.block(at, at, s, s).setOnes();
    at += s;
  }
  return S;
}

double spherical_objective(const Matrix& X, const Clustering& c) {
  Matrix Xn = X;
  for (Index i = 0; i < X.rows(); ++i) Xn.row(i) /= X.row(i).norm();
  Matrix C = Matrix::Zero(c.k(), X.cols());
  for (Index i = 0; i < X.rows(); ++i) C.row(c.labels()[i]) += Xn.row(i);
  for (int j = 0; j < c.k(); ++j)
    if (C.row(j).norm() > 0) C.row(j) /= C.row(j).norm();
  double obj = 0.0;
  for (Index i = 0; i < X.rows(); ++i)
    obj += (Xn.row(i) - C.row(c.labels()[i])).squaredNorm();
  return obj;
}

}  // namespace

TEST_CASE("SimilarityMatrix validation") {
  Matrix ok(2, 2);
  ok << 1, 0.5, 0.5, 1;
  CHECK_NOTHROW(SimilarityMatrix{Matrix(ok)});

  Matrix asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS(SimilarityMatrix{Matrix(asym)});

  Matrix neg(2, 2);
  neg << 1, -0.1, -0.1, 1;
  CHECK_THROWS(SimilarityMatrix{Matrix(neg)});

  Matrix zdiag(2, 2);
  zdiag << 0, 1, 1, 0;
  CHECK_THROWS(SimilarityMatrix{Matrix(zdiag)});
}

TEST_CASE("spherical_kmeans separates antipodal bundles") {
  auto eng = make_engine(3);
  Matrix X = antipodal_bundles(eng, 10, 4);
  auto res = spherical_kmeans(X, 2, {20, 100}, 5);
  CHECK(accuracy(res.clustering, half_labels(10)) == doctest::Approx(1.0));
  CHECK(res.restarts_used == 20);
}

TEST_CASE("spherical_kmeans k=1 objective") {
  auto eng = make_engine(5);
  Matrix X = antipodal_bundles(eng, 6, 3);
  auto res = spherical_kmeans(X, 1, {5, 100}, 1);
  CHECK(res.clustering.k() == 1);
  CHECK(res.objective == doctest::Approx(spherical_objective(X, res.clustering)));
}

TEST_CASE("spherical_kmeans determinism and errors") {
  auto eng = make_engine(7);
  Matrix X = two_blobs(eng, 8, 3, 6.0);
  auto a = spherical_kmeans(X, 3, {10, 50}, 11);
  auto b = spherical_kmeans(X, 3, {10, 50}, 11);
  CHECK(a.clustering.labels() == b.clustering.labels());
  CHECK(a.objective == b.objective);

  CHECK_THROWS(spherical_kmeans(X, 100, {}, 0));  // k > n
  Matrix withzero = X;
  withzero.row(3).setZero();
  CHECK_THROWS(spherical_kmeans(withzero, 2, {}, 0));
}

TEST_CASE("spherical_kmeans objective non-increasing over iterations") {
  auto eng = make_engine(13);
  Matrix X = two_blobs(eng, 10, 4, 2.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int iters = 1; iters <= 6; ++iters) {
    auto res = spherical_kmeans(X, 4, {1, iters}, 21);
    CHECK(res.objective <= prev + 1e-9);
    prev = res.objective;
  }
}

TEST_CASE("kmeans returns exactly k clusters even with duplicates") {
  Matrix X(6, 2);
  X << 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1;
  auto res = spherical_kmeans(X, 4, {5, 20}, 2);
  CHECK(res.clustering.k() == 4);
}

TEST_CASE("pddp recovers two blobs") {
  auto eng = make_engine(17);
  Matrix X = two_blobs(eng, 12, 5, 8.0);
  auto c = pddp(X, 2);
  CHECK(accuracy(c, half_labels(12)) == doctest::Approx(1.0));
}

TEST_CASE("pddp basics") {
  auto eng = make_engine(19);
  Matrix X = two_blobs(eng, 6, 3, 5.0);
  CHECK(pddp(X, 1).k() == 1);
  CHECK_THROWS(pddp(X, 13));

  auto a = pddp(X, 4);
  auto b = pddp(X, 4);
  CHECK(a.labels() == b.labels());  // deterministic
  CHECK(a.k() == 4);
}

TEST_CASE("pddp splits identical points at the median index") {
  Matrix X = Matrix::Ones(5, 3);
  auto c = pddp(X, 2);
  CHECK(c.k() == 2);
  CHECK(c.labels() == std::vector<int>{0, 0, 0, 1, 1});
}

TEST_CASE("pddp is permutation-equivariant") {
  auto eng = make_engine(23);
  Matrix X = two_blobs(eng, 8, 4, 6.0);
  auto base = pddp(X, 3);

  std::vector<Index> perm(X.rows());
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), eng);
  Matrix Xp(X.rows(), X.cols());
  for (Index i = 0; i < X.rows(); ++i) Xp.row(i) = X.row(perm[i]);
  auto permuted = pddp(Xp, 3);

  std::vector<int> back(X.rows());
  for (Index i = 0; i < X.rows(); ++i) back[perm[i]] = permuted.labels()[i];
  CHECK(partitions_equal(base, partition_from_labels(back)));
}

TEST_CASE("pddp_kmeans agrees with pddp on clean blobs and never does worse") {
  auto eng = make_engine(29);
  Matrix X = two_blobs(eng, 10, 4, 8.0);
  auto tree = pddp(X, 2);
  auto polished = pddp_kmeans(X, 2);
  CHECK(partitions_equal(tree, polished.clustering));
  CHECK(polished.objective <= spherical_objective(X, tree) + 1e-9);
  CHECK(polished.restarts_used == 1);

  // Noisier data: polishing may move points but not the objective upward.
  Matrix Y = two_blobs(eng, 10, 4, 1.5);
  auto tree2 = pddp(Y, 3);
  auto polished2 = pddp_kmeans(Y, 3);
  CHECK(polished2.objective <= spherical_objective(Y, tree2) + 1e-9);
}

TEST_CASE("nmf_cluster finds block structure") {
  Matrix X(4, 4);
  X << 1, 1, 0, 0,
       1, 1, 0, 0,
       0, 0, 1, 1,
       0, 0, 1, 1;
  auto c = nmf_cluster(X, 2, 3);
  CHECK(partitions_equal(c, partition_from_labels({0, 0, 1, 1})));
  CHECK(nmf_cluster(X, 1, 3).k() == 1);

  Matrix neg(2, 2);
  neg << 1, -1, 0, 1;
  CHECK_THROWS(nmf_cluster(neg, 2, 0));
}

TEST_CASE("pic recovers blocks of an all-ones block matrix") {
  SimilarityMatrix S{block_similarity({3, 3})};
  auto c = pic(S, 2, 7);
  CHECK(partitions_equal(c, partition_from_labels({0, 0, 0, 1, 1, 1})));
  CHECK(pic(S, 1, 7).k() == 1);
}

TEST_CASE("ncut recovers three blocks") {
  SimilarityMatrix S{block_similarity({4, 4, 4})};
  auto c = ncut(S, 3, 11);
  CHECK(partitions_equal(
      c, partition_from_labels({0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2})));
  CHECK(ncut(S, 1, 11).k() == 1);
}

TEST_CASE("njw recovers two blocks") {
  SimilarityMatrix S{block_similarity({4, 4})};
  auto c = njw(S, 2, 13);
  CHECK(partitions_equal(c, partition_from_labels({0, 0, 0, 0, 1, 1, 1, 1})));
  CHECK(njw(S, 1, 13).k() == 1);
}

TEST_CASE("graph algorithms recover random block structure exactly") {
  auto eng = make_engine(31);
  std::uniform_int_distribution<int> nblocks(2, 6), bsize(2, 6);
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<int> sizes(nblocks(eng));
    int total = 0;
    for (int& s : sizes) {
      s = bsize(eng);
      total += s;
    }
    if (total > 30) continue;
    std::vector<int> want;
    for (std::size_t b = 0; b < sizes.size(); ++b)
      want.insert(want.end(), sizes[b], static_cast<int>(b));
    auto truth = partition_from_labels(want);
    SimilarityMatrix S{block_similarity(sizes)};
    const int k = static_cast<int>(sizes.size());
    CHECK(partitions_equal(pic(S, k, trial), truth));
    CHECK(partitions_equal(ncut(S, k, trial), truth));
    CHECK(partitions_equal(njw(S, k, trial), truth));
  }
}

TEST_CASE("graph algorithms reject zero-degree vertices") {
  // A zero row is rejected at construction already; build a similarity
  // matrix with a positive diagonal but an isolated vertex pattern via
  // the SimilarityMatrix then check degrees inside algorithms pass.
  Matrix S = block_similarity({2, 2});
  CHECK_NOTHROW(ncut(SimilarityMatrix{Matrix(S)}, 2, 0));
  // Zero diagonal entries (and hence candidate zero degrees) never reach
  // the algorithms; the type rejects them.
  Matrix bad = S;
  bad(0, 0) = 0.0;
  bad.row(0).setZero();
  bad.col(0).setZero();
  CHECK_THROWS(SimilarityMatrix{Matrix(bad)});
}

TEST_CASE("every algorithm returns exactly k non-empty clusters on random data") {
  auto eng = make_engine(37);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    Matrix X(14, 4);
    for (Index i = 0; i < X.rows(); ++i)
      for (Index j = 0; j < X.cols(); ++j) X(i, j) = gauss(eng) + 2.0;
    for (int k : {2, 3, 5}) {
      CHECK(spherical_kmeans(X, k, {5, 50}, trial).clustering.k() == k);
      CHECK(pddp(X, k).k() == k);
      CHECK(pddp_kmeans(X, k).clustering.k() == k);
    }
    Matrix S = cosine_similarity(X);
    SimilarityMatrix sim{std::move(S)};
    for (int k : {2, 3}) {
      CHECK(pic(sim, k, trial).k() == k);
      CHECK(ncut(sim, k, trial).k() == k);
      CHECK(njw(sim, k, trial).k() == k);
    }
  }
}

TEST_CASE("cosine_similarity basics") {
  Matrix X(3, 2);
  X << 1, 0, 0, 2, 3, 0;
  Matrix S = cosine_similarity(X);
  CHECK(S(0, 2) == doctest::Approx(1.0));
  CHECK(S(0, 1) == doctest::Approx(0.0));
  CHECK(S(1, 1) == doctest::Approx(1.0));
  Matrix Z = X;
  Z.row(1).setZero();
  CHECK_THROWS(cosine_similarity(Z));
}
