#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "icc/data_model.hpp"

using namespace icc;

namespace {

// Exhaustive accuracy oracle: best one-to-one assignment of predicted
// clusters to classes, by trying every permutation of the padded square.
double accuracy_brute_force(const Clustering& pred, const Clustering& truth) {
  const int s = std::max(pred.k(), truth.k());
  IntMatrix confusion = IntMatrix::Zero(s, s);
  for (Index i = 0; i < pred.size(); ++i)
    confusion(pred.labels()[i], truth.labels()[i]) += 1;
  std::vector<int> perm(s);
  std::iota(perm.begin(), perm.end(), 0);
  long long best = 0;
  do {
    long long total = 0;
    for (int i = 0; i < s; ++i) total += confusion(i, perm[i]);
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

std::vector<int> random_labels(std::mt19937_64& eng, int n, int kmax) {
  std::uniform_int_distribution<int> pick(0, kmax - 1);
  std::vector<int> raw(n);
  for (int& v : raw) v = pick(eng);
  return raw;
}

}  // namespace

TEST_CASE("DataMatrix validates shape and flags") {
  Matrix ok(2, 2);
  ok << 1, 2, 3, 4;
  DataMatrix d(ok);
  CHECK(d.nonneg());
  CHECK(d.rows() == 2);

  Matrix neg(2, 1);
  neg << 1, -1;
  CHECK_FALSE(DataMatrix(neg).nonneg());

  CHECK_THROWS(DataMatrix(Matrix::Zero(1, 3)));  // n < 2
  Matrix bad(2, 2);
  bad << 1, 2, 3, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(DataMatrix(bad));
}

TEST_CASE("DataMatrix fingerprint tracks content") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 1, 2, 3, 5;
  CHECK(DataMatrix(a).fingerprint() == DataMatrix(Matrix(a)).fingerprint());
  CHECK(DataMatrix(a).fingerprint() != DataMatrix(b).fingerprint());
}

TEST_CASE("partition_from_labels canonicalizes by first appearance") {
  auto c = partition_from_labels({5, 5, 9, 9});
  CHECK(c.labels() == std::vector<int>{0, 0, 1, 1});
  CHECK(c.k() == 2);

  auto id3 = partition_from_labels({0, 1, 2});
  CHECK(id3.labels() == std::vector<int>{0, 1, 2});
  CHECK(id3.k() == 3);

  auto mixed = partition_from_labels({2, 0, 2, 1});
  CHECK(mixed.labels() == std::vector<int>{0, 1, 0, 2});
  CHECK(mixed.k() == 3);

  CHECK_THROWS(partition_from_labels({}));
}

TEST_CASE("relabeling preserves the partition") {
  auto eng = make_engine(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto raw = random_labels(eng, 20, 5);
    auto base = partition_from_labels(raw);
    // Apply a random relabeling of the ids.
    std::vector<int> remap(10);
    std::iota(remap.begin(), remap.end(), 3);
    std::shuffle(remap.begin(), remap.end(), eng);
    std::vector<int> renamed(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) renamed[i] = remap[raw[i]];
    CHECK(partitions_equal(base, partition_from_labels(renamed)));
  }
}

TEST_CASE("partitions_equal examples") {
  CHECK(partitions_equal(partition_from_labels({0, 0, 1, 1}),
                         partition_from_labels({1, 1, 0, 0})));
  CHECK_FALSE(partitions_equal(partition_from_labels({0, 0, 1, 1}),
                               partition_from_labels({0, 1, 0, 1})));
  CHECK(partitions_equal(partition_from_labels({0, 0, 1, 2}),
                         partition_from_labels({2, 2, 0, 1})));
  CHECK_THROWS(partitions_equal(partition_from_labels({0, 1}),
                                partition_from_labels({0, 1, 2})));
}

TEST_CASE("partitions_equal is an equivalence relation") {
  auto eng = make_engine(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = partition_from_labels(random_labels(eng, 12, 4));
    auto b = partition_from_labels(random_labels(eng, 12, 4));
    auto c = partition_from_labels(random_labels(eng, 12, 4));
    CHECK(partitions_equal(a, a));
    CHECK(partitions_equal(a, b) == partitions_equal(b, a));
    if (partitions_equal(a, b) && partitions_equal(b, c))
      CHECK(partitions_equal(a, c));
  }
}

TEST_CASE("accuracy examples") {
  CHECK(accuracy(partition_from_labels({0, 0, 1, 1}),
                 partition_from_labels({1, 1, 0, 0})) == doctest::Approx(1.0));
  CHECK(accuracy(partition_from_labels({0, 1, 1, 1}),
                 partition_from_labels({0, 0, 1, 1})) == doctest::Approx(0.75));
  CHECK_THROWS(accuracy(partition_from_labels({0, 1}),
                        partition_from_labels({0, 1, 2})));
}

TEST_CASE("accuracy is 1 on itself and invariant under relabeling") {
  auto eng = make_engine(23);
  for (int trial = 0; trial < 40; ++trial) {
    auto p = partition_from_labels(random_labels(eng, 15, 5));
    auto t = partition_from_labels(random_labels(eng, 15, 5));
    CHECK(accuracy(p, p) == doctest::Approx(1.0));

    std::vector<int> remap(p.k());
    std::iota(remap.begin(), remap.end(), 0);
    std::shuffle(remap.begin(), remap.end(), eng);
    std::vector<int> renamed(p.labels().size());
    for (std::size_t i = 0; i < renamed.size(); ++i) renamed[i] = remap[p.labels()[i]];
    CHECK(accuracy(partition_from_labels(renamed), t) == doctest::Approx(accuracy(p, t)));
  }
}

TEST_CASE("accuracy matches exhaustive bijection search") {
  auto eng = make_engine(31);
  std::uniform_int_distribution<int> nsize(2, 12), kk(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = nsize(eng);
    auto p = partition_from_labels(random_labels(eng, n, kk(eng)));
    auto t = partition_from_labels(random_labels(eng, n, kk(eng)));
    CHECK(accuracy(p, t) == accuracy_brute_force(p, t));  // exact: same integer ratio
  }
}

TEST_CASE("accuracy with unequal cluster counts") {
  // Three predicted clusters against two classes: the worst cluster is
  // left unmatched and scores nothing.
  auto pred = partition_from_labels({0, 0, 1, 1, 2, 2});
  auto truth = partition_from_labels({0, 0, 0, 0, 1, 1});
  CHECK(accuracy(pred, truth) == doctest::Approx(accuracy_brute_force(pred, truth)));
}

TEST_CASE("Ensemble rejects mismatched sizes") {
  Ensemble e;
  e.add(partition_from_labels({0, 0, 1}), {"a", "x", 0, 2, 1});
  CHECK_THROWS(e.add(partition_from_labels({0, 1}), {"b", "x", 0, 2, 2}));
  CHECK(e.size() == 1);
  CHECK(e.n_objects() == 3);
}
