// Acceptance suite: one criterion per check, one PASS/FAIL line each.
// Exits nonzero if any gating criterion fails.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "icc/pipeline.hpp"
#include "icc/synth.hpp"

using namespace icc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

int g_failures = 0;

void report(int index, const char* name, const Outcome& outcome, double seconds) {
  const char* tag = outcome.skipped ? "SKIP" : outcome.pass ? "PASS" : "FAIL";
  std::printf("[%2d] %s %-28s (%.2fs)%s%s\n", index, tag, name, seconds,
              outcome.detail.empty() ? "" : " ", outcome.detail.c_str());
  std::fflush(stdout);
  if (!outcome.pass && !outcome.skipped) ++g_failures;
}

template <class F>
void criterion(int index, const char* name, F&& f, double time_budget = 0.0) {
  const auto t0 = Clock::now();
  Outcome outcome;
  try {
    outcome = f();
  } catch (const std::exception& ex) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + ex.what();
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (outcome.pass && time_budget > 0.0 && seconds >= time_budget) {
    outcome.pass = false;
    outcome.detail += " [over time budget]";
  }
  report(index, name, outcome, seconds);
}

std::vector<int> random_labels(std::mt19937_64& eng, int n, int kmax) {
  std::uniform_int_distribution<int> pick(0, kmax - 1);
  std::vector<int> raw(n);
  for (int& v : raw) v = pick(eng);
  return raw;
}

Ensemble random_ensemble(std::mt19937_64& eng, int n, int T) {
  Ensemble e;
  std::uniform_int_distribution<int> kk(1, std::max(1, n / 2));
  for (int t = 0; t < T; ++t)
    e.add(partition_from_labels(random_labels(eng, n, kk(eng))),
          {"rand", "x", 0, 0, 0});
  return e;
}

// ---- 1. consensus identity -------------------------------------------------

Outcome consensus_identity() {
  auto eng = make_engine(0xC0);
  std::uniform_int_distribution<int> nn(2, 30), tt(1, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nn(eng), T = tt(eng);
    Ensemble e = random_ensemble(eng, n, T);
    IntMatrix brute = IntMatrix::Zero(n, n);
    for (int t = 0; t < T; ++t) {
      const auto& labels = e.clustering(t).labels();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (labels[i] == labels[j]) brute(i, j) += 1;
    }
    auto cm = build_consensus(e);
    if (cm.counts() != brute) return {false, false, "adjacency sum mismatch"};
    if (cm.counts() != cm.counts().transpose().eval())
      return {false, false, "not symmetric"};
    for (int i = 0; i < n; ++i)
      if (cm.counts()(i, i) != T) return {false, false, "diagonal != T"};
  }
  return {true, false, "200 ensembles exact"};
}

// ---- 2. spectral oracle ----------------------------------------------------

Outcome spectral_oracle() {
  auto eng = make_engine(0xB1);
  std::uniform_int_distribution<int> bsize(2, 6);
  for (int k = 2; k <= 6; ++k) {
    for (int rep = 0; rep < 6; ++rep) {
      std::vector<int> sizes(k);
      int n = 0;
      for (int& s : sizes) {
        s = bsize(eng);
        n += s;
      }
      Matrix S = Matrix::Zero(n, n);
      int at = 0;
      for (int s : sizes) {
        S.block(at, at, s, s).setOnes();
        at += s;
      }
      auto repSpec = spectrum(S, SpectrumOptions{});
      int ones = 0;
      for (int i = 0; i < repSpec.eigenvalues.size(); ++i)
        if (std::abs(repSpec.eigenvalues(i) - 1.0) <= 1e-8) ++ones;
      if (ones != k)
        return {false, false, "expected " + std::to_string(k) + " unit eigenvalues, got " +
                                  std::to_string(ones)};
      if (repSpec.k_estimate != k)
        return {false, false, "k_estimate " + std::to_string(repSpec.k_estimate) +
                                  " != " + std::to_string(k)};
    }
  }
  return {true, false, "k in 2..6, random block sizes"};
}

// ---- 3. uncoupling monotonicity --------------------------------------------

Outcome uncoupling_monotonicity() {
  double prev_gap = -1.0;
  std::ostringstream gaps;
  const std::vector<double> epsilons{0.3, 0.1, 0.03, 0.01};
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    auto S = noisy_block_matrix({5, 5, 5}, epsilons[i], 0xE9);
    auto rep = spectrum(S.values(), SpectrumOptions{});
    const double gap3 = rep.eigenvalues(2) - rep.eigenvalues(3);
    gaps << (i ? " " : "") << gap3;
    if (gap3 <= prev_gap)
      return {false, false, "gap not increasing: " + gaps.str()};
    prev_gap = gap3;
    if (i >= 2 && rep.k_estimate != 3)
      return {false, false, "k_estimate != 3 at eps=" + std::to_string(epsilons[i])};
  }
  return {true, false, "gaps " + gaps.str()};
}

// ---- 4. similarity check ---------------------------------------------------

Outcome similarity_check() {
  auto eng = make_engine(0xD4);
  std::uniform_int_distribution<int> nn(3, 50), tt(2, 9);
  for (int trial = 0; trial < 50; ++trial) {
    auto cm = build_consensus(random_ensemble(eng, nn(eng), tt(eng)));
    Matrix M = cm.as_double();
    SpectrumOptions opts;
    opts.m_max = static_cast<int>(M.rows());
    auto rep = spectrum(M, opts);

    Vector d = M.rowwise().sum();
    Matrix P = d.cwiseInverse().asDiagonal() * M;
    Eigen::EigenSolver<Matrix> es(P);
    Vector re = es.eigenvalues().real();
    std::sort(re.data(), re.data() + re.size(), std::greater<double>());
    for (int i = 0; i < rep.eigenvalues.size(); ++i)
      if (std::abs(rep.eigenvalues(i) - re(i)) > 1e-8)
        return {false, false, "eigenvalue mismatch at trial " + std::to_string(trial)};
  }
  return {true, false, "50 matrices within 1e-8"};
}

// ---- 5/6. end-to-end k recovery and consensus accuracy ----------------------

struct EndToEnd {
  int k_hits = 0;
  int acc_hits = 0;
  double elapsed = 0.0;
  std::string ks, accs;
};

EndToEnd run_end_to_end() {
  EndToEnd r;
  const auto t0 = Clock::now();
  std::ostringstream kss, accss;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BlobSpec spec;
    spec.k = 3;
    spec.per_cluster = {100, 100, 100};
    spec.dim = 10;
    spec.separation = 12.0;
    spec.seed = mix_seed(seed, "blobs");
    auto blobs = gaussian_blobs(spec);

    Part1Config pc;
    pc.reductions = {{Reduction::Svd, 3}, {Reduction::Pca, 3}};
    pc.algorithms = {Algorithm::SphericalKmeans, Algorithm::Pddp,
                     Algorithm::PddpKmeans};
    for (int k = 4; k <= 10; ++k) pc.ktilde.push_back(k);
    pc.run.threads = 4;

    auto part1 = icc_part1(blobs.X, pc, seed);
    kss << (seed > 1 ? "," : "") << part1.k_estimate;
    if (part1.k_estimate == 3) ++r.k_hits;

    auto part2 = icc_part2(part1.final_cm, 3, pc.algorithms, 0.0, 10,
                           mix_seed(seed, "part2"), pc.run);
    const double acc = accuracy(part2.final, blobs.truth);
    double mean_acc = 0.0;
    for (int t = 0; t < part1.initial_ensemble.size(); ++t)
      mean_acc += accuracy(part1.initial_ensemble.clustering(t), blobs.truth);
    mean_acc /= part1.initial_ensemble.size();
    accss << (seed > 1 ? "," : "") << acc;
    if (acc >= std::max(0.95, mean_acc)) ++r.acc_hits;
  }
  r.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  r.ks = kss.str();
  r.accs = accss.str();
  return r;
}

// ---- 7. intolerance monotonicity -------------------------------------------

Outcome intolerance_monotonicity() {
  auto eng = make_engine(0x7A);
  std::uniform_int_distribution<int> nn(2, 25), tt(1, 9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto cm = build_consensus(random_ensemble(eng, nn(eng), tt(eng)));
    const double t1 = unif(eng), t2 = unif(eng);
    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
    auto a = apply_intolerance(cm, lo);
    auto b = apply_intolerance(cm, hi);
    if (!(b.counts().array() <= a.counts().array()).all())
      return {false, false, "entries increased with tau"};
    if (apply_intolerance(a, lo).counts() != a.counts())
      return {false, false, "not idempotent"};
    if (a.counts().diagonal() != cm.counts().diagonal() ||
        b.counts().diagonal() != cm.counts().diagonal())
      return {false, false, "diagonal changed"};
  }
  return {true, false, "100 matrices"};
}

// ---- 8. accuracy oracle ----------------------------------------------------

Outcome accuracy_oracle() {
  auto eng = make_engine(0xAC);
  std::uniform_int_distribution<int> nsize(2, 12), kk(1, 6);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = nsize(eng);
    auto p = partition_from_labels(random_labels(eng, n, kk(eng)));
    auto t = partition_from_labels(random_labels(eng, n, kk(eng)));

    const int s = std::max(p.k(), t.k());
    IntMatrix confusion = IntMatrix::Zero(s, s);
    for (Index i = 0; i < p.size(); ++i)
      confusion(p.labels()[i], t.labels()[i]) += 1;
    std::vector<int> perm(s);
    std::iota(perm.begin(), perm.end(), 0);
    long long best = 0;
    do {
      long long total = 0;
      for (int i = 0; i < s; ++i) total += confusion(i, perm[i]);
      best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));

    if (accuracy(p, t) != static_cast<double>(best) / n)
      return {false, false, "mismatch at trial " + std::to_string(trial)};
  }
  return {true, false, "500 label pairs exact"};
}

// ---- 9. deviation measure --------------------------------------------------

Outcome deviation_measure() {
  Matrix S = Matrix::Zero(7, 7);
  S.block(0, 0, 3, 3).setOnes();
  S.block(3, 3, 4, 4).setOnes();
  const double zero = deviation_from_reducibility(transition_matrix(S),
                                                  BlockPartition::from_sizes({3, 4}));
  if (zero != 0.0) return {false, false, "block-diagonal deviation != 0"};

  Matrix P(2, 2);
  P << 0.9, 0.1, 0.1, 0.9;
  const double dev =
      deviation_from_reducibility(TransitionView::from_stochastic(P), BlockPartition({0, 1}));
  if (dev != 0.2) return {false, false, "2x2 deviation != 0.2 exactly"};
  return {true, false, "exact on both fixtures"};
}

// ---- 10. determinism --------------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  fs::path root = fs::temp_directory_path() /
                  ("icc_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(root);
  struct Cleanup {
    fs::path p;
    ~Cleanup() { fs::remove_all(p); }
  } cleanup{root};

  BlobSpec spec;
  spec.k = 3;
  spec.per_cluster = {25, 25, 25};
  spec.dim = 6;
  spec.separation = 12.0;
  spec.seed = 21;
  auto blobs = gaussian_blobs(spec);
  save_labeled_csv((root / "blobs.csv").string(), blobs.X.dense(), blobs.truth);

  RunConfig cfg;
  cfg.input_path = (root / "blobs.csv").string();
  cfg.format = MatrixFormat::LabeledCsv;
  cfg.ranks = {3};
  cfg.ktilde = {4, 5, 6, 7};
  cfg.seed = 2024;
  cfg.threads = 3;

  cfg.out_dir = (root / "a").string();
  run_full(cfg);
  cfg.out_dir = (root / "b").string();
  run_full(cfg);

  if (slurp(root / "a/results.json") != slurp(root / "b/results.json"))
    return {false, false, "results.json differs"};
  if (slurp(root / "a/eigenvalues.csv") != slurp(root / "b/eigenvalues.csv"))
    return {false, false, "eigenvalues.csv differs"};
  return {true, false, "byte-identical artifacts"};
}

// ---- 11. optional corpus reproduction ---------------------------------------

Outcome corpus_optional() {
  const char* mcc = std::getenv("ICC_MCC_MTX");
  const char* ng6 = std::getenv("ICC_NG6_MTX");
  if (!mcc && !ng6)
    return {true, true, "set ICC_MCC_MTX / ICC_NG6_MTX to run (not gating)"};

  std::ostringstream detail;
  bool ok = true;
  auto run_corpus = [&](const char* path, int expected_k, const Part1Config& pc) {
    auto loaded = load_matrix(path, MatrixFormat::MatrixMarket, true);
    auto res = icc_part1(loaded.X, pc, 1);
    detail << " k=" << res.k_estimate << " (want " << expected_k << ")";
    ok = ok && res.k_estimate == expected_k;
  };
  if (mcc) {
    Part1Config pc;
    for (auto m : {Reduction::Nmf, Reduction::Svd, Reduction::Pca})
      for (int r : {5, 10, 20}) pc.reductions.emplace_back(m, r);
    pc.include_raw = true;
    pc.algorithms = {Algorithm::SphericalKmeans, Algorithm::Pddp,
                     Algorithm::PddpKmeans};
    for (int k = 2; k <= 10; ++k) pc.ktilde.push_back(k);
    pc.tau = 0.1;
    pc.run.threads = 4;
    pc.run.kmeans.restarts = 1;
    run_corpus(mcc, 3, pc);
  }
  if (ng6) {
    Part1Config pc;
    pc.reductions = {{Reduction::Pca, 10}, {Reduction::Svd, 10}, {Reduction::Nmf, 10}};
    pc.include_raw = true;
    pc.algorithms = {Algorithm::SphericalKmeans};
    for (int k = 10; k <= 20; ++k) pc.ktilde.push_back(k);
    pc.tau = 0.3;
    pc.run.threads = 4;
    pc.run.kmeans.restarts = 1;
    run_corpus(ng6, 6, pc);
  }
  return {ok, false, detail.str()};
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  criterion(1, "consensus identity", consensus_identity, 5.0);
  criterion(2, "spectral oracle", spectral_oracle, 5.0);
  criterion(3, "uncoupling monotonicity", uncoupling_monotonicity);
  criterion(4, "similarity check", similarity_check);

  {
    const auto t0 = Clock::now();
    EndToEnd e2e;
    Outcome five, six;
    try {
      e2e = run_end_to_end();
      five.pass = e2e.k_hits >= 9 && e2e.elapsed < 60.0;
      five.detail = "k=3 on " + std::to_string(e2e.k_hits) + "/10 seeds [" + e2e.ks + "]";
      six.pass = e2e.acc_hits >= 9;
      six.detail = "accuracy ok on " + std::to_string(e2e.acc_hits) + "/10 seeds";
    } catch (const std::exception& ex) {
      five.pass = six.pass = false;
      five.detail = six.detail = std::string("exception: ") + ex.what();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    report(5, "end-to-end k recovery", five, seconds);
    report(6, "consensus beats average", six, 0.0);
  }

  criterion(7, "intolerance monotonicity", intolerance_monotonicity);
  criterion(8, "accuracy oracle", accuracy_oracle);
  criterion(9, "deviation measure", deviation_measure);
  criterion(10, "determinism", determinism);
  criterion(11, "corpus reproduction", corpus_optional);

  if (g_failures == 0) {
    std::printf("all gating criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
