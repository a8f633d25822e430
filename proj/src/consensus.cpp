#include "icc/consensus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace icc {

ConsensusMatrix::ConsensusMatrix(IntMatrix counts, int total, double tau_applied)
    : counts_(std::move(counts)), total_(total), tau_applied_(tau_applied) {
  const Index n = counts_.rows();
  if (n < 1 || counts_.cols() != n)
    throw std::invalid_argument("ConsensusMatrix: need a square matrix");
  if (total_ < 1) throw std::invalid_argument("ConsensusMatrix: total < 1");
  if (counts_ != counts_.transpose().eval())
    throw std::invalid_argument("ConsensusMatrix: not symmetric");
  for (Index i = 0; i < n; ++i) {
    if (counts_(i, i) != total_)
      throw std::invalid_argument("ConsensusMatrix: diagonal must equal total");
    for (Index j = 0; j < n; ++j)
      if (counts_(i, j) < 0 || counts_(i, j) > total_)
        throw std::invalid_argument("ConsensusMatrix: entry outside [0, total]");
  }
}

IntMatrix adjacency(const Clustering& c) {
  const Index n = c.size();
  IntMatrix A = IntMatrix::Zero(n, n);
  const auto& labels = c.labels();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (labels[i] == labels[j]) A(i, j) = 1;
  return A;
}

ConsensusMatrix build_consensus(const Ensemble& e) {
  if (e.empty()) throw std::invalid_argument("build_consensus: empty ensemble");
  const Index n = e.n_objects();
  IntMatrix M = IntMatrix::Zero(n, n);
  for (int t = 0; t < e.size(); ++t) {
    // Accumulate the adjacency matrix of this clustering block by block.
    for (const auto& block : e.clustering(t).blocks())
      for (int i : block)
        for (int j : block) M(i, j) += 1;
  }
  return ConsensusMatrix(std::move(M), e.size(), 0.0);
}

ConsensusMatrix apply_intolerance(const ConsensusMatrix& cm, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("apply_intolerance: tau outside [0, 1]");
  IntMatrix M = cm.counts();
  const double cutoff = tau * cm.total();
  const Index n = M.rows();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && static_cast<double>(M(i, j)) < cutoff) M(i, j) = 0;
  return ConsensusMatrix(std::move(M), cm.total(), tau);
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::SphericalKmeans: return "kmeans";
    case Algorithm::Pddp: return "pddp";
    case Algorithm::PddpKmeans: return "pddp-kmeans";
    case Algorithm::NmfCluster: return "nmf";
    case Algorithm::Pic: return "pic";
    case Algorithm::Ncut: return "ncut";
    case Algorithm::Njw: return "njw";
  }
  throw std::logic_error("algorithm_name: bad enum");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "kmeans") return Algorithm::SphericalKmeans;
  if (name == "pddp") return Algorithm::Pddp;
  if (name == "pddp-kmeans") return Algorithm::PddpKmeans;
  if (name == "nmf") return Algorithm::NmfCluster;
  if (name == "pic") return Algorithm::Pic;
  if (name == "ncut") return Algorithm::Ncut;
  if (name == "njw") return Algorithm::Njw;
  throw std::invalid_argument("unknown algorithm: " + name);
}

bool algorithm_needs_similarity(Algorithm a) {
  return a == Algorithm::Pic || a == Algorithm::Ncut || a == Algorithm::Njw;
}

EnsembleInput consensus_input(const ConsensusMatrix& cm) {
  EnsembleInput in;
  in.id = "consensus";
  in.features = cm.as_double();
  in.nonneg = true;
  in.similarity = in.features;
  return in;
}

namespace {

Clustering run_one(const EnsembleInput& in, Algorithm algo, int k,
                   std::uint64_t seed, const RunOptions& opts) {
  switch (algo) {
    case Algorithm::SphericalKmeans:
      return spherical_kmeans(in.features, k, opts.kmeans, seed).clustering;
    case Algorithm::Pddp:
      return pddp(in.features, k);
    case Algorithm::PddpKmeans:
      return pddp_kmeans(in.features, k, opts.kmeans.max_iters).clustering;
    case Algorithm::NmfCluster:
      return nmf_cluster(in.features, k, seed);
    case Algorithm::Pic:
      return pic(SimilarityMatrix(*in.similarity), k, seed);
    case Algorithm::Ncut:
      return ncut(SimilarityMatrix(*in.similarity), k, seed);
    case Algorithm::Njw:
      return njw(SimilarityMatrix(*in.similarity), k, seed);
  }
  throw std::logic_error("run_one: bad enum");
}

// A precondition that can be rejected without running the algorithm.
std::optional<std::string> triple_rejection(const EnsembleInput& in, Algorithm algo,
                                            int k) {
  if (k < 1) return "ktilde < 1";
  if (k > in.features.rows()) return "ktilde exceeds object count";
  if (algorithm_needs_similarity(algo) && !in.similarity.has_value())
    return "no similarity matrix for graph algorithm";
  if (algo == Algorithm::NmfCluster && !in.nonneg)
    return "negative entries, nmf skipped";
  if ((algo == Algorithm::SphericalKmeans || algo == Algorithm::PddpKmeans) &&
      (in.features.rowwise().norm().array() <= 0.0).any())
    return "zero row, spherical normalization undefined";
  return std::nullopt;
}

}  // namespace

EnsembleRun run_ensemble(const std::vector<EnsembleInput>& inputs,
                         const std::vector<Algorithm>& algos,
                         const std::vector<int>& ks, std::uint64_t seed,
                         const RunOptions& opts) {
  if (inputs.empty() || algos.empty() || ks.empty())
    throw std::invalid_argument("run_ensemble: empty grid");

  struct Task {
    int input;
    Algorithm algo;
    int k;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (Algorithm a : algos) {
      if (inputs[i].graph_only && !algorithm_needs_similarity(a)) continue;
      for (int k : ks) {
        std::uint64_t s = mix_seed(seed, inputs[i].id);
        s = mix_seed(s, algorithm_name(a));
        s = mix_seed(s, static_cast<std::uint64_t>(k));
        tasks.push_back({static_cast<int>(i), a, k, s});
      }
    }
  if (tasks.empty()) throw std::invalid_argument("run_ensemble: empty grid");

  std::vector<std::optional<Clustering>> results(tasks.size());
  std::vector<std::string> notes(tasks.size());

  auto work = [&](std::size_t t) {
    const Task& task = tasks[t];
    const EnsembleInput& in = inputs[task.input];
    auto why = triple_rejection(in, task.algo, task.k);
    if (!why) {
      try {
        results[t] = run_one(in, task.algo, task.k, task.seed, opts);
        return;
      } catch (const std::exception& ex) {
        why = ex.what();
      }
    }
    notes[t] = "skipped input=" + in.id + " algo=" + algorithm_name(task.algo) +
               " ktilde=" + std::to_string(task.k) + ": " + *why;
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1 || tasks.size() < 2) {
    for (std::size_t t = 0; t < tasks.size(); ++t) work(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < tasks.size();
             t = next.fetch_add(1))
          work(t);
      });
    for (auto& th : pool) th.join();
  }

  EnsembleRun out;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (results[t]) {
      const Task& task = tasks[t];
      const EnsembleInput& in = inputs[task.input];
      out.ensemble.add(std::move(*results[t]),
                       Provenance{algorithm_name(task.algo), in.id, in.rank,
                                  task.k, task.seed});
    } else {
      out.warnings.push_back(notes[t]);
    }
  }
  if (out.ensemble.empty())
    throw std::runtime_error("run_ensemble: every triple was skipped");
  return out;
}

std::optional<MajoritySolution> majority_solution(const Ensemble& e) {
  if (e.empty()) throw std::invalid_argument("majority_solution: empty ensemble");
  std::map<std::vector<int>, int> groups;  // canonical labels -> count
  for (int t = 0; t < e.size(); ++t) groups[e.clustering(t).labels()] += 1;
  const auto best = std::max_element(
      groups.begin(), groups.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  if (2 * best->second <= e.size()) return std::nullopt;
  return MajoritySolution{partition_from_labels(best->first), best->second};
}

namespace {

// Plurality partition: largest vote group; ties go to the group whose
// first vote appears earliest in the ensemble.
MajoritySolution plurality_solution(const Ensemble& e) {
  std::map<std::vector<int>, std::pair<int, int>> groups;  // labels -> (count, first)
  for (int t = 0; t < e.size(); ++t) {
    auto [it, inserted] = groups.try_emplace(e.clustering(t).labels(), 0, t);
    it->second.first += 1;
  }
  const std::vector<int>* best = nullptr;
  int best_count = -1, best_first = 0;
  for (const auto& [labels, info] : groups) {
    if (info.first > best_count ||
        (info.first == best_count && info.second < best_first)) {
      best = &labels;
      best_count = info.first;
      best_first = info.second;
    }
  }
  return MajoritySolution{partition_from_labels(*best), best_count};
}

Part2Result part2_loop(std::vector<EnsembleInput> inputs, int k,
                       const std::vector<Algorithm>& algos, double tau,
                       int max_rounds, std::uint64_t seed, const RunOptions& opts) {
  if (k < 2) throw std::invalid_argument("icc_part2: k must be at least 2");
  if (max_rounds < 1) throw std::invalid_argument("icc_part2: max_rounds < 1");
  if (algos.empty()) throw std::invalid_argument("icc_part2: no algorithms");

  Part2Result out;
  for (int round = 1; round <= max_rounds; ++round) {
    auto er = run_ensemble(inputs, algos, {k}, mix_seed(seed, round), opts);
    for (auto& w : er.warnings) out.warnings.push_back("round " + std::to_string(round) + ": " + w);

    VoteRound vr;
    vr.round_index = round;
    auto maj = majority_solution(er.ensemble);
    if (maj) {
      vr.agreed = maj->clustering;
      vr.agreement_count = maj->agreement_count;
      vr.clusterings = er.ensemble;
      out.rounds.push_back(std::move(vr));
      out.final = maj->clustering;  // adopted verbatim
      out.consensus_reached = true;
      return out;
    }
    auto plu = plurality_solution(er.ensemble);
    vr.agreement_count = plu.agreement_count;
    vr.clusterings = er.ensemble;
    out.rounds.push_back(std::move(vr));

    if (round == max_rounds) {
      out.final = plu.clustering;
      out.consensus_reached = false;
      return out;
    }
    ConsensusMatrix cm = apply_intolerance(build_consensus(er.ensemble), tau);
    inputs = {consensus_input(cm)};
  }
  throw std::logic_error("icc_part2: unreachable");
}

}  // namespace

Part2Result icc_part2(const ConsensusMatrix& start, int k,
                      const std::vector<Algorithm>& algos, double tau,
                      int max_rounds, std::uint64_t seed, const RunOptions& opts) {
  return part2_loop({consensus_input(start)}, k, algos, tau, max_rounds, seed, opts);
}

Part2Result icc_part2(const std::vector<EnsembleInput>& start_inputs, int k,
                      const std::vector<Algorithm>& algos, double tau,
                      int max_rounds, std::uint64_t seed, const RunOptions& opts) {
  return part2_loop(start_inputs, k, algos, tau, max_rounds, seed, opts);
}

}  // namespace icc
