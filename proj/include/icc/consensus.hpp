#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icc/cluster.hpp"
#include "icc/data_model.hpp"

namespace icc {

/// Symmetric vote-count matrix: M(i,j) counts how many ensemble members
/// placed objects i and j in the same cluster. M(i,i) == T always, and the
/// diagonal is exempt from thresholding.
class ConsensusMatrix {
 public:
  ConsensusMatrix(IntMatrix counts, int total, double tau_applied = 0.0);

  const IntMatrix& counts() const { return counts_; }
  int total() const { return total_; }
  double tau_applied() const { return tau_applied_; }
  Index size() const { return counts_.rows(); }

  Matrix as_double() const { return counts_.cast<double>(); }

 private:
  IntMatrix counts_;
  int total_ = 0;
  double tau_applied_ = 0.0;
};

/// Co-membership indicator of one clustering: A(i,j) = 1 iff i and j share
/// a cluster (so A(i,i) = 1).
IntMatrix adjacency(const Clustering& c);

/// Sum of the adjacency matrices of every clustering in the ensemble.
ConsensusMatrix build_consensus(const Ensemble& e);

/// Zeroes off-diagonal entries with fewer than tau * total votes (strict
/// inequality). Idempotent at fixed tau; entries only decrease in tau.
ConsensusMatrix apply_intolerance(const ConsensusMatrix& cm, double tau);

enum class Algorithm {
  SphericalKmeans,
  Pddp,
  PddpKmeans,
  NmfCluster,
  Pic,
  Ncut,
  Njw,
};

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);
bool algorithm_needs_similarity(Algorithm a);

/// One clustering input for ensemble runs: a feature matrix (objects as
/// rows) and, when the input doubles as a similarity matrix, the matrix
/// the graph algorithms should consume.
struct EnsembleInput {
  std::string id;
  Matrix features;
  bool nonneg = false;
  std::optional<Matrix> similarity;
  int rank = 0;  // provenance only; 0 when not applicable
  // Routed to graph algorithms only; data algorithms skip it silently.
  bool graph_only = false;
};

EnsembleInput consensus_input(const ConsensusMatrix& cm);

struct RunOptions {
  int threads = 1;
  KmeansOptions kmeans;
};

struct EnsembleRun {
  Ensemble ensemble;
  std::vector<std::string> warnings;  // skipped triples, in grid order
};

/// One clustering per (input, algorithm, ktilde) triple. Per-run seeds are
/// derived from (seed, input id, algorithm, ktilde), so results do not
/// depend on the thread count. Triples whose preconditions fail are
/// skipped and recorded as warnings; throws only if nothing ran.
EnsembleRun run_ensemble(const std::vector<EnsembleInput>& inputs,
                         const std::vector<Algorithm>& algos,
                         const std::vector<int>& ks, std::uint64_t seed,
                         const RunOptions& opts = {});

struct MajoritySolution {
  Clustering clustering;
  int agreement_count = 0;
};

/// The partition shared by a strict majority (> T/2) of the ensemble, if
/// one exists. Partitions equal up to relabeling count as the same vote.
std::optional<MajoritySolution> majority_solution(const Ensemble& e);

struct VoteRound {
  int round_index = 0;
  Ensemble clusterings;
  std::optional<Clustering> agreed;
  int agreement_count = 0;
};

struct Part2Result {
  Clustering final;
  std::vector<VoteRound> rounds;
  bool consensus_reached = false;
  std::vector<std::string> warnings;
};

/// Iterated voting: every algorithm partitions the current matrix into k
/// clusters; if a strict majority return the same partition it is adopted
/// verbatim, otherwise the votes form a new thresholded consensus matrix
/// and the next round begins. After max_rounds the plurality partition is
/// returned with consensus_reached = false.
Part2Result icc_part2(const ConsensusMatrix& start, int k,
                      const std::vector<Algorithm>& algos, double tau,
                      int max_rounds, std::uint64_t seed,
                      const RunOptions& opts = {});

/// Same loop, but the first round votes on the given data inputs (for the
/// case where k is known and no consensus matrix exists yet).
Part2Result icc_part2(const std::vector<EnsembleInput>& start_inputs, int k,
                      const std::vector<Algorithm>& algos, double tau,
                      int max_rounds, std::uint64_t seed,
                      const RunOptions& opts = {});

}  // namespace icc
