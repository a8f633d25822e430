#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "icc/consensus.hpp"
#include "icc/dimred.hpp"

namespace icc {

/// Random walk on the graph of a symmetric nonnegative matrix M:
/// P = D^{-1} M with D the diagonal of row sums.
struct TransitionView {
  Matrix P;        // row-stochastic
  Vector degrees;  // row sums of M

  /// Wraps an already row-stochastic matrix (degrees set to 1).
  static TransitionView from_stochastic(Matrix P);
};

TransitionView transition_matrix(const Matrix& sym_nonneg);
TransitionView transition_matrix(const ConsensusMatrix& cm);
TransitionView transition_matrix(const SimilarityMatrix& S);

struct SpectrumReport {
  Vector eigenvalues;   // descending, length min(m_max, n)
  int gap_index = 0;    // 1-based position of the largest consecutive gap
  double gap_size = 0.0;
  int k_estimate = 0;   // equals gap_index
};

/// Largest gap between consecutive entries of a descending eigenvalue
/// list; ties go to the lowest index. Returns (1-based index, gap).
std::pair<int, double> find_perron_gap(const Vector& descending);

struct SpectrumOptions {
  int m_max = 20;          // clamped to n; must be >= 2
  Index dense_cutoff = 2000;
  double tol = 1e-10;      // iterative-solver tolerance
};

/// Top eigenvalues of P = D^{-1} M, computed from the similar symmetric
/// matrix D^{-1/2} M D^{-1/2}, with the estimated cluster count at the
/// largest eigenvalue gap.
SpectrumReport spectrum(const Matrix& sym_nonneg, const SpectrumOptions& opts = {});
SpectrumReport spectrum(const ConsensusMatrix& cm, int m_max = 20);
SpectrumReport spectrum(const SimilarityMatrix& S, int m_max = 20);

/// Assignment of each state to a block 0..k-1; every block non-empty.
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<int> assignment);
  static BlockPartition from_sizes(const std::vector<int>& sizes);

  const std::vector<int>& assignment() const { return assignment_; }
  int block_count() const { return k_; }

 private:
  std::vector<int> assignment_;
  int k_ = 0;
};

/// Twice the largest infinity-norm of a block row of off-diagonal coupling
/// blocks of P; zero iff every off-diagonal block is exactly zero.
double deviation_from_reducibility(const TransitionView& tv, const BlockPartition& bp);

struct Part1Config {
  std::vector<std::pair<Reduction, int>> reductions;  // (method, rank)
  bool include_raw = false;
  std::vector<Algorithm> algorithms;
  std::vector<int> ktilde;
  double tau = 0.0;
  int m_max = 20;
  int max_refinements = 3;
  // Refinement rounds re-apply the reductions to the consensus matrix,
  // keeping the ensemble as diverse as the initial round; switch off to
  // cluster the consensus matrix directly.
  bool reduce_consensus = true;
  RunOptions run;
  NmfOptions nmf;
};

struct Part1Result {
  int k_estimate = 0;
  std::vector<SpectrumReport> reports;  // one per round
  ConsensusMatrix final_cm;
  Ensemble initial_ensemble;  // round-0 votes, for diagnostics
  std::vector<std::string> warnings;
};

/// Cluster-count estimation: builds the ensemble over reductions x
/// algorithms x ktilde values, thresholds the consensus matrix, reads the
/// eigenvalue gap, then repeats with the consensus matrix as the data
/// input until the estimate is stable or max_refinements is reached.
Part1Result icc_part1(const DataMatrix& X, const Part1Config& config,
                      std::uint64_t seed);

/// The reduction inputs icc_part1 derives from X; exposed so pipelines can
/// reuse them when k is already known.
std::vector<EnsembleInput> build_reduction_inputs(const DataMatrix& X,
                                                  const Part1Config& config,
                                                  std::uint64_t seed,
                                                  std::vector<std::string>* warnings);

/// Suggested ktilde sweep for n objects: 4 .. min(20, floor(sqrt(n))),
/// widened when that window collapses.
std::vector<int> default_ktilde(Index n);

}  // namespace icc
