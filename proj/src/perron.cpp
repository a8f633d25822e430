#include "icc/perron.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "icc/eigs.hpp"

namespace icc {

namespace {

void check_square_sym_nonneg(const Matrix& M, const char* who) {
  const Index n = M.rows();
  if (n < 2 || M.cols() != n)
    throw std::invalid_argument(std::string(who) + ": need a square matrix, n >= 2");
  if (!all_finite(M)) throw std::invalid_argument(std::string(who) + ": non-finite entry");
  if ((M.array() < 0.0).any())
    throw std::invalid_argument(std::string(who) + ": negative entry");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(who) + ": not symmetric");
}

}  // namespace

TransitionView TransitionView::from_stochastic(Matrix P) {
  const Index n = P.rows();
  if (n < 1 || P.cols() != n)
    throw std::invalid_argument("TransitionView: need a square matrix");
  if ((P.array() < 0.0).any())
    throw std::invalid_argument("TransitionView: negative entry");
  for (Index i = 0; i < n; ++i)
    if (std::abs(P.row(i).sum() - 1.0) > 1e-10)
      throw std::invalid_argument("TransitionView: row sums must be 1");
  TransitionView tv;
  tv.P = std::move(P);
  tv.degrees = Vector::Ones(n);
  return tv;
}

TransitionView transition_matrix(const Matrix& sym_nonneg) {
  check_square_sym_nonneg(sym_nonneg, "transition_matrix");
  Vector d = sym_nonneg.rowwise().sum();
  if ((d.array() <= 0.0).any())
    throw std::invalid_argument("transition_matrix: zero row sum");
  TransitionView tv;
  tv.P = d.cwiseInverse().asDiagonal() * sym_nonneg;
  tv.degrees = std::move(d);
  return tv;
}

TransitionView transition_matrix(const ConsensusMatrix& cm) {
  return transition_matrix(cm.as_double());
}

TransitionView transition_matrix(const SimilarityMatrix& S) {
  return transition_matrix(S.values());
}

std::pair<int, double> find_perron_gap(const Vector& descending) {
  if (descending.size() < 2)
    throw std::invalid_argument("find_perron_gap: need at least 2 eigenvalues");
  int idx = 1;
  double gap = descending(0) - descending(1);
  for (int i = 2; i < descending.size(); ++i) {
    const double g = descending(i - 1) - descending(i);
    if (g > gap) {
      gap = g;
      idx = i;
    }
  }
  return {idx, gap};
}

SpectrumReport spectrum(const Matrix& sym_nonneg, const SpectrumOptions& opts) {
  check_square_sym_nonneg(sym_nonneg, "spectrum");
  const Index n = sym_nonneg.rows();
  if (opts.m_max < 2) throw std::invalid_argument("spectrum: m_max out of range");
  const int m = static_cast<int>(std::min<Index>(opts.m_max, n));

  Vector d = sym_nonneg.rowwise().sum();
  if ((d.array() <= 0.0).any())
    throw std::invalid_argument("spectrum: zero row sum");
  Vector dmh = d.cwiseSqrt().cwiseInverse();
  Matrix N = dmh.asDiagonal() * sym_nonneg * dmh.asDiagonal();

  Vector lambda(m);
  if (n <= opts.dense_cutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(N);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("spectrum: eigensolver failed");
    for (int i = 0; i < m; ++i) lambda(i) = es.eigenvalues()(n - 1 - i);
  } else {
    LinOp op = [&N](const Vector& v) -> Vector { return N * v; };
    lambda = lanczos_largest(op, n, m, opts.tol).values;
  }

  SpectrumReport rep;
  rep.eigenvalues = std::move(lambda);
  auto [idx, gap] = find_perron_gap(rep.eigenvalues);
  rep.gap_index = idx;
  rep.gap_size = gap;
  rep.k_estimate = idx;
  return rep;
}

SpectrumReport spectrum(const ConsensusMatrix& cm, int m_max) {
  SpectrumOptions opts;
  opts.m_max = m_max;
  return spectrum(cm.as_double(), opts);
}

SpectrumReport spectrum(const SimilarityMatrix& S, int m_max) {
  SpectrumOptions opts;
  opts.m_max = m_max;
  return spectrum(S.values(), opts);
}

BlockPartition::BlockPartition(std::vector<int> assignment)
    : assignment_(std::move(assignment)) {
  if (assignment_.empty())
    throw std::invalid_argument("BlockPartition: empty assignment");
  k_ = *std::max_element(assignment_.begin(), assignment_.end()) + 1;
  std::vector<bool> seen(k_, false);
  for (int b : assignment_) {
    if (b < 0) throw std::invalid_argument("BlockPartition: negative block id");
    seen[b] = true;
  }
  for (bool s : seen)
    if (!s) throw std::invalid_argument("BlockPartition: empty block");
}

BlockPartition BlockPartition::from_sizes(const std::vector<int>& sizes) {
  std::vector<int> assignment;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (sizes[b] < 1) throw std::invalid_argument("BlockPartition: size < 1");
    assignment.insert(assignment.end(), sizes[b], static_cast<int>(b));
  }
  return BlockPartition(std::move(assignment));
}

double deviation_from_reducibility(const TransitionView& tv, const BlockPartition& bp) {
  const Index n = tv.P.rows();
  if (static_cast<Index>(bp.assignment().size()) != n)
    throw std::invalid_argument("deviation_from_reducibility: partition size mismatch");
  // The largest off-diagonal block-row sum equals, per block, the largest
  // escape probability of any of its states.
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Index j = 0; j < n; ++j)
      if (bp.assignment()[i] != bp.assignment()[j]) off += tv.P(i, j);
    worst = std::max(worst, off);
  }
  return 2.0 * worst;
}

std::vector<int> default_ktilde(Index n) {
  int hi = static_cast<int>(std::min(20.0, std::floor(std::sqrt(static_cast<double>(n)))));
  int lo = 4;
  if (hi < lo) {
    lo = 2;
    hi = std::max(2, hi);
  }
  std::vector<int> ks;
  for (int k = lo; k <= hi; ++k) ks.push_back(k);
  return ks;
}

std::vector<EnsembleInput> build_reduction_inputs(const DataMatrix& X,
                                                  const Part1Config& config,
                                                  std::uint64_t seed,
                                                  std::vector<std::string>* warnings) {
  std::vector<EnsembleInput> inputs;
  for (const auto& [method, rank] : config.reductions) {
    const std::string id = reduction_name(method) + "_r" + std::to_string(rank);
    if (method == Reduction::Nmf && !X.nonneg()) {
      if (warnings)
        warnings->push_back("skipped reduction " + id + ": negative entries");
      continue;
    }
    NmfOptions nmf = config.nmf;
    nmf.seed = mix_seed(seed, "reduce-" + id);
    ReducedMatrix red = reduce(X, method, rank, nmf);
    EnsembleInput in;
    in.id = id;
    in.features = std::move(red.values);
    in.nonneg = method == Reduction::Nmf;
    in.rank = rank;
    inputs.push_back(std::move(in));
  }
  if (config.include_raw) {
    EnsembleInput in;
    in.id = "raw";
    in.features = X.to_dense();
    in.nonneg = X.nonneg();
    inputs.push_back(std::move(in));
  }
  if (inputs.empty())
    throw std::invalid_argument("icc_part1: no usable inputs (configure reductions or include_raw)");
  return inputs;
}

Part1Result icc_part1(const DataMatrix& X, const Part1Config& config,
                      std::uint64_t seed) {
  if (config.ktilde.empty())
    throw std::invalid_argument("icc_part1: empty ktilde list");
  if (config.algorithms.empty())
    throw std::invalid_argument("icc_part1: no algorithms");
  if (config.max_refinements < 0)
    throw std::invalid_argument("icc_part1: max_refinements < 0");

  std::vector<std::string> warnings;
  const double root_n = std::sqrt(static_cast<double>(X.rows()));
  for (int k : config.ktilde)
    if (static_cast<double>(k) >= root_n) {
      warnings.push_back("ktilde sweep reaches sqrt(n); over-estimates should stay below it");
      break;
    }

  std::vector<EnsembleInput> inputs =
      build_reduction_inputs(X, config, seed, &warnings);

  std::vector<SpectrumReport> reports;
  std::optional<ConsensusMatrix> accepted_cm;
  int accepted_k = 0;
  std::optional<Ensemble> initial;

  for (int round = 0; round <= config.max_refinements; ++round) {
    auto er = run_ensemble(inputs, config.algorithms, config.ktilde,
                           mix_seed(seed, mix_seed(0xA11CEull, round)), config.run);
    for (auto& w : er.warnings)
      warnings.push_back("round " + std::to_string(round) + ": " + w);
    if (round == 0) initial = er.ensemble;

    ConsensusMatrix cm = apply_intolerance(build_consensus(er.ensemble), config.tau);
    SpectrumReport rep = spectrum(cm, config.m_max);
    reports.push_back(rep);

    if (round > 0 && rep.k_estimate != accepted_k &&
        rep.gap_size <= reports[reports.size() - 2].gap_size) {
      // Gap size measures how nearly uncoupled the structure is; a round
      // that changes the estimate while shrinking the gap has blurred the
      // structure, not clarified it. Keep the previous round.
      warnings.push_back("round " + std::to_string(round) +
                         ": rejected, eigenvalue gap shrank without confirming k");
      break;
    }

    const bool stable = round > 0 && rep.k_estimate == accepted_k;
    accepted_cm = std::move(cm);
    accepted_k = rep.k_estimate;
    if (stable) break;

    if (round == config.max_refinements) break;
    if (config.reduce_consensus) {
      // The consensus matrix becomes the data input; reductions reapply.
      DataMatrix M(accepted_cm->as_double());
      inputs = build_reduction_inputs(M, config, mix_seed(seed, round + 1), &warnings);
      for (auto& in : inputs) in.id = "consensus_" + in.id;
      if (std::any_of(config.algorithms.begin(), config.algorithms.end(),
                      algorithm_needs_similarity)) {
        EnsembleInput sim = consensus_input(*accepted_cm);
        sim.graph_only = true;
        inputs.push_back(std::move(sim));
      }
    } else {
      inputs = {consensus_input(*accepted_cm)};
    }
  }

  Part1Result out{accepted_k, std::move(reports), std::move(*accepted_cm),
                  std::move(*initial), std::move(warnings)};
  return out;
}

}  // namespace icc
