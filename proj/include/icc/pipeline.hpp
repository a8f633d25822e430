#pragma once

#include <optional>
#include <string>
#include <vector>

#include "icc/io.hpp"
#include "icc/perron.hpp"

namespace icc {

enum class PipelineMode { EstimateK, Cluster, Full };

/// Everything a pipeline run needs; populated from a key=value config file
/// and/or command-line flags. Unknown config keys are rejected.
struct RunConfig {
  std::string input_path;
  MatrixFormat format = MatrixFormat::DenseCsv;
  bool term_document = false;
  std::string truth_path;  // optional label file (one label per line)

  std::vector<Algorithm> algorithms = {Algorithm::SphericalKmeans, Algorithm::Pddp,
                                       Algorithm::PddpKmeans};
  std::vector<Reduction> reductions = {Reduction::Svd, Reduction::Pca};
  std::vector<int> ranks = {5, 10, 20};
  bool include_raw = false;

  std::vector<int> ktilde;   // empty selects default_ktilde(n)
  std::optional<int> k;      // known cluster count skips estimation

  double tau = 0.0;
  int m_max = 20;
  int max_rounds = 10;
  int max_refinements = 3;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 1;
};

RunConfig parse_config_file(const std::string& path);

/// Parses "4..10" or "4,7,9" into a ktilde list.
std::vector<int> parse_ktilde(const std::string& text);

struct RunOutcome {
  int exit_code = 0;  // 0 consensus/complete, 2 plurality without majority
  bool consensus_reached = false;
  int k_used = 0;
  std::optional<int> k_estimate;
  std::optional<double> accuracy;
};

/// Executes the pipeline and writes results.json, eigenvalues.csv,
/// consensus.mtx, histogram.csv and (when a final partition exists)
/// heatmap.csv into config.out_dir. Reruns with the same seed produce
/// byte-identical outputs.
RunOutcome run_full(const RunConfig& config, PipelineMode mode = PipelineMode::Full);

}  // namespace icc
