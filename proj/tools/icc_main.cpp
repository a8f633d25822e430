// Command-line front end: consensus-clustering pipelines over CSV and
// MatrixMarket inputs, plus synthetic fixture generation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>

#include "icc/pipeline.hpp"
#include "icc/synth.hpp"

namespace {

int env_threads() {
  if (const char* v = std::getenv("ICC_THREADS")) {
    try {
      return std::max(1, std::stoi(v));
    } catch (...) {
    }
  }
  return 1;
}

struct CliArgs {
  std::string config_path;
  std::string input, format = "dense-csv", truth, out = ".";
  bool term_document = false, include_raw = false;
  std::string algorithms, reductions, ranks, ktilde;
  int k = 0;
  double tau = -1.0;
  int m_max = 0, max_rounds = 0, max_refinements = -1, threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_pipeline_options(CLI::App* cmd, CliArgs& a) {
  cmd->add_option("--config", a.config_path, "key=value config file; flags override it");
  cmd->add_option("-i,--input", a.input, "input matrix path");
  cmd->add_option("--format", a.format, "dense-csv | labeled-csv | matrix-market");
  cmd->add_flag("--term-doc", a.term_document, "matrix-market input is term-by-document; transpose on load");
  cmd->add_option("--truth", a.truth, "label file for accuracy reporting (one label per line)");
  cmd->add_option("--algos", a.algorithms, "comma list: kmeans,pddp,pddp-kmeans,nmf,pic,ncut,njw");
  cmd->add_option("--reductions", a.reductions, "comma list: svd,pca,nmf");
  cmd->add_option("--ranks", a.ranks, "comma list of reduction ranks");
  cmd->add_flag("--include-raw", a.include_raw, "also cluster the unreduced matrix");
  cmd->add_option("--ktilde", a.ktilde, "sweep, e.g. 4..10 or 4,6,8");
  cmd->add_option("--tau", a.tau, "intolerance threshold in [0,1]");
  cmd->add_option("--m-max", a.m_max, "eigenvalues to examine");
  cmd->add_option("--max-rounds", a.max_rounds, "voting rounds before settling for plurality");
  cmd->add_option("--max-refinements", a.max_refinements, "consensus refinement rounds");
  cmd->add_option("--seed", a.seed, "master seed; all randomness derives from it");
  cmd->add_option("--threads", a.threads, "ensemble worker threads (default $ICC_THREADS or 1)");
  cmd->add_option("-o,--out", a.out, "output directory");
}

icc::RunConfig make_config(const CLI::App* cmd, const CliArgs& a) {
  icc::RunConfig cfg;
  if (!a.config_path.empty()) cfg = icc::parse_config_file(a.config_path);
  auto passed = [&](const char* name) { return cmd->count(name) > 0; };

  if (passed("--input")) cfg.input_path = a.input;
  if (passed("--format")) cfg.format = icc::format_from_name(a.format);
  if (passed("--term-doc")) cfg.term_document = a.term_document;
  if (passed("--truth")) cfg.truth_path = a.truth;
  if (passed("--algos")) {
    cfg.algorithms.clear();
    std::istringstream ss(a.algorithms);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) cfg.algorithms.push_back(icc::algorithm_from_name(item));
  }
  if (passed("--reductions")) {
    cfg.reductions.clear();
    std::istringstream ss(a.reductions);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) cfg.reductions.push_back(icc::reduction_from_name(item));
  }
  if (passed("--ranks")) {
    cfg.ranks.clear();
    std::istringstream ss(a.ranks);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) cfg.ranks.push_back(std::stoi(item));
  }
  if (passed("--include-raw")) cfg.include_raw = a.include_raw;
  if (passed("--ktilde")) cfg.ktilde = icc::parse_ktilde(a.ktilde);
  // Not every subcommand registers -k.
  if (const CLI::Option* kopt = cmd->get_option_no_throw("--k");
      kopt && kopt->count() > 0)
    cfg.k = a.k;
  if (passed("--tau")) cfg.tau = a.tau;
  if (passed("--m-max")) cfg.m_max = a.m_max;
  if (passed("--max-rounds")) cfg.max_rounds = a.max_rounds;
  if (passed("--max-refinements")) cfg.max_refinements = a.max_refinements;
  if (passed("--seed")) cfg.seed = a.seed;
  cfg.threads = passed("--threads") ? std::max(1, a.threads) : env_threads();
  if (passed("--out")) cfg.out_dir = a.out;
  return cfg;
}

int run_pipeline(const CLI::App* cmd, const CliArgs& a, icc::PipelineMode mode) {
  icc::RunConfig cfg = make_config(cmd, a);
  icc::RunOutcome outcome = icc::run_full(cfg, mode);
  if (outcome.k_estimate)
    std::cout << "k_estimate " << *outcome.k_estimate << '\n';
  if (mode != icc::PipelineMode::EstimateK) {
    std::cout << "k " << outcome.k_used << '\n'
              << "consensus " << (outcome.consensus_reached ? "yes" : "plurality") << '\n';
    if (outcome.accuracy) std::cout << "accuracy " << *outcome.accuracy << '\n';
  }
  std::cout << "results " << cfg.out_dir << "/results.json" << '\n';
  return outcome.exit_code;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> sizes;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) sizes.push_back(std::stoi(item));
  if (sizes.empty()) throw std::invalid_argument("empty size list");
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iterative consensus clustering"};
  app.require_subcommand(1);

  CliArgs est_args, clu_args, run_args;
  auto* est = app.add_subcommand("estimate-k", "estimate the cluster count from the eigenvalue gap");
  add_pipeline_options(est, est_args);
  auto* clu = app.add_subcommand("cluster", "iterated ensemble voting at a known k");
  add_pipeline_options(clu, clu_args);
  clu->add_option("-k,--k", clu_args.k, "cluster count")->required();
  auto* run = app.add_subcommand("run", "full pipeline: estimate k, then vote");
  add_pipeline_options(run, run_args);
  run->add_option("-k,--k", run_args.k, "known cluster count (skips estimation)");

  auto* synth = app.add_subcommand("synth", "generate test fixtures");
  std::string synth_kind, synth_sizes = "100,100,100", synth_out = "synth_out";
  int synth_dim = 10;
  double synth_separation = 12.0, synth_epsilon = 0.05;
  std::uint64_t synth_seed = 0;
  synth->add_option("kind", synth_kind, "blobs | blocks")->required();
  synth->add_option("--sizes", synth_sizes, "comma list of cluster/block sizes");
  synth->add_option("--dim", synth_dim, "feature count (blobs)");
  synth->add_option("--separation", synth_separation, "center distance in std units (blobs)");
  synth->add_option("--epsilon", synth_epsilon, "off-block noise scale (blocks)");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("-o,--out", synth_out, "output file (labeled csv for blobs, mtx for blocks)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) return run_pipeline(est, est_args, icc::PipelineMode::EstimateK);
    if (clu->parsed()) return run_pipeline(clu, clu_args, icc::PipelineMode::Cluster);
    if (run->parsed()) return run_pipeline(run, run_args, icc::PipelineMode::Full);

    if (synth->parsed()) {
      if (synth_kind == "blobs") {
        auto sizes = parse_sizes(synth_sizes);
        icc::BlobSpec spec;
        spec.k = static_cast<int>(sizes.size());
        spec.per_cluster = sizes;
        spec.dim = synth_dim;
        spec.separation = synth_separation;
        spec.seed = synth_seed;
        auto blobs = icc::gaussian_blobs(spec);
        icc::save_labeled_csv(synth_out, blobs.X.dense(), blobs.truth);
        std::cout << "wrote " << synth_out << " (" << blobs.X.rows() << " x "
                  << blobs.X.cols() << " + labels)\n";
      } else if (synth_kind == "blocks") {
        auto sizes = parse_sizes(synth_sizes);
        auto S = icc::noisy_block_matrix(sizes, synth_epsilon, synth_seed);
        icc::save_matrix_market(synth_out, S.values(), "icc synthetic block matrix");
        std::cout << "wrote " << synth_out << '\n';
      } else {
        throw std::invalid_argument("synth kind must be blobs or blocks");
      }
      return 0;
    }
  } catch (const std::exception& ex) {
    nlohmann::ordered_json err{{"schema", "icc/error/1"}, {"error", ex.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
