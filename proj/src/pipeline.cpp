#include "icc/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace icc {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::vector<int> parse_ktilde(const std::string& text) {
  std::vector<int> ks;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("ktilde range is empty: " + text);
    for (int k = lo; k <= hi; ++k) ks.push_back(k);
    return ks;
  }
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) ks.push_back(std::stoi(item));
  }
  if (ks.empty()) throw std::invalid_argument("empty ktilde list: " + text);
  return ks;
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  RunConfig cfg;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = line;
    if (auto pos = t.find('#'); pos != std::string::npos) t.erase(pos);
    // Trim.
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    std::size_t b = 0;
    while (b < t.size() && std::isspace(static_cast<unsigned char>(t[b]))) ++b;
    t.erase(0, b);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = t.substr(0, eq);
    const std::string val = t.substr(eq + 1);

    if (key == "input") cfg.input_path = val;
    else if (key == "format") cfg.format = format_from_name(val);
    else if (key == "term-document") cfg.term_document = parse_bool(val);
    else if (key == "truth") cfg.truth_path = val;
    else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (const auto& name : split_list(val)) cfg.algorithms.push_back(algorithm_from_name(name));
    } else if (key == "reductions") {
      cfg.reductions.clear();
      for (const auto& name : split_list(val)) cfg.reductions.push_back(reduction_from_name(name));
    } else if (key == "ranks") {
      cfg.ranks.clear();
      for (const auto& r : split_list(val)) cfg.ranks.push_back(std::stoi(r));
    } else if (key == "include-raw") cfg.include_raw = parse_bool(val);
    else if (key == "ktilde") cfg.ktilde = parse_ktilde(val);
    else if (key == "k") cfg.k = std::stoi(val);
    else if (key == "tau") cfg.tau = std::stod(val);
    else if (key == "m-max") cfg.m_max = std::stoi(val);
    else if (key == "max-rounds") cfg.max_rounds = std::stoi(val);
    else if (key == "max-refinements") cfg.max_refinements = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "out") cfg.out_dir = val;
    else if (key == "threads") cfg.threads = std::stoi(val);
    else
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return cfg;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_eigenvalues_csv(const std::string& path,
                           const std::vector<SpectrumReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema: icc/eigenvalues/1\n";
  out << "round,index,eigenvalue\n";
  for (std::size_t r = 0; r < reports.size(); ++r)
    for (int i = 0; i < reports[r].eigenvalues.size(); ++i)
      out << r << ',' << i + 1 << ',' << fmt_double(reports[r].eigenvalues(i)) << '\n';
}

void write_histogram_csv(const std::string& path, const ConsensusMatrix& cm) {
  std::vector<long> counts(static_cast<std::size_t>(cm.total()) + 1, 0);
  const auto& M = cm.counts();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = i + 1; j < M.cols(); ++j) ++counts[M(i, j)];
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema: icc/histogram/1\n";
  out << "value,count\n";
  for (std::size_t v = 0; v < counts.size(); ++v) out << v << ',' << counts[v] << '\n';
}

void write_heatmap_csv(const std::string& path, const ConsensusMatrix& cm,
                       const Clustering& order_by) {
  const Index n = cm.size();
  std::vector<int> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
    return order_by.labels()[a] < order_by.labels()[b];
  });
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema: icc/heatmap/1 (block-ordered positions; zero entries omitted)\n";
  out << "row,col,value\n";
  const auto& M = cm.counts();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (M(perm[i], perm[j]) != 0)
        out << i << ',' << j << ',' << M(perm[i], perm[j]) << '\n';
}

ordered_json spectrum_json(const SpectrumReport& rep) {
  return ordered_json{{"k_estimate", rep.k_estimate},
                      {"gap_index", rep.gap_index},
                      {"gap_size", rep.gap_size}};
}

}  // namespace

RunOutcome run_full(const RunConfig& config, PipelineMode mode) {
  if (config.input_path.empty()) throw std::invalid_argument("run: no input path");
  if (mode == PipelineMode::Cluster && !config.k)
    throw std::invalid_argument("cluster: k is required");
  if (config.k && *config.k < 1) throw std::invalid_argument("run: k < 1");

  LoadedMatrix loaded = load_matrix(config.input_path, config.format, config.term_document);
  std::optional<Clustering> truth = loaded.truth;
  if (!config.truth_path.empty()) truth = load_labels(config.truth_path);
  const DataMatrix& X = loaded.X;
  if (truth && truth->size() != X.rows())
    throw std::invalid_argument("truth labels do not match object count");

  std::vector<std::string> warnings;

  Part1Config pc;
  pc.include_raw = config.include_raw;
  pc.algorithms = config.algorithms;
  pc.ktilde = config.ktilde.empty() ? default_ktilde(X.rows()) : config.ktilde;
  pc.tau = config.tau;
  pc.m_max = config.m_max;
  pc.max_refinements = config.max_refinements;
  pc.run.threads = config.threads;
  for (Reduction red : config.reductions)
    for (int r : config.ranks) {
      if (r >= 1 && r <= std::min(X.rows(), X.cols())) {
        pc.reductions.emplace_back(red, r);
      } else {
        warnings.push_back("dropped " + reduction_name(red) + " rank " +
                           std::to_string(r) + ": out of range for this matrix");
      }
    }

  const bool run_part1 = mode == PipelineMode::EstimateK ||
                         (mode == PipelineMode::Full && !config.k);
  std::optional<Part1Result> part1;
  if (run_part1) part1 = icc_part1(X, pc, config.seed);
  const int k_used = config.k && mode != PipelineMode::EstimateK
                         ? *config.k
                         : (part1 ? part1->k_estimate : 0);

  std::optional<Part2Result> part2;
  if (mode != PipelineMode::EstimateK && k_used >= 2) {
    if (part1) {
      part2 = icc_part2(part1->final_cm, k_used, config.algorithms, config.tau,
                        config.max_rounds, mix_seed(config.seed, "part2"), pc.run);
    } else {
      auto inputs = build_reduction_inputs(X, pc, config.seed, &warnings);
      part2 = icc_part2(inputs, k_used, config.algorithms, config.tau,
                        config.max_rounds, mix_seed(config.seed, "part2"), pc.run);
    }
  }

  // The matrix reported on disk: the consensus of the last voting round,
  // or the estimation result when no vote was held.
  std::optional<ConsensusMatrix> report_cm;
  if (part2) {
    report_cm = apply_intolerance(
        build_consensus(part2->rounds.back().clusterings), config.tau);
  } else if (part1) {
    report_cm = part1->final_cm;
  }

  std::optional<Clustering> final_labels;
  bool consensus = false;
  if (part2) {
    final_labels = part2->final;
    consensus = part2->consensus_reached;
  } else if (mode != PipelineMode::EstimateK && k_used == 1) {
    // A single cluster needs no vote.
    final_labels = partition_from_labels(std::vector<int>(X.rows(), 0));
    consensus = true;
  }

  std::vector<SpectrumReport> spectra;
  if (part1) {
    spectra = part1->reports;
  } else if (report_cm) {
    SpectrumOptions so;
    so.m_max = config.m_max;
    spectra.push_back(spectrum(report_cm->as_double(), so));
  }

  fs::create_directories(config.out_dir);
  const auto artifact = [&](const char* name) {
    return (fs::path(config.out_dir) / name).string();
  };

  if (!spectra.empty()) write_eigenvalues_csv(artifact("eigenvalues.csv"), spectra);
  if (report_cm) {
    save_matrix_market(artifact("consensus.mtx"), report_cm->counts(),
                       "icc consensus total=" + std::to_string(report_cm->total()) +
                           " tau=" + fmt_double(report_cm->tau_applied()));
    write_histogram_csv(artifact("histogram.csv"), *report_cm);
    if (final_labels) write_heatmap_csv(artifact("heatmap.csv"), *report_cm, *final_labels);
  }

  RunOutcome outcome;
  outcome.k_used = k_used;
  if (part1) outcome.k_estimate = part1->k_estimate;
  outcome.consensus_reached = consensus;
  if (final_labels && truth) outcome.accuracy = accuracy(*final_labels, *truth);
  outcome.exit_code = (mode == PipelineMode::EstimateK || !final_labels)
                          ? 0
                          : (consensus ? 0 : 2);

  ordered_json doc;
  doc["schema"] = "icc/results/1";
  doc["mode"] = mode == PipelineMode::EstimateK ? "estimate-k"
               : mode == PipelineMode::Cluster  ? "cluster"
                                                : "run";
  doc["input"] = ordered_json{{"path", config.input_path},
                              {"format", format_name(config.format)},
                              {"n", X.rows()},
                              {"m", X.cols()}};
  doc["seed"] = config.seed;
  {
    ordered_json cj;
    ordered_json algos = ordered_json::array();
    for (auto a : config.algorithms) algos.push_back(algorithm_name(a));
    ordered_json reds = ordered_json::array();
    for (const auto& [m, r] : pc.reductions)
      reds.push_back(reduction_name(m) + "_r" + std::to_string(r));
    cj["algorithms"] = algos;
    cj["reductions"] = reds;
    cj["include_raw"] = config.include_raw;
    cj["ktilde"] = pc.ktilde;
    cj["tau"] = config.tau;
    cj["m_max"] = config.m_max;
    cj["max_rounds"] = config.max_rounds;
    cj["max_refinements"] = config.max_refinements;
    cj["threads"] = config.threads;
    doc["config"] = cj;
  }
  if (part1) {
    ordered_json rounds = ordered_json::array();
    for (std::size_t r = 0; r < part1->reports.size(); ++r) {
      ordered_json rj = spectrum_json(part1->reports[r]);
      rj["round"] = r;
      rounds.push_back(rj);
    }
    doc["part1"] = ordered_json{{"k_estimate", part1->k_estimate}, {"rounds", rounds}};
    for (const auto& w : part1->warnings) warnings.push_back(w);
  } else {
    doc["part1"] = nullptr;
  }
  if (part2) {
    ordered_json rounds = ordered_json::array();
    for (const auto& vr : part2->rounds)
      rounds.push_back(ordered_json{{"round", vr.round_index},
                                    {"votes", vr.clusterings.size()},
                                    {"agreement_count", vr.agreement_count},
                                    {"agreed", vr.agreed.has_value()}});
    doc["part2"] = ordered_json{{"k", k_used},
                                {"consensus_reached", part2->consensus_reached},
                                {"rounds", rounds}};
    for (const auto& w : part2->warnings) warnings.push_back(w);
  } else {
    doc["part2"] = nullptr;
  }
  if (final_labels) {
    doc["final_labels"] = final_labels->labels();
    doc["final_k"] = final_labels->k();
  } else {
    doc["final_labels"] = nullptr;
  }
  doc["consensus_reached"] = consensus;
  if (outcome.accuracy) {
    doc["accuracy"] = *outcome.accuracy;
  } else {
    doc["accuracy"] = nullptr;
  }
  if (truth && part1) {
    double sum = 0.0;
    const Ensemble& e = part1->initial_ensemble;
    for (int t = 0; t < e.size(); ++t) sum += accuracy(e.clustering(t), *truth);
    doc["ensemble_mean_accuracy"] = sum / e.size();
  } else {
    doc["ensemble_mean_accuracy"] = nullptr;
  }
  doc["warnings"] = warnings;
  doc["exit_code"] = outcome.exit_code;

  std::ofstream out(artifact("results.json"));
  if (!out) throw std::runtime_error("cannot write results.json");
  out << doc.dump(2) << '\n';

  return outcome;
}

}  // namespace icc
