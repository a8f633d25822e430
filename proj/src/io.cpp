#include "icc/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace icc {

std::string format_name(MatrixFormat f) {
  switch (f) {
    case MatrixFormat::DenseCsv: return "dense-csv";
    case MatrixFormat::LabeledCsv: return "labeled-csv";
    case MatrixFormat::MatrixMarket: return "matrix-market";
  }
  throw std::logic_error("format_name: bad enum");
}

MatrixFormat format_from_name(const std::string& name) {
  if (name == "dense-csv") return MatrixFormat::DenseCsv;
  if (name == "labeled-csv") return MatrixFormat::LabeledCsv;
  if (name == "matrix-market" || name == "mtx") return MatrixFormat::MatrixMarket;
  throw std::invalid_argument("unknown matrix format: " + name);
}

namespace {

[[noreturn]] void fail_at(const std::string& path, long line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::string trimmed(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trimmed(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && !s.empty();
}

struct CsvBody {
  std::vector<std::vector<std::string>> rows;
  std::vector<long> line_numbers;
};

CsvBody read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvBody body;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    body.rows.push_back(split_csv(line));
    body.line_numbers.push_back(lineno);
  }
  if (body.rows.empty()) throw std::runtime_error(path + ": no data rows");
  return body;
}

LoadedMatrix load_csv(const std::string& path, bool labeled) {
  CsvBody body = read_csv_rows(path);

  // A non-numeric first line is a header.
  std::size_t first = 0;
  {
    double v;
    bool numeric = true;
    for (const auto& cell : body.rows[0]) {
      if (!parse_double(cell, v)) {
        numeric = false;
        break;
      }
    }
    if (!numeric && !labeled) first = 1;
    if (labeled) {
      // For labeled files only the feature cells decide.
      numeric = body.rows[0].size() >= 2;
      for (std::size_t c = 0; numeric && c + 1 < body.rows[0].size(); ++c)
        numeric = parse_double(body.rows[0][c], v);
      if (!numeric) first = 1;
    }
  }
  if (first >= body.rows.size())
    throw std::runtime_error(path + ": no data rows after header");

  const std::size_t width = body.rows[first].size();
  const std::size_t feature_cols = labeled ? width - 1 : width;
  if (feature_cols < 1) fail_at(path, body.line_numbers[first], "no feature columns");

  const Index n = static_cast<Index>(body.rows.size() - first);
  Matrix X(n, static_cast<Index>(feature_cols));
  std::vector<std::string> raw_labels(labeled ? n : 0);

  for (Index i = 0; i < n; ++i) {
    const auto& row = body.rows[first + i];
    const long lineno = body.line_numbers[first + i];
    if (row.size() != width)
      fail_at(path, lineno,
              "expected " + std::to_string(width) + " columns, got " +
                  std::to_string(row.size()));
    for (std::size_t c = 0; c < feature_cols; ++c) {
      double v;
      if (!parse_double(row[c], v))
        fail_at(path, lineno, "non-numeric cell '" + row[c] + "'");
      X(i, static_cast<Index>(c)) = v;
    }
    if (labeled) raw_labels[i] = row[width - 1];
  }

  LoadedMatrix out{DataMatrix(std::move(X)), std::nullopt};
  if (labeled) {
    std::unordered_map<std::string, int> ids;
    std::vector<int> labels(n);
    for (Index i = 0; i < n; ++i) {
      auto [it, inserted] = ids.emplace(raw_labels[i], static_cast<int>(ids.size()));
      labels[i] = it->second;
    }
    out.truth = partition_from_labels(labels);
  }
  return out;
}

LoadedMatrix load_matrix_market(const std::string& path, bool term_document) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  long lineno = 0;

  if (!std::getline(in, line)) fail_at(path, 1, "empty file");
  ++lineno;
  std::istringstream banner(line);
  std::string tag, object, fmt, field, symmetry;
  banner >> tag >> object >> fmt >> field >> symmetry;
  if (tag != "%%MatrixMarket" || object != "matrix")
    fail_at(path, lineno, "not a MatrixMarket matrix file");
  const bool coordinate = fmt == "coordinate";
  if (!coordinate && fmt != "array") fail_at(path, lineno, "unsupported format " + fmt);
  if (field != "real" && field != "integer")
    fail_at(path, lineno, "unsupported field " + field);
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    fail_at(path, lineno, "unsupported symmetry " + symmetry);

  auto next_content = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trimmed(line);
      if (!t.empty() && t[0] != '%') {
        line = t;
        return true;
      }
    }
    return false;
  };

  if (!next_content()) fail_at(path, lineno, "missing size line");
  std::istringstream sizes(line);
  long rows = 0, cols = 0, nnz = 0;
  if (coordinate) {
    if (!(sizes >> rows >> cols >> nnz)) fail_at(path, lineno, "bad size line");
  } else {
    if (!(sizes >> rows >> cols)) fail_at(path, lineno, "bad size line");
  }
  if (rows < 1 || cols < 1) fail_at(path, lineno, "bad dimensions");

  if (coordinate) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long e = 0; e < nnz; ++e) {
      if (!next_content()) fail_at(path, lineno, "unexpected end of entries");
      std::istringstream entry(line);
      long i, j;
      double v;
      if (!(entry >> i >> j >> v)) fail_at(path, lineno, "bad entry");
      if (i < 1 || i > rows || j < 1 || j > cols)
        fail_at(path, lineno, "index out of range");
      long r = i - 1, c = j - 1;
      if (term_document) std::swap(r, c);
      trips.emplace_back(r, c, v);
      if (symmetric && i != j) trips.emplace_back(c, r, v);
    }
    if (term_document) std::swap(rows, cols);
    SpMatrix S(rows, cols);
    S.setFromTriplets(trips.begin(), trips.end());
    return LoadedMatrix{DataMatrix(std::move(S)), std::nullopt};
  }

  Matrix D(rows, cols);  // array format is column-major
  for (long c = 0; c < cols; ++c) {
    const long r0 = symmetric ? c : 0;
    for (long r = r0; r < rows; ++r) {
      if (!next_content()) fail_at(path, lineno, "unexpected end of entries");
      double v;
      if (!parse_double(line, v)) fail_at(path, lineno, "non-numeric cell '" + line + "'");
      D(r, c) = v;
      if (symmetric) D(c, r) = v;
    }
  }
  if (term_document) D = D.transpose().eval();
  return LoadedMatrix{DataMatrix(std::move(D)), std::nullopt};
}

}  // namespace

LoadedMatrix load_matrix(const std::string& path, MatrixFormat format,
                         bool term_document) {
  switch (format) {
    case MatrixFormat::DenseCsv: return load_csv(path, false);
    case MatrixFormat::LabeledCsv: return load_csv(path, true);
    case MatrixFormat::MatrixMarket: return load_matrix_market(path, term_document);
  }
  throw std::logic_error("load_matrix: bad enum");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void save_dense_csv(const std::string& path, const Matrix& values) {
  auto out = open_out(path);
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << fmt_double(values(i, j));
    }
    out << '\n';
  }
}

void save_labeled_csv(const std::string& path, const Matrix& values,
                      const Clustering& truth) {
  if (truth.size() != values.rows())
    throw std::invalid_argument("save_labeled_csv: label count mismatch");
  auto out = open_out(path);
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) out << fmt_double(values(i, j)) << ',';
    out << truth.labels()[i] << '\n';
  }
}

namespace {

template <class MatT, class Fmt>
void save_mm_symmetric(const std::string& path, const MatT& values,
                       const char* field, const std::string& comment, Fmt fmt) {
  const Index n = values.rows();
  if (values.cols() != n || values != values.transpose().eval())
    throw std::invalid_argument("save_matrix_market: expected a symmetric matrix");
  long nnz = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i)
      if (values(i, j) != 0) ++nnz;
  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate " << field << " symmetric\n";
  if (!comment.empty()) out << "% " << comment << '\n';
  out << n << ' ' << n << ' ' << nnz << '\n';
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i)
      if (values(i, j) != 0)
        out << i + 1 << ' ' << j + 1 << ' ' << fmt(values(i, j)) << '\n';
}

}  // namespace

void save_matrix_market(const std::string& path, const IntMatrix& values,
                        const std::string& comment) {
  save_mm_symmetric(path, values, "integer", comment,
                    [](int v) { return std::to_string(v); });
}

void save_matrix_market(const std::string& path, const Matrix& values,
                        const std::string& comment) {
  save_mm_symmetric(path, values, "real", comment,
                    [](double v) { return fmt_double(v); });
}

std::optional<Clustering> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<int> labels;
  std::unordered_map<std::string, int> ids;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    auto [it, inserted] = ids.emplace(t, static_cast<int>(ids.size()));
    labels.push_back(it->second);
  }
  if (labels.empty()) return std::nullopt;
  return partition_from_labels(labels);
}

}  // namespace icc
