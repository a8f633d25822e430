#pragma once

#include <optional>
#include <string>

#include "icc/consensus.hpp"
#include "icc/data_model.hpp"

namespace icc {

enum class MatrixFormat { DenseCsv, LabeledCsv, MatrixMarket };

std::string format_name(MatrixFormat f);
MatrixFormat format_from_name(const std::string& name);

struct LoadedMatrix {
  DataMatrix X;
  std::optional<Clustering> truth;
};

/// Reads a data matrix.
///  - dense-csv: one row per object, comma-separated reals, optional
///    header line; '#' lines are comments.
///  - labeled-csv: like dense-csv with the last column holding a
///    ground-truth label.
///  - matrix-market: coordinate or array format; pass term_document=true
///    when objects are columns, to transpose on load.
/// Parse failures name the offending line.
LoadedMatrix load_matrix(const std::string& path, MatrixFormat format,
                         bool term_document = false);

void save_dense_csv(const std::string& path, const Matrix& values);
void save_labeled_csv(const std::string& path, const Matrix& values,
                      const Clustering& truth);

/// Coordinate matrix-market file; symmetric storage (lower triangle).
void save_matrix_market(const std::string& path, const IntMatrix& values,
                        const std::string& comment = "");
void save_matrix_market(const std::string& path, const Matrix& values,
                        const std::string& comment = "");

/// One label per line.
std::optional<Clustering> load_labels(const std::string& path);

}  // namespace icc
