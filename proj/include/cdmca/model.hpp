#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "cdmca/core.hpp"
#include "cdmca/solver.hpp"

namespace cdmca {

/// Everything needed to map new domain vectors into the fitted common space.
struct Model {
  DomainLayout layout;
  std::vector<std::optional<Standardization>> standardization;  // one per domain
  Index k = 0;
  double gamma_m = 0.0;
  double gamma_w = 0.0;
  RegularizerKind regularizer_m = RegularizerKind::AlphaScaled;
  RegularizerKind regularizer_w = RegularizerKind::AlphaScaled;
  Eigen::VectorXd alpha;
  double zero_threshold = 1e-10;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd projection;  // P x K

  Eigen::MatrixXd projection_block(Index d) const {
    return projection.middleRows(layout.col_offset(d), layout.features(d));
  }
};

Model make_model(std::span<const DomainTable> tables, const Fit& fit, const SolverConfig& cfg);

/// Text format, first line `cdmca-model v1`, then one `key values...` line per
/// field; matrices are written row-major with 17 significant digits.
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace cdmca
