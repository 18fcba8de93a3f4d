#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdmca/core.hpp"
#include "cdmca/model.hpp"

namespace cdmca {

enum class RescaleMode { None, UnitVariance, Weighted };

std::string to_string(RescaleMode mode);
RescaleMode parse_rescale(const std::string& name);

/// Common-space coordinates Y (N x K), rows grouped by domain.
struct Embedding {
  DomainLayout layout;
  Eigen::MatrixXd y;
  RescaleMode rescale = RescaleMode::None;
  // Column multipliers applied since projection; ones when rescale is None.
  Eigen::VectorXd factors;

  Index dims() const { return y.cols(); }
  auto block(Index d) const { return y.middleRows(layout.row_offset(d), layout.items(d)); }
  auto row(Index d, Index i) const { return y.row(layout.global_row(d, i)); }

  /// Maps a freshly projected vector into this embedding's (rescaled) coordinates.
  Eigen::VectorXd rescaled(const Eigen::Ref<const Eigen::VectorXd>& raw) const;
};

/// Y = XA computed blockwise; x must already be in training coordinates.
Embedding project(const BlockDataMatrix& x, const Eigen::Ref<const Eigen::MatrixXd>& projection);

/// Raw tables through the stored standardization and then (A^d)^T x.
Embedding project(const Model& model, std::span<const DomainTable> raw_tables);
Eigen::VectorXd project_vector(const Model& model, Index domain,
                               const Eigen::Ref<const Eigen::VectorXd>& raw_x);

/// Divides each column by its population standard deviation over all N rows.
Embedding rescale_unit_variance(const Embedding& emb);

struct Neighbor {
  Index domain = 0;
  Index index = 0;
  double distance = 0.0;
};

struct QueryResult {
  std::vector<Neighbor> neighbors;  // ascending distance, ties by (domain, index)
  Index dims = 0;
};

/// Exhaustive Euclidean search on the first `dims` coordinates. An empty
/// domain filter admits every domain.
QueryResult query_knn(const Embedding& emb, const Eigen::Ref<const Eigen::VectorXd>& query,
                      Index dims, Index top, std::span<const Index> domains = {});

}  // namespace cdmca
