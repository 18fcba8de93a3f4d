#pragma once

#include <Eigen/Dense>

#include <span>

#include "cdmca/core.hpp"
#include "cdmca/embedding.hpp"

namespace cdmca {

/// Rescales so the full symmetric double sum of W is 1.
WeightGraph normalize_weights(const WeightGraph& w);

/// phi = 1/2 sum_{d,e,i,j} w_ij ||y_i - y_j||^2 evaluated over the stored edges.
double matching_error(const Embedding& emb, const WeightGraph& w);

struct ErrorReport {
  Eigen::VectorXd per_pc;  // phi_1 .. phi_K
  double total = 0.0;
  double weight_sum = 0.0;  // symmetric sum of the W the errors were computed with
  RescaleMode rescale = RescaleMode::None;
};

ErrorReport per_pc_error(const Embedding& emb, const WeightGraph& w);

/// Divides PC k by sqrt(sum_i m_i (y_i)_k^2 / sum_i m_i), the degree-weighted
/// root mean square of the column.
Embedding weighted_rescale(const Embedding& emb, const WeightGraph& w);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace cdmca
