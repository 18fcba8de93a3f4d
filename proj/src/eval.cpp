#include "cdmca/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cdmca/error.hpp"

namespace cdmca {

WeightGraph normalize_weights(const WeightGraph& w) {
  const double total = w.symmetric_sum();
  if (total == 0.0) {
    throw Error(ErrorKind::ZeroWeight, "cannot normalize a weight graph whose total is zero");
  }
  return w.scaled(1.0 / total);
}

namespace {

void check_layout(const Embedding& emb, const WeightGraph& w) {
  if (!(emb.layout == w.layout())) {
    throw Error(ErrorKind::DimensionMismatch, "embedding and weight layouts differ");
  }
}

}  // namespace

ErrorReport per_pc_error(const Embedding& emb, const WeightGraph& w) {
  check_layout(emb, w);
  ErrorReport r;
  r.per_pc = Eigen::VectorXd::Zero(emb.dims());
  r.weight_sum = w.symmetric_sum();
  r.rescale = emb.rescale;
  for (const auto& e : w.edges()) {
    if (e.row == e.col) continue;
    // The ordered pairs (i,j) and (j,i) each contribute half.
    r.per_pc += e.weight * (emb.y.row(e.row) - emb.y.row(e.col)).transpose().array().square().matrix();
  }
  r.total = r.per_pc.sum();
  return r;
}

double matching_error(const Embedding& emb, const WeightGraph& w) {
  check_layout(emb, w);
  double phi = 0.0;
  for (const auto& e : w.edges()) {
    if (e.row == e.col) continue;
    phi += e.weight * (emb.y.row(e.row) - emb.y.row(e.col)).squaredNorm();
  }
  return phi;
}

Embedding weighted_rescale(const Embedding& emb, const WeightGraph& w) {
  check_layout(emb, w);
  const DegreeMatrix m = degree_matrix(w);
  const double total = m.values.sum();
  if (total == 0.0) {
    throw Error(ErrorKind::ZeroWeight, "weighted rescale needs a nonzero total weight");
  }
  Embedding out = emb;
  for (Index k = 0; k < emb.dims(); ++k) {
    const double moment = m.values.dot(emb.y.col(k).cwiseAbs2()) / total;
    if (!(moment > 0.0)) {
      throw Error(ErrorKind::ZeroVariance, "component " + std::to_string(k + 1) +
                                               " has zero degree-weighted second moment");
    }
    const double f = 1.0 / std::sqrt(moment);
    out.y.col(k) *= f;
    out.factors(k) *= f;
  }
  out.rescale = RescaleMode::Weighted;
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorKind::LengthMismatch, "spearman needs two equal-length samples of size >= 2");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const Eigen::Map<const Eigen::VectorXd> x(ra.data(), static_cast<Index>(ra.size()));
  const Eigen::Map<const Eigen::VectorXd> y(rb.data(), static_cast<Index>(rb.size()));
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  if (denom == 0.0) {
    throw Error(ErrorKind::ZeroVariance, "spearman correlation undefined for a constant sample");
  }
  return xc.dot(yc) / denom;
}

}  // namespace cdmca
