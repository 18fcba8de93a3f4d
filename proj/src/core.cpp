#include "cdmca/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cdmca/error.hpp"
#include "cdmca/log.hpp"

namespace cdmca {

DomainLayout::DomainLayout(std::vector<Index> features, std::vector<Index> items)
    : features_(std::move(features)), items_(std::move(items)) {
  if (features_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "layout needs at least one domain");
  }
  if (features_.size() != items_.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "layout has " + std::to_string(features_.size()) + " feature counts but " +
                    std::to_string(items_.size()) + " item counts");
  }
  for (std::size_t d = 0; d < features_.size(); ++d) {
    if (features_[d] < 1 || items_[d] < 1) {
      throw Error(ErrorKind::InvalidArgument,
                  "domain " + std::to_string(d) + " must have p >= 1 and n >= 1");
    }
    col_offsets_.push_back(col_offsets_.back() + features_[d]);
    row_offsets_.push_back(row_offsets_.back() + items_[d]);
  }
}

Index DomainLayout::global_row(Index d, Index i) const {
  if (d < 0 || d >= domains()) {
    throw Error(ErrorKind::OutOfRange, "domain " + std::to_string(d) + " not in [0, " +
                                           std::to_string(domains()) + ")");
  }
  if (i < 0 || i >= items(d)) {
    throw Error(ErrorKind::OutOfRange, "index " + std::to_string(i) + " not in [0, " +
                                           std::to_string(items(d)) + ") for domain " +
                                           std::to_string(d));
  }
  return row_offset(d) + i;
}

std::pair<Index, Index> DomainLayout::locate(Index row) const {
  if (row < 0 || row >= total_items()) {
    throw Error(ErrorKind::OutOfRange, "global row " + std::to_string(row) + " out of range");
  }
  const auto it = std::upper_bound(row_offsets_.begin(), row_offsets_.end(), row);
  const Index d = static_cast<Index>(it - row_offsets_.begin()) - 1;
  return {d, row - row_offset(d)};
}

DomainTable standardize_columns(const DomainTable& table) {
  const auto& x = table.data;
  const Index n = x.rows();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "cannot standardize an empty table");

  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  Eigen::VectorXd scale(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - mean(j)).square().sum() / static_cast<double>(n);
    if (!(var > 0.0)) {
      throw Error(ErrorKind::ConstantColumn, "domain " + std::to_string(table.domain) +
                                                 " column " + std::to_string(j) +
                                                 " has zero variance");
    }
    scale(j) = std::sqrt(var);
  }

  DomainTable out{table.domain, x, std::nullopt};
  out.data.rowwise() -= mean.transpose();
  out.data.array().rowwise() /= scale.transpose().array();

  if (table.standardization) {
    const auto& prev = *table.standardization;
    out.standardization = Standardization{
        prev.mean + prev.scale.cwiseProduct(mean), prev.scale.cwiseProduct(scale)};
  } else {
    out.standardization = Standardization{mean, scale};
  }
  return out;
}

Eigen::VectorXd apply_standardization(const Standardization& s,
                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != s.mean.size()) {
    throw Error(ErrorKind::LengthMismatch, "vector of length " + std::to_string(x.size()) +
                                               " against standardization of length " +
                                               std::to_string(s.mean.size()));
  }
  return (x - s.mean).cwiseQuotient(s.scale);
}

Eigen::VectorXd augment(const Eigen::Ref<const Eigen::VectorXd>& x, Index d,
                        const DomainLayout& layout) {
  if (d < 0 || d >= layout.domains()) {
    throw Error(ErrorKind::OutOfRange, "unknown domain " + std::to_string(d));
  }
  if (x.size() != layout.features(d)) {
    throw Error(ErrorKind::LengthMismatch, "domain " + std::to_string(d) + " expects length " +
                                               std::to_string(layout.features(d)) + ", got " +
                                               std::to_string(x.size()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.total_features());
  out.segment(layout.col_offset(d), x.size()) = x;
  return out;
}

// ---------------------------------------------------------------------------
// Weight graph

namespace {

std::string describe(const WeightEntry& e) {
  std::ostringstream os;
  os << "(" << e.domain_a << "," << e.index_a << ")-(" << e.domain_b << "," << e.index_b << ")";
  return os.str();
}

void check_edges(const DomainLayout& layout, const std::vector<Edge>& sorted) {
  const Index n = layout.total_items();
  bool negative = false;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto& e = sorted[k];
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n || e.col > e.row) {
      throw Error(ErrorKind::OutOfRange, "edge (" + std::to_string(e.row) + "," +
                                             std::to_string(e.col) +
                                             ") outside the lower triangle of W");
    }
    if (!std::isfinite(e.weight)) {
      throw Error(ErrorKind::NonFinite, "non-finite weight on edge (" + std::to_string(e.row) +
                                            "," + std::to_string(e.col) + ")");
    }
    if (e.weight == 0.0) {
      throw Error(ErrorKind::InvalidArgument, "stored edge weights must be nonzero");
    }
    if (k > 0 && sorted[k - 1].row == e.row && sorted[k - 1].col == e.col) {
      throw Error(ErrorKind::DuplicateEdge, "duplicate edge (" + std::to_string(e.row) + "," +
                                                std::to_string(e.col) + ")");
    }
    negative = negative || e.weight < 0.0;
  }
  if (negative) {
    warn("weight graph has negative weights; G may lose positive definiteness");
  }
}

bool edge_order(const Edge& a, const Edge& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

}  // namespace

void validate_weights(const DomainLayout& layout, std::span<const WeightEntry> entries) {
  std::vector<Edge> edges;
  edges.reserve(entries.size());
  for (const auto& e : entries) {
    const auto in_range = [&](Index d, Index i) {
      return d >= 0 && d < layout.domains() && i >= 0 && i < layout.items(d);
    };
    if (!in_range(e.domain_a, e.index_a) || !in_range(e.domain_b, e.index_b)) {
      throw Error(ErrorKind::OutOfRange, "weight " + describe(e) + " is outside the layout");
    }
    if (!std::isfinite(e.weight)) {
      throw Error(ErrorKind::NonFinite, "weight " + describe(e) + " is not finite");
    }
    if (e.weight == 0.0) continue;
    Index a = layout.global_row(e.domain_a, e.index_a);
    Index b = layout.global_row(e.domain_b, e.index_b);
    if (a < b) std::swap(a, b);
    edges.push_back({a, b, e.weight});
  }
  std::stable_sort(edges.begin(), edges.end(), edge_order);
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (edges[k - 1].row == edges[k].row && edges[k - 1].col == edges[k].col) {
      const auto [da, ia] = layout.locate(edges[k].row);
      const auto [db, ib] = layout.locate(edges[k].col);
      throw Error(ErrorKind::DuplicateEdge,
                  "pair " + describe({da, ia, db, ib, edges[k].weight}) + " listed twice");
    }
  }
}

void validate_weights(const WeightGraph& graph) {
  auto edges = graph.edges();
  std::sort(edges.begin(), edges.end(), edge_order);
  check_edges(graph.layout(), edges);
}

WeightGraph WeightGraph::from_entries(const DomainLayout& layout,
                                      std::span<const WeightEntry> entries) {
  validate_weights(layout, entries);
  std::vector<Edge> edges;
  edges.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.weight == 0.0) continue;
    Index a = layout.global_row(e.domain_a, e.index_a);
    Index b = layout.global_row(e.domain_b, e.index_b);
    if (a < b) std::swap(a, b);
    edges.push_back({a, b, e.weight});
  }
  return from_edges(layout, std::move(edges));
}

WeightGraph WeightGraph::from_edges(const DomainLayout& layout, std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.row < e.col) std::swap(e.row, e.col);
  }
  std::erase_if(edges, [](const Edge& e) { return e.weight == 0.0; });
  std::sort(edges.begin(), edges.end(), edge_order);
  check_edges(layout, edges);

  WeightGraph g(layout);
  g.edges_ = std::move(edges);
  for (const auto& e : g.edges_) {
    g.symmetric_sum_ += (e.row == e.col ? 1.0 : 2.0) * e.weight;
  }
  return g;
}

WeightGraph WeightGraph::scaled(double factor) const {
  if (!std::isfinite(factor) || factor == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "weight scale factor must be finite and nonzero");
  }
  WeightGraph g = *this;
  for (auto& e : g.edges_) e.weight *= factor;
  g.symmetric_sum_ *= factor;
  return g;
}

WeightGraph WeightGraph::subset(const std::vector<bool>& keep) const {
  if (keep.size() != edges_.size()) {
    throw Error(ErrorKind::LengthMismatch, "edge mask length does not match edge count");
  }
  WeightGraph g(layout_);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (!keep[k]) continue;
    g.edges_.push_back(edges_[k]);
    g.symmetric_sum_ += (edges_[k].row == edges_[k].col ? 1.0 : 2.0) * edges_[k].weight;
  }
  return g;
}

WeightEntry WeightGraph::entry(Index k) const {
  const auto& e = edges_.at(static_cast<std::size_t>(k));
  const auto [da, ia] = layout_.locate(e.row);
  const auto [db, ib] = layout_.locate(e.col);
  return {da, ia, db, ib, e.weight};
}

Eigen::MatrixXd WeightGraph::dense() const {
  const Index n = layout_.total_items();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges_) {
    w(e.row, e.col) = e.weight;
    w(e.col, e.row) = e.weight;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Block data matrix

BlockDataMatrix::BlockDataMatrix(DomainLayout layout, std::vector<Eigen::MatrixXd> blocks)
    : layout_(std::move(layout)), blocks_(std::move(blocks)) {
  if (static_cast<Index>(blocks_.size()) != layout_.domains()) {
    throw Error(ErrorKind::DimensionMismatch,
                "expected " + std::to_string(layout_.domains()) + " domain blocks, got " +
                    std::to_string(blocks_.size()));
  }
  for (Index d = 0; d < layout_.domains(); ++d) {
    const auto& b = block(d);
    if (b.rows() != layout_.items(d) || b.cols() != layout_.features(d)) {
      throw Error(ErrorKind::DimensionMismatch,
                  "domain " + std::to_string(d) + " block is " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()) + ", layout expects " +
                      std::to_string(layout_.items(d)) + "x" +
                      std::to_string(layout_.features(d)));
    }
    if (!b.allFinite()) {
      throw Error(ErrorKind::NonFinite, "domain " + std::to_string(d) + " has non-finite data");
    }
  }
}

BlockDataMatrix BlockDataMatrix::from_tables(const DomainLayout& layout,
                                             std::span<const DomainTable> tables) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(tables.size());
  for (std::size_t d = 0; d < tables.size(); ++d) {
    if (tables[d].domain != static_cast<Index>(d)) {
      throw Error(ErrorKind::InvalidArgument, "tables must be ordered by domain id");
    }
    blocks.push_back(tables[d].data);
  }
  return BlockDataMatrix(layout, std::move(blocks));
}

Eigen::VectorXd BlockDataMatrix::row(Index row) const {
  const auto [d, i] = layout_.locate(row);
  return augment(block(d).row(i).transpose(), d, layout_);
}

Eigen::MatrixXd BlockDataMatrix::dense(Index max_elements) const {
  const Index n = layout_.total_items();
  const Index p = layout_.total_features();
  if (n * p > max_elements) {
    throw Error(ErrorKind::InvalidArgument,
                "dense block matrix of " + std::to_string(n) + "x" + std::to_string(p) +
                    " exceeds the " + std::to_string(max_elements) + "-element limit");
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
  for (Index d = 0; d < layout_.domains(); ++d) {
    x.block(layout_.row_offset(d), layout_.col_offset(d), layout_.items(d),
            layout_.features(d)) = block(d);
  }
  return x;
}

// ---------------------------------------------------------------------------

DegreeMatrix degree_matrix(const WeightGraph& graph) {
  DegreeMatrix m{graph.layout(), Eigen::VectorXd::Zero(graph.layout().total_items())};
  for (const auto& e : graph.edges()) {
    m.values(e.row) += e.weight;
    if (e.row != e.col) m.values(e.col) += e.weight;
  }
  return m;
}

WeightGraph mcca_weights(const Eigen::Ref<const Eigen::MatrixXd>& coupling,
                         const DomainLayout& layout) {
  const Index dcount = layout.domains();
  if (coupling.rows() != dcount || coupling.cols() != dcount) {
    throw Error(ErrorKind::DimensionMismatch, "coupling matrix must be D x D");
  }
  const Index n = layout.items(0);
  for (Index d = 1; d < dcount; ++d) {
    if (layout.items(d) != n) {
      throw Error(ErrorKind::InvalidArgument, "MCCA weights need equal item counts per domain");
    }
  }
  for (Index d = 0; d < dcount; ++d) {
    for (Index e = 0; e < dcount; ++e) {
      if (coupling(d, e) != coupling(e, d)) {
        throw Error(ErrorKind::InvalidArgument, "coupling matrix is not symmetric");
      }
      if (!(coupling(d, e) >= 0.0) || !std::isfinite(coupling(d, e))) {
        throw Error(ErrorKind::InvalidArgument, "coupling coefficients must be finite and >= 0");
      }
    }
  }
  std::vector<Edge> edges;
  for (Index d = 0; d < dcount; ++d) {
    for (Index e = 0; e <= d; ++e) {
      if (coupling(d, e) == 0.0) continue;
      for (Index i = 0; i < n; ++i) {
        edges.push_back({layout.row_offset(d) + i, layout.row_offset(e) + i, coupling(d, e)});
      }
    }
  }
  return WeightGraph::from_edges(layout, std::move(edges));
}

Eigen::MatrixXd EdgeCoding::gram() const {
  return data.transpose() * weights.asDiagonal() * data;
}

EdgeCoding edge_coding(const BlockDataMatrix& x, const WeightGraph& graph) {
  if (!(x.layout() == graph.layout())) {
    throw Error(ErrorKind::DimensionMismatch, "data and weight layouts differ");
  }
  const auto& layout = x.layout();
  EdgeCoding out{Eigen::MatrixXd::Zero(graph.edge_count(), layout.total_features()),
                 Eigen::VectorXd(graph.edge_count())};
  for (Index k = 0; k < graph.edge_count(); ++k) {
    const auto& e = graph.edges()[static_cast<std::size_t>(k)];
    const auto [da, ia] = layout.locate(e.row);
    const auto [db, ib] = layout.locate(e.col);
    out.data.row(k).segment(layout.col_offset(da), layout.features(da)) += x.block(da).row(ia);
    out.data.row(k).segment(layout.col_offset(db), layout.features(db)) += x.block(db).row(ib);
    out.weights(k) = e.row == e.col ? 0.5 * e.weight : e.weight;
  }
  return out;
}

}  // namespace cdmca
