#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cdmca {

using Index = Eigen::Index;

/// Domain sizes and the prefix offsets that place each domain inside the
/// global N-row / P-column block structures. Domains and items are 0-based.
class DomainLayout {
 public:
  DomainLayout() = default;
  DomainLayout(std::vector<Index> features, std::vector<Index> items);

  Index domains() const { return static_cast<Index>(features_.size()); }
  Index total_features() const { return col_offsets_.back(); }  // P
  Index total_items() const { return row_offsets_.back(); }     // N

  Index features(Index d) const { return features_.at(static_cast<std::size_t>(d)); }
  Index items(Index d) const { return items_.at(static_cast<std::size_t>(d)); }
  Index col_offset(Index d) const { return col_offsets_.at(static_cast<std::size_t>(d)); }
  Index row_offset(Index d) const { return row_offsets_.at(static_cast<std::size_t>(d)); }

  const std::vector<Index>& features() const { return features_; }
  const std::vector<Index>& items() const { return items_; }

  /// Global row of item i in domain d; throws OutOfRange.
  Index global_row(Index d, Index i) const;
  /// Inverse of global_row.
  std::pair<Index, Index> locate(Index row) const;

  bool operator==(const DomainLayout&) const = default;

 private:
  std::vector<Index> features_;
  std::vector<Index> items_;
  std::vector<Index> col_offsets_{0};
  std::vector<Index> row_offsets_{0};
};

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

/// One domain's n_d x p_d data matrix; row i holds item i's features.
struct DomainTable {
  Index domain = 0;
  Eigen::MatrixXd data;
  std::optional<Standardization> standardization;
};

/// Centres every column and divides by its population standard deviation.
/// Composes with a previously recorded standardization so the stored
/// mean/scale always map raw inputs to the returned values.
DomainTable standardize_columns(const DomainTable& table);

/// Applies a recorded standardization to one raw feature vector.
Eigen::VectorXd apply_standardization(const Standardization& s,
                                      const Eigen::Ref<const Eigen::VectorXd>& x);

/// Zero-padded embedding of a domain-d vector into R^P.
Eigen::VectorXd augment(const Eigen::Ref<const Eigen::VectorXd>& x, Index d,
                        const DomainLayout& layout);

/// One weight as it appears in a file, endpoints in either orientation.
struct WeightEntry {
  Index domain_a = 0;
  Index index_a = 0;
  Index domain_b = 0;
  Index index_b = 0;
  double weight = 0.0;
};

/// A stored edge in global coordinates with row >= col. row == col is a
/// self-association (a diagonal entry of W).
struct Edge {
  Index row = 0;
  Index col = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Sparse symmetric weight matrix W stored as its lower triangle, one entry per
/// unordered pair, sorted by (row, col).
class WeightGraph {
 public:
  WeightGraph() = default;
  explicit WeightGraph(DomainLayout layout) : layout_(std::move(layout)) {}

  /// Canonicalizes orientation and validates. Zero weights are dropped, since
  /// an absent edge and a zero weight are the same thing.
  static WeightGraph from_entries(const DomainLayout& layout,
                                  std::span<const WeightEntry> entries);
  static WeightGraph from_edges(const DomainLayout& layout, std::vector<Edge> edges);

  const DomainLayout& layout() const { return layout_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }
  bool empty() const { return edges_.empty(); }

  /// Sum of all entries of the full symmetric matrix: off-diagonal edges
  /// count twice, self-associations once.
  double symmetric_sum() const { return symmetric_sum_; }

  WeightGraph scaled(double factor) const;
  /// Keeps edge k iff keep[k].
  WeightGraph subset(const std::vector<bool>& keep) const;

  WeightEntry entry(Index k) const;

  Eigen::MatrixXd dense() const;

 private:
  DomainLayout layout_;
  std::vector<Edge> edges_;
  double symmetric_sum_ = 0.0;
};

/// Checks bounds, finiteness and duplicate unordered pairs; throws
/// on the first violation.
void validate_weights(const DomainLayout& layout, std::span<const WeightEntry> entries);
void validate_weights(const WeightGraph& graph);

/// Diag(X^1, ..., X^D), held as its blocks.
class BlockDataMatrix {
 public:
  BlockDataMatrix(DomainLayout layout, std::vector<Eigen::MatrixXd> blocks);
  static BlockDataMatrix from_tables(const DomainLayout& layout,
                                     std::span<const DomainTable> tables);

  const DomainLayout& layout() const { return layout_; }
  const Eigen::MatrixXd& block(Index d) const { return blocks_.at(static_cast<std::size_t>(d)); }
  const std::vector<Eigen::MatrixXd>& blocks() const { return blocks_; }

  /// Augmented vector of the item at global row `row`.
  Eigen::VectorXd row(Index row) const;

  /// Dense N x P matrix; refuses when N*P exceeds max_elements.
  Eigen::MatrixXd dense(Index max_elements = 50'000'000) const;

 private:
  DomainLayout layout_;
  std::vector<Eigen::MatrixXd> blocks_;
};

/// diag(W 1_N).
struct DegreeMatrix {
  DomainLayout layout;
  Eigen::VectorXd values;

  auto block(Index d) const {
    return values.segment(layout.row_offset(d), layout.items(d));
  }
};

DegreeMatrix degree_matrix(const WeightGraph& graph);

/// W^{de} = c_de I_n. All domains must have the same item count. Nonzero c_dd
/// becomes a self-association on every item of domain d.
WeightGraph mcca_weights(const Eigen::Ref<const Eigen::MatrixXd>& coupling,
                         const DomainLayout& layout);

/// Rows x~_i + x~_j for each stored edge, in storage order, with the edge
/// weights on the diagonal of W_breve. A self-association is coded as 2 x~_i
/// with half its weight, which keeps X_breve^T W_breve X_breve = X^T M X + X^T W X.
struct EdgeCoding {
  Eigen::MatrixXd data;     // E x P
  Eigen::VectorXd weights;  // E

  Index edges() const { return data.rows(); }
  Eigen::MatrixXd gram() const;  // X_breve^T W_breve X_breve
};

EdgeCoding edge_coding(const BlockDataMatrix& x, const WeightGraph& graph);

}  // namespace cdmca
