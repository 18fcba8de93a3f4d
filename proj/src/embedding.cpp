#include "cdmca/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "cdmca/error.hpp"

namespace cdmca {

std::string to_string(RescaleMode mode) {
  switch (mode) {
    case RescaleMode::None: return "none";
    case RescaleMode::UnitVariance: return "unit-variance";
    case RescaleMode::Weighted: return "weighted";
  }
  return "unknown";
}

RescaleMode parse_rescale(const std::string& name) {
  if (name == "none") return RescaleMode::None;
  if (name == "unit-variance") return RescaleMode::UnitVariance;
  if (name == "weighted") return RescaleMode::Weighted;
  throw Error(ErrorKind::InvalidArgument,
              "unknown rescale mode '" + name + "' (expected none, unit-variance or weighted)");
}

Eigen::VectorXd Embedding::rescaled(const Eigen::Ref<const Eigen::VectorXd>& raw) const {
  if (raw.size() != dims()) {
    throw Error(ErrorKind::LengthMismatch, "embedding vector has the wrong dimension");
  }
  return raw.cwiseProduct(factors);
}

Embedding project(const BlockDataMatrix& x, const Eigen::Ref<const Eigen::MatrixXd>& projection) {
  const auto& layout = x.layout();
  if (projection.rows() != layout.total_features()) {
    throw Error(ErrorKind::DimensionMismatch, "projection rows do not match P");
  }
  Embedding emb{layout, Eigen::MatrixXd(layout.total_items(), projection.cols()),
                RescaleMode::None, Eigen::VectorXd::Ones(projection.cols())};
  for (Index d = 0; d < layout.domains(); ++d) {
    emb.y.middleRows(layout.row_offset(d), layout.items(d)) =
        x.block(d) * projection.middleRows(layout.col_offset(d), layout.features(d));
  }
  return emb;
}

Embedding project(const Model& model, std::span<const DomainTable> raw_tables) {
  const auto& layout = model.layout;
  if (static_cast<Index>(raw_tables.size()) != layout.domains()) {
    throw Error(ErrorKind::DimensionMismatch, "expected one table per model domain");
  }
  std::vector<Eigen::MatrixXd> blocks;
  for (Index d = 0; d < layout.domains(); ++d) {
    const auto& t = raw_tables[static_cast<std::size_t>(d)];
    Eigen::MatrixXd data = t.data;
    if (const auto& s = model.standardization[static_cast<std::size_t>(d)]) {
      if (data.cols() != s->mean.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "domain " + std::to_string(d) + " has the wrong column count");
      }
      data.rowwise() -= s->mean.transpose();
      data.array().rowwise() /= s->scale.transpose().array();
    }
    blocks.push_back(std::move(data));
  }
  return project(BlockDataMatrix(layout, std::move(blocks)), model.projection);
}

Eigen::VectorXd project_vector(const Model& model, Index domain,
                               const Eigen::Ref<const Eigen::VectorXd>& raw_x) {
  if (domain < 0 || domain >= model.layout.domains()) {
    throw Error(ErrorKind::OutOfRange, "unknown domain " + std::to_string(domain));
  }
  if (raw_x.size() != model.layout.features(domain)) {
    throw Error(ErrorKind::LengthMismatch,
                "domain " + std::to_string(domain) + " expects " +
                    std::to_string(model.layout.features(domain)) + " features, got " +
                    std::to_string(raw_x.size()));
  }
  const auto& s = model.standardization[static_cast<std::size_t>(domain)];
  const Eigen::VectorXd x = s ? apply_standardization(*s, raw_x) : Eigen::VectorXd(raw_x);
  return model.projection_block(domain).transpose() * x;
}

Embedding rescale_unit_variance(const Embedding& emb) {
  Embedding out = emb;
  const double n = static_cast<double>(emb.y.rows());
  for (Index k = 0; k < emb.dims(); ++k) {
    const auto col = emb.y.col(k).array();
    const double var = (col - col.mean()).square().sum() / n;
    if (!(var > 0.0)) {
      throw Error(ErrorKind::ZeroVariance, "component " + std::to_string(k + 1) +
                                               " has zero variance and cannot be rescaled");
    }
    const double f = 1.0 / std::sqrt(var);
    out.y.col(k) *= f;
    out.factors(k) *= f;
  }
  out.rescale = RescaleMode::UnitVariance;
  return out;
}

QueryResult query_knn(const Embedding& emb, const Eigen::Ref<const Eigen::VectorXd>& query,
                      Index dims, Index top, std::span<const Index> domains) {
  if (dims < 1 || dims > emb.dims()) {
    throw Error(ErrorKind::InvalidArgument, "query dimension " + std::to_string(dims) +
                                                " not in [1, " + std::to_string(emb.dims()) + "]");
  }
  if (query.size() < dims) {
    throw Error(ErrorKind::LengthMismatch, "query vector is shorter than the query dimension");
  }
  if (top < 1) throw Error(ErrorKind::InvalidArgument, "top must be at least 1");

  const auto& layout = emb.layout;
  std::vector<Neighbor> all;
  for (Index d = 0; d < layout.domains(); ++d) {
    if (!domains.empty() && std::find(domains.begin(), domains.end(), d) == domains.end()) {
      continue;
    }
    const auto block = emb.block(d);
    for (Index i = 0; i < block.rows(); ++i) {
      const double dist = (block.row(i).head(dims).transpose() - query.head(dims)).norm();
      all.push_back({d, i, dist});
    }
  }
  if (all.empty()) {
    throw Error(ErrorKind::EmptyCandidates, "no candidates remain after domain filtering");
  }
  const auto less = [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.domain != b.domain) return a.domain < b.domain;
    return a.index < b.index;
  };
  const auto keep = std::min<std::size_t>(all.size(), static_cast<std::size_t>(top));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), less);
  all.resize(keep);
  return {std::move(all), dims};
}

}  // namespace cdmca
