#include "cdmca/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cdmca/error.hpp"
#include "cdmca/io.hpp"

namespace cdmca {

void SynthConfig::validate() const {
  if (grid < 1) throw Error(ErrorKind::InvalidArgument, "grid side must be positive");
  if (features.empty() || features.size() != replicates.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "features and replicates must be non-empty and of equal length");
  }
  for (std::size_t d = 0; d < features.size(); ++d) {
    if (features[d] < 1 || replicates[d] < 1) {
      throw Error(ErrorKind::InvalidArgument, "features and replicates must be positive");
    }
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw Error(ErrorKind::InvalidArgument, "noise must be finite and >= 0");
  }
  if (!(link_probability > 0.0 && link_probability <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "link probability must lie in (0, 1]");
  }
}

DomainLayout SynthConfig::layout() const {
  std::vector<Index> items;
  for (auto r : replicates) items.push_back(grid * grid * r);
  return DomainLayout(features, items);
}

Eigen::Vector2d SynthDataset::latent(Index d, Index i) const {
  return grid_points.row(assignment.at(static_cast<std::size_t>(d)).at(static_cast<std::size_t>(i)))
      .transpose();
}

std::vector<std::vector<Index>> grid_assignment(const DomainLayout& layout, Index grid) {
  const Index points = grid * grid;
  std::vector<std::vector<Index>> out;
  for (Index d = 0; d < layout.domains(); ++d) {
    std::vector<Index> a(static_cast<std::size_t>(layout.items(d)));
    for (Index i = 0; i < layout.items(d); ++i) a[static_cast<std::size_t>(i)] = i % points;
    out.push_back(std::move(a));
  }
  return out;
}

WeightGraph true_weights(const DomainLayout& layout,
                         const std::vector<std::vector<Index>>& assignment) {
  std::vector<Edge> edges;
  for (Index d = 0; d < layout.domains(); ++d) {
    for (Index e = 0; e < d; ++e) {
      const auto& ad = assignment[static_cast<std::size_t>(d)];
      const auto& ae = assignment[static_cast<std::size_t>(e)];
      for (Index i = 0; i < layout.items(d); ++i) {
        for (Index j = 0; j < layout.items(e); ++j) {
          if (ad[static_cast<std::size_t>(i)] == ae[static_cast<std::size_t>(j)]) {
            edges.push_back({layout.row_offset(d) + i, layout.row_offset(e) + j, 1.0});
          }
        }
      }
    }
  }
  return WeightGraph::from_edges(layout, std::move(edges));
}

WeightGraph sample_weights(const WeightGraph& truth, double p, Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "link probability must lie in (0, 1]");
  }
  std::vector<bool> keep(truth.edges().size());
  for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = rng.bernoulli(p);
  return truth.subset(keep);
}

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset ds;
  ds.config = cfg;
  ds.layout = cfg.layout();
  const Index points = cfg.grid * cfg.grid;
  ds.grid_points.resize(points, 2);
  for (Index a = 0; a < cfg.grid; ++a) {
    for (Index b = 0; b < cfg.grid; ++b) {
      ds.grid_points.row(a * cfg.grid + b) << static_cast<double>(a + 1),
          static_cast<double>(b + 1);
    }
  }
  ds.assignment = grid_assignment(ds.layout, cfg.grid);

  Rng rng(derive_seed(cfg.seed, 0));
  for (Index d = 0; d < ds.layout.domains(); ++d) {
    Eigen::MatrixXd b(ds.layout.features(d), 2);
    for (Index r = 0; r < b.rows(); ++r) {
      for (Index c = 0; c < 2; ++c) b(r, c) = rng.normal();
    }
    ds.maps.push_back(std::move(b));
  }
  for (Index d = 0; d < ds.layout.domains(); ++d) {
    const auto& b = ds.maps[static_cast<std::size_t>(d)];
    Eigen::MatrixXd x(ds.layout.items(d), ds.layout.features(d));
    for (Index i = 0; i < x.rows(); ++i) {
      const Eigen::Vector2d z = ds.latent(d, i);
      for (Index j = 0; j < x.cols(); ++j) x(i, j) = b.row(j).dot(z) + cfg.noise * rng.normal();
    }
    ds.tables.push_back(standardize_columns(DomainTable{d, std::move(x), std::nullopt}));
  }
  ds.true_weights = true_weights(ds.layout, ds.assignment);
  ds.observed_weights = sample_weights(ds.true_weights, cfg.link_probability, rng);
  return ds;
}

Eigen::MatrixXi block_edge_counts(const WeightGraph& w) {
  const auto& layout = w.layout();
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(layout.domains(), layout.domains());
  for (const auto& e : w.edges()) {
    const Index d = layout.locate(e.row).first;
    const Index f = layout.locate(e.col).first;
    counts(d, f) += 1;
  }
  return counts;
}

void write_provenance(const std::filesystem::path& path, const SynthConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  os << "cdmca-synth v1\n";
  os << "seed " << cfg.seed << '\n';
  os << "grid " << cfg.grid << '\n';
  os << "features";
  for (auto p : cfg.features) os << ' ' << p;
  os << "\nreplicates";
  for (auto r : cfg.replicates) os << ' ' << r;
  os << "\nnoise " << format_double(cfg.noise) << '\n';
  os << "link_probability " << format_double(cfg.link_probability) << '\n';
}

SynthConfig read_provenance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::string line;
  std::getline(in, line);
  if (line != "cdmca-synth v1") {
    throw Error(ErrorKind::Parse, path.string() + ": missing 'cdmca-synth v1' header");
  }
  SynthConfig cfg;
  bool seen_grid = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> values;
    for (std::string v; ls >> v;) values.push_back(v);
    const std::string where = path.string() + " key '" + key + "'";
    if (values.empty()) throw Error(ErrorKind::Parse, where + " has no value");
    if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(std::stoull(values.front()));
    } else if (key == "grid") {
      cfg.grid = static_cast<Index>(parse_integer(values.front(), where));
      seen_grid = true;
    } else if (key == "features" || key == "replicates") {
      std::vector<Index> v;
      for (const auto& s : values) v.push_back(static_cast<Index>(parse_integer(s, where)));
      (key == "features" ? cfg.features : cfg.replicates) = std::move(v);
    } else if (key == "noise") {
      cfg.noise = parse_double(values.front(), where);
    } else if (key == "link_probability") {
      cfg.link_probability = parse_double(values.front(), where);
    } else {
      throw Error(ErrorKind::Parse, path.string() + ": unknown key '" + key + "'");
    }
  }
  if (!seen_grid) throw Error(ErrorKind::Parse, path.string() + ": missing grid");
  cfg.validate();
  return cfg;
}

}  // namespace cdmca
