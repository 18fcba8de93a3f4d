#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cdmca/core.hpp"
#include "cdmca/random.hpp"

namespace cdmca {

/// Latent-grid benchmark: items of every domain are noisy linear images of
/// points on a g x g grid, and items sharing a grid point are truly linked.
struct SynthConfig {
  Index grid = 5;
  std::vector<Index> features{10, 30, 100};
  std::vector<Index> replicates{5, 10, 20};  // items per grid point, per domain
  double noise = 0.5;                        // standard deviation of the additive noise
  double link_probability = 0.02;
  std::uint64_t seed = 1;

  void validate() const;
  DomainLayout layout() const;
};

struct SynthDataset {
  SynthConfig config;
  DomainLayout layout;
  Eigen::MatrixXd grid_points;            // g^2 x 2, rows (1,1), (1,2), ..., (g,g)
  std::vector<Eigen::MatrixXd> maps;      // B^d, p_d x 2
  std::vector<DomainTable> tables;        // standardized
  std::vector<std::vector<Index>> assignment;  // grid point of item (d, i)
  WeightGraph true_weights;
  WeightGraph observed_weights;

  Eigen::Vector2d latent(Index d, Index i) const;
};

/// Item i of every domain sits on grid point i mod g^2.
std::vector<std::vector<Index>> grid_assignment(const DomainLayout& layout, Index grid);

/// Unit weight between every cross-domain pair that shares a grid point.
WeightGraph true_weights(const DomainLayout& layout,
                         const std::vector<std::vector<Index>>& assignment);

/// Keeps each edge independently with probability p.
WeightGraph sample_weights(const WeightGraph& truth, double p, Rng& rng);

SynthDataset generate(const SynthConfig& cfg);

/// Lower-triangle edge counts per domain pair (d > e), as a D x D matrix.
Eigen::MatrixXi block_edge_counts(const WeightGraph& w);

/// `cdmca-synth v1` followed by `key values...` lines; enough to regenerate
/// the dataset or recover latent positions.
void write_provenance(const std::filesystem::path& path, const SynthConfig& cfg);
SynthConfig read_provenance(const std::filesystem::path& path);

}  // namespace cdmca
