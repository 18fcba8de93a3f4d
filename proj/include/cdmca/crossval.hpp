#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdmca/core.hpp"
#include "cdmca/random.hpp"
#include "cdmca/solver.hpp"

namespace cdmca {

struct CvConfig {
  double holdout = 0.1;
  int repeats = 30;
  std::vector<double> gamma_grid{0.0, 0.001, 0.01, 0.1, 1.0};
  double gamma_w = 0.0;
  RegularizerKind regularizer = RegularizerKind::AlphaScaled;
  Index max_pcs = 10;
  std::uint64_t seed = 1;
  int jobs = 1;
  int max_redraws = 100;

  void validate() const;
};

struct HoldoutSplit {
  WeightGraph train;
  WeightGraph held;
  std::vector<bool> mask;  // true = held out, indexed like W's stored edges
  Index retained = 0;
  Index held_count = 0;
};

/// Independent Bernoulli(p) draw per stored edge. p must lie in [0, 1).
HoldoutSplit holdout_split(const WeightGraph& w, double p, Rng& rng);

/// Per-PC errors phi_k(A(W_fit, gamma), normalize(W_eval)) on raw fitted
/// coordinates, for each gamma in the grid. Rows are grid points. A grid
/// point whose fit fails with SingularG yields a row of NaN.
Eigen::MatrixXd error_curves(const BlockDataMatrix& x, const WeightGraph& w_fit,
                             const WeightGraph& w_eval, const std::vector<double>& grid,
                             const SolverConfig& base);

struct CvReport {
  std::vector<double> gamma_grid;
  Index pcs = 0;
  Eigen::MatrixXd mean;      // grid x pcs
  Eigen::MatrixXd se;        // grid x pcs, sample sd / sqrt(successes); 0 with one success
  std::vector<int> successes;  // per grid point
  // raw[g][r] holds per-PC errors of repeat r, or is empty when that fit failed.
  std::vector<std::vector<Eigen::VectorXd>> raw;
  std::vector<Index> held_counts;  // per repeat
};

CvReport cv_error(const BlockDataMatrix& x, const WeightGraph& w, const CvConfig& cfg);

struct SelectionRule {
  double theta = 0.5;
};

struct Selection {
  Index k = 1;
  double gamma_m = 0.0;
  bool knee_found = true;
  std::string describe() const;
  SelectionRule rule;
};

/// Knee rule: PC k is accepted while its mean error is at most theta times the
/// median mean error over all reported PCs. The knee is read off the grid
/// point with the smallest PC1 error; gamma_M then minimizes the summed mean
/// error of PCs 1..K.
Selection select_hyperparams(const CvReport& report, const SelectionRule& rule = {});

/// Largest k such that errors[0..k) all pass the knee threshold (0 if none).
Index knee(const Eigen::Ref<const Eigen::VectorXd>& errors, double theta);

}  // namespace cdmca
