#include "cdmca/crossval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "cdmca/embedding.hpp"
#include "cdmca/error.hpp"
#include "cdmca/eval.hpp"
#include "cdmca/io.hpp"
#include "cdmca/log.hpp"

namespace cdmca {

void CvConfig::validate() const {
  if (!(holdout > 0.0 && holdout < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "holdout probability must lie in (0, 1)");
  }
  if (repeats < 1) throw Error(ErrorKind::InvalidArgument, "repeats must be at least 1");
  if (gamma_grid.empty()) throw Error(ErrorKind::InvalidArgument, "gamma grid is empty");
  if (max_pcs < 1) throw Error(ErrorKind::InvalidArgument, "max PCs must be at least 1");
  if (jobs < 1) throw Error(ErrorKind::InvalidArgument, "jobs must be at least 1");
  if (max_redraws < 1) throw Error(ErrorKind::InvalidArgument, "max redraws must be at least 1");
}

HoldoutSplit holdout_split(const WeightGraph& w, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "holdout probability must lie in [0, 1)");
  }
  if (w.empty()) throw Error(ErrorKind::InvalidArgument, "cannot split an empty weight graph");
  HoldoutSplit s;
  s.mask.resize(w.edges().size());
  std::vector<bool> keep(w.edges().size());
  for (std::size_t k = 0; k < s.mask.size(); ++k) {
    s.mask[k] = rng.bernoulli(p);
    keep[k] = !s.mask[k];
    if (s.mask[k]) ++s.held_count; else ++s.retained;
  }
  s.train = w.subset(keep);
  s.held = w.subset(s.mask);
  return s;
}

namespace {

SolverConfig grid_config(const SolverConfig& base, double gamma, Index pcs) {
  SolverConfig c = base;
  c.gamma_m = gamma;
  c.k = pcs;
  return c;
}

// Per-PC errors for one gamma, or nullopt when G is singular.
std::optional<Eigen::VectorXd> fit_and_score(const BlockDataMatrix& x, const WeightGraph& w_fit,
                                             const WeightGraph& w_eval_normalized,
                                             const SolverConfig& cfg) {
  try {
    const Fit f = fit(x, w_fit, cfg);
    return per_pc_error(project(x, f.solution.projection), w_eval_normalized).per_pc;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularG) return std::nullopt;
    throw;
  }
}

}  // namespace

Eigen::MatrixXd error_curves(const BlockDataMatrix& x, const WeightGraph& w_fit,
                             const WeightGraph& w_eval, const std::vector<double>& grid,
                             const SolverConfig& base) {
  const WeightGraph eval = normalize_weights(w_eval);
  const Index pcs = std::min(base.k, x.layout().total_features());
  Eigen::MatrixXd out(static_cast<Index>(grid.size()), pcs);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto errors = fit_and_score(x, w_fit, eval, grid_config(base, grid[g], pcs));
    if (errors) {
      out.row(static_cast<Index>(g)) = errors->transpose();
    } else {
      warn("G singular at gamma_M = " + format_double(grid[g]));
      out.row(static_cast<Index>(g)).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

CvReport cv_error(const BlockDataMatrix& x, const WeightGraph& w, const CvConfig& cfg) {
  cfg.validate();
  if (w.empty()) throw Error(ErrorKind::InvalidArgument, "cross-validation needs observed edges");

  const Index pcs = std::min(cfg.max_pcs, x.layout().total_features());
  const std::size_t grid_size = cfg.gamma_grid.size();
  const auto repeats = static_cast<std::size_t>(cfg.repeats);

  SolverConfig base;
  base.gamma_w = cfg.gamma_w;
  base.regularizer_m = cfg.regularizer;
  base.regularizer_w = cfg.regularizer;

  std::vector<std::vector<std::optional<Eigen::VectorXd>>> results(
      repeats, std::vector<std::optional<Eigen::VectorXd>>(grid_size));
  std::vector<Index> held_counts(repeats, 0);
  std::vector<std::exception_ptr> failures(repeats);

  const auto run_repeat = [&](std::size_t r) {
    Rng rng(derive_seed(cfg.seed, r));
    std::optional<HoldoutSplit> split;
    for (int attempt = 0; attempt < cfg.max_redraws; ++attempt) {
      HoldoutSplit s = holdout_split(w, cfg.holdout, rng);
      if (s.retained > 0 && s.held_count > 0) {
        split = std::move(s);
        break;
      }
    }
    if (!split) {
      throw Error(ErrorKind::Degenerate,
                  "repeat " + std::to_string(r) + ": every draw left an empty training or "
                  "validation set");
    }
    held_counts[r] = split->held_count;
    const WeightGraph train = split->train.scaled(1.0 / (1.0 - cfg.holdout));
    const WeightGraph held = normalize_weights(split->held);
    for (std::size_t g = 0; g < grid_size; ++g) {
      results[r][g] = fit_and_score(x, train, held, grid_config(base, cfg.gamma_grid[g], pcs));
    }
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < repeats;) {
      try {
        run_repeat(r);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), repeats);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  CvReport rep;
  rep.gamma_grid = cfg.gamma_grid;
  rep.pcs = pcs;
  rep.mean = Eigen::MatrixXd::Zero(static_cast<Index>(grid_size), pcs);
  rep.se = Eigen::MatrixXd::Zero(static_cast<Index>(grid_size), pcs);
  rep.successes.assign(grid_size, 0);
  rep.raw.assign(grid_size, std::vector<Eigen::VectorXd>(repeats));
  rep.held_counts = held_counts;

  for (std::size_t g = 0; g < grid_size; ++g) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(pcs);
    for (std::size_t r = 0; r < repeats; ++r) {
      if (!results[r][g]) continue;
      rep.raw[g][r] = *results[r][g];
      sum += *results[r][g];
      ++rep.successes[g];
    }
    const int ok = rep.successes[g];
    if (ok < static_cast<int>(repeats) - ok) {
      throw Error(ErrorKind::SingularG,
                  "gamma_M = " + format_double(cfg.gamma_grid[g]) + ": only " +
                      std::to_string(ok) + " of " + std::to_string(repeats) +
                      " repeats could be fitted; raise gamma_M or drop it from the grid");
    }
    if (ok < static_cast<int>(repeats)) {
      warn("gamma_M = " + format_double(cfg.gamma_grid[g]) + ": " +
           std::to_string(static_cast<int>(repeats) - ok) +
           " repeats excluded because G was singular");
    }
    const Eigen::VectorXd mean = sum / static_cast<double>(ok);
    rep.mean.row(static_cast<Index>(g)) = mean.transpose();
    if (ok > 1) {
      Eigen::VectorXd ss = Eigen::VectorXd::Zero(pcs);
      for (std::size_t r = 0; r < repeats; ++r) {
        if (results[r][g]) ss += (*results[r][g] - mean).cwiseAbs2();
      }
      rep.se.row(static_cast<Index>(g)) =
          (ss / static_cast<double>(ok - 1)).cwiseSqrt().transpose() / std::sqrt(ok);
    }
  }
  return rep;
}

Index knee(const Eigen::Ref<const Eigen::VectorXd>& errors, double theta) {
  if (errors.size() == 0) return 0;
  std::vector<double> sorted(errors.data(), errors.data() + errors.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  Index k = 0;
  while (k < errors.size() && errors(k) <= theta * median) ++k;
  return k;
}

std::string Selection::describe() const {
  std::ostringstream os;
  os << "selected K=" << k << " gamma_m=" << format_double(gamma_m)
     << " rule=knee theta=" << format_double(rule.theta);
  if (!knee_found) os << " (no PC passed the knee; K defaulted to 1)";
  return os.str();
}

Selection select_hyperparams(const CvReport& report, const SelectionRule& rule) {
  if (report.mean.rows() == 0 || report.mean.cols() == 0) {
    throw Error(ErrorKind::InvalidArgument, "cannot select from an empty report");
  }
  if (!(rule.theta > 0.0)) throw Error(ErrorKind::InvalidArgument, "theta must be positive");
  Selection s;
  s.rule = rule;

  Index reference = 0;
  report.mean.col(0).minCoeff(&reference);
  s.k = knee(report.mean.row(reference).transpose(), rule.theta);
  if (s.k == 0) {
    s.k = 1;
    s.knee_found = false;
    warn("no principal component passed the knee threshold; using K = 1");
  }
  Index best = 0;
  report.mean.leftCols(s.k).rowwise().sum().minCoeff(&best);
  s.gamma_m = report.gamma_grid[static_cast<std::size_t>(best)];
  return s;
}

}  // namespace cdmca
