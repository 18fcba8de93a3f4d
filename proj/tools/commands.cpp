#include "commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "cdmca/core.hpp"
#include "cdmca/crossval.hpp"
#include "cdmca/embedding.hpp"
#include "cdmca/error.hpp"
#include "cdmca/eval.hpp"
#include "cdmca/io.hpp"
#include "cdmca/model.hpp"
#include "cdmca/solver.hpp"
#include "cdmca/synth.hpp"
#include "manifest.hpp"

namespace cdmca::cli {
namespace fs = std::filesystem;

namespace {

struct LoadedData {
  DomainLayout layout;
  std::vector<DomainTable> tables;
};

// Shapes come from the files themselves; the strict loader then checks them.
LoadedData load_data(const std::vector<std::string>& paths) {
  if (paths.empty()) throw Error(ErrorKind::InvalidArgument, "--data needs at least one file");
  std::vector<Eigen::MatrixXd> raw;
  std::vector<Index> p, n;
  for (const auto& path : paths) {
    raw.push_back(read_matrix_csv(path));
    if (raw.back().size() == 0) throw Error(ErrorKind::Parse, "'" + path + "' holds no data");
    n.push_back(raw.back().rows());
    p.push_back(raw.back().cols());
  }
  LoadedData out{DomainLayout(p, n), {}};
  for (std::size_t d = 0; d < raw.size(); ++d) {
    out.tables.push_back(DomainTable{static_cast<Index>(d), std::move(raw[d]), std::nullopt});
  }
  return out;
}

LoadedData load_data_for(const Model& model, const std::vector<std::string>& paths) {
  if (static_cast<Index>(paths.size()) != model.layout.domains()) {
    throw Error(ErrorKind::InvalidArgument,
                "model has " + std::to_string(model.layout.domains()) + " domains but " +
                    std::to_string(paths.size()) + " data files were given");
  }
  LoadedData out{model.layout, {}};
  for (std::size_t d = 0; d < paths.size(); ++d) {
    out.tables.push_back(load_domain_table(paths[d], static_cast<Index>(d), model.layout));
  }
  return out;
}

std::vector<DomainTable> standardized(const std::vector<DomainTable>& tables) {
  std::vector<DomainTable> out;
  for (const auto& t : tables) out.push_back(standardize_columns(t));
  return out;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return os;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

Embedding apply_rescale(Embedding emb, RescaleMode mode, const WeightGraph* w) {
  switch (mode) {
    case RescaleMode::None: return emb;
    case RescaleMode::UnitVariance: return rescale_unit_variance(emb);
    case RescaleMode::Weighted:
      if (!w) throw Error(ErrorKind::InvalidArgument, "weighted rescale needs --weights");
      return weighted_rescale(emb, *w);
  }
  return emb;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string out = "simulated";
  std::uint64_t seed = 1;
  Index grid = 5;
  std::vector<Index> features{10, 30, 100};
  std::vector<Index> replicates{5, 10, 20};
  double noise = 0.5;
  double link_probability = 0.02;
};

void cmd_simulate(const SimulateArgs& a) {
  RunManifest manifest("simulate");
  SynthConfig cfg;
  cfg.seed = a.seed;
  cfg.grid = a.grid;
  cfg.features = a.features;
  cfg.replicates = a.replicates;
  cfg.noise = a.noise;
  cfg.link_probability = a.link_probability;
  const SynthDataset ds = generate(cfg);

  const fs::path dir = a.out;
  ensure_dir(dir);
  manifest.config("seed", std::to_string(cfg.seed));
  manifest.config("grid", std::to_string(cfg.grid));
  manifest.config("noise", format_double(cfg.noise));
  manifest.config("link_probability", format_double(cfg.link_probability));
  for (Index d = 0; d < ds.layout.domains(); ++d) {
    const auto path = dir / ("domain_" + std::to_string(d) + ".csv");
    write_domain_table(path, ds.tables[static_cast<std::size_t>(d)]);
    manifest.output(path);
  }
  write_weights(dir / "weights_true.csv", ds.true_weights);
  write_weights(dir / "weights_observed.csv", ds.observed_weights);
  write_provenance(dir / "provenance.txt", cfg);
  manifest.output(dir / "weights_true.csv");
  manifest.output(dir / "weights_observed.csv");
  manifest.output(dir / "provenance.txt");
  manifest.write(dir);

  const auto counts = block_edge_counts(ds.observed_weights);
  std::cerr << "simulated N=" << ds.layout.total_items() << " P=" << ds.layout.total_features()
            << " true edges=" << ds.true_weights.edge_count()
            << " observed edges=" << ds.observed_weights.edge_count() << " (";
  bool first = true;
  for (Index d = 0; d < counts.rows(); ++d) {
    for (Index e = 0; e < d; ++e) {
      std::cerr << (first ? "" : ", ") << "W" << d << e << "=" << counts(d, e);
      first = false;
    }
  }
  std::cerr << ")\n";
}

// ---------------------------------------------------------------------------

struct SolverArgs {
  double gamma_m = 0.1;
  double gamma_w = 0.0;
  std::string regularizer = "alpha-scaled";
};

struct FitArgs {
  std::vector<std::string> data;
  std::string weights;
  std::optional<Index> k;
  SolverArgs solver;
  bool no_standardize = false;
  std::string out = "fit";
};

void cmd_fit(const FitArgs& a) {
  RunManifest manifest("fit");
  const LoadedData raw = load_data(a.data);
  const Index p = raw.layout.total_features();
  const Index k = a.k.value_or(p);
  if (k < 1 || k > p) {
    throw Error(ErrorKind::InvalidArgument,
                "--k " + std::to_string(k) + " must lie in [1, P = " + std::to_string(p) + "]");
  }
  if (!fs::exists(a.weights)) {
    throw Error(ErrorKind::Io, "weight file '" + a.weights + "' does not exist");
  }
  const auto tables = a.no_standardize ? raw.tables : standardized(raw.tables);
  const WeightGraph w = load_weights(a.weights, raw.layout);
  const BlockDataMatrix x = BlockDataMatrix::from_tables(raw.layout, tables);

  SolverConfig cfg;
  cfg.k = k;
  cfg.gamma_m = a.solver.gamma_m;
  cfg.gamma_w = a.solver.gamma_w;
  cfg.regularizer_m = cfg.regularizer_w = parse_regularizer(a.solver.regularizer);

  Fit f = [&] {
    try {
      return fit(x, w, cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularG) throw;
      throw Error(ErrorKind::SingularG,
                  std::string(e.what()) + " (try a larger --gamma-m, e.g. 0.1)");
    }
  }();

  const fs::path dir = a.out;
  ensure_dir(dir);
  manifest.config("k", std::to_string(k));
  manifest.config("gamma_m", format_double(cfg.gamma_m));
  manifest.config("gamma_w", format_double(cfg.gamma_w));
  manifest.config("regularizer", to_string(cfg.regularizer_m));
  manifest.config("standardize", a.no_standardize ? "false" : "true");
  for (const auto& d : a.data) manifest.input(d);
  manifest.input(a.weights);

  save_model(dir / "model.txt", make_model(tables, f, cfg));
  {
    auto os = open_csv(dir / "eigenvalues.csv");
    os << "k,lambda\n";
    for (Index i = 0; i < f.solution.eigenvalues.size(); ++i) {
      os << i + 1 << ',' << format_double(f.solution.eigenvalues(i)) << '\n';
    }
  }
  manifest.output(dir / "model.txt");
  manifest.output(dir / "eigenvalues.csv");
  manifest.write(dir);

  std::cerr << "fitted P=" << p << " K=" << k << " positive eigenvalues="
            << f.solution.positive_count << " constraint residual="
            << check_constraint(f.solution, f.pencil) << '\n';
  if (f.solution.ties) std::cerr << "note: tied eigenvalues among the leading components\n";
}

// ---------------------------------------------------------------------------

struct TransformArgs {
  std::string model;
  std::vector<std::string> data;
  std::string rescale = "none";
  std::string weights;
  std::string out = "transform";
};

void cmd_transform(const TransformArgs& a) {
  RunManifest manifest("transform");
  const Model model = load_model(a.model);
  const LoadedData raw = load_data_for(model, a.data);
  std::optional<WeightGraph> w;
  if (!a.weights.empty()) w = load_weights(a.weights, model.layout);
  const Embedding emb =
      apply_rescale(project(model, raw.tables), parse_rescale(a.rescale), w ? &*w : nullptr);

  const fs::path dir = a.out;
  ensure_dir(dir);
  manifest.config("rescale", a.rescale);
  manifest.input(a.model);
  for (const auto& d : a.data) manifest.input(d);
  if (w) manifest.input(a.weights);
  {
    auto os = open_csv(dir / "transform.csv");
    os << "domain,index";
    for (Index k = 0; k < emb.dims(); ++k) os << ",y_" << k + 1;
    os << '\n';
    for (Index d = 0; d < model.layout.domains(); ++d) {
      const auto block = emb.block(d);
      for (Index i = 0; i < block.rows(); ++i) {
        os << d << ',' << i;
        for (Index k = 0; k < emb.dims(); ++k) os << ',' << format_double(block(i, k));
        os << '\n';
      }
    }
  }
  manifest.output(dir / "transform.csv");
  manifest.write(dir);
}

// ---------------------------------------------------------------------------

struct QueryArgs {
  std::string model;
  std::vector<std::string> data;
  Index domain = 0;
  Index index = 0;
  std::optional<Index> dims;
  std::optional<Index> top;
  std::vector<Index> domains;
  std::string rescale = "unit-variance";
  std::string truth;
  std::string out = "query";
};

void cmd_query(const QueryArgs& a) {
  RunManifest manifest("query");
  const Model model = load_model(a.model);
  const LoadedData raw = load_data_for(model, a.data);
  const Embedding emb = apply_rescale(project(model, raw.tables), parse_rescale(a.rescale), nullptr);
  const Index row = model.layout.global_row(a.domain, a.index);
  const Index dims = a.dims.value_or(emb.dims());
  const Index top = a.top.value_or(model.layout.total_items());
  const QueryResult result =
      query_knn(emb, emb.y.row(row).transpose(), dims, top, a.domains);

  Eigen::MatrixXd grid_points;
  std::vector<std::vector<Index>> assignment;
  if (!a.truth.empty()) {
    const SynthConfig cfg = read_provenance(a.truth);
    if (!(cfg.layout().items() == model.layout.items())) {
      throw Error(ErrorKind::DimensionMismatch,
                  "provenance item counts do not match the model layout");
    }
    assignment = grid_assignment(model.layout, cfg.grid);
    grid_points.resize(cfg.grid * cfg.grid, 2);
    for (Index r = 0; r < cfg.grid; ++r) {
      for (Index c = 0; c < cfg.grid; ++c) grid_points.row(r * cfg.grid + c) << r + 1.0, c + 1.0;
    }
  }
  const auto latent = [&](Index d, Index i) -> Eigen::Vector2d {
    return grid_points.row(assignment[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)])
        .transpose();
  };

  const fs::path dir = a.out;
  ensure_dir(dir);
  manifest.config("domain", std::to_string(a.domain));
  manifest.config("index", std::to_string(a.index));
  manifest.config("dims", std::to_string(dims));
  manifest.config("top", std::to_string(top));
  manifest.config("rescale", a.rescale);
  manifest.input(a.model);
  for (const auto& d : a.data) manifest.input(d);
  if (!a.truth.empty()) manifest.input(a.truth);
  {
    auto os = open_csv(dir / "query.csv");
    os << "rank,domain,index,distance" << (a.truth.empty() ? "" : ",truth") << '\n';
    for (std::size_t r = 0; r < result.neighbors.size(); ++r) {
      const auto& nb = result.neighbors[r];
      os << r + 1 << ',' << nb.domain << ',' << nb.index << ',' << format_double(nb.distance);
      if (!a.truth.empty()) {
        os << ',' << format_double((latent(nb.domain, nb.index) - latent(a.domain, a.index)).norm());
      }
      os << '\n';
    }
  }
  manifest.output(dir / "query.csv");
  manifest.write(dir);
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::vector<std::string> data;
  std::vector<std::string> weights;
  std::string rescale = "none";
  std::string out = "eval";
};

void cmd_eval(const EvalArgs& a) {
  RunManifest manifest("eval");
  const Model model = load_model(a.model);
  const LoadedData raw = load_data_for(model, a.data);
  const Embedding base = project(model, raw.tables);
  const RescaleMode mode = parse_rescale(a.rescale);

  const fs::path dir = a.out;
  ensure_dir(dir);
  manifest.config("rescale", a.rescale);
  manifest.input(a.model);
  for (const auto& d : a.data) manifest.input(d);
  for (const auto& wpath : a.weights) {
    const WeightGraph w = normalize_weights(load_weights(wpath, model.layout));
    const ErrorReport report = per_pc_error(apply_rescale(base, mode, &w), w);
    const auto out = dir / ("eval_" + fs::path(wpath).stem().string() + ".csv");
    auto os = open_csv(out);
    os << "pc,error\n";
    for (Index k = 0; k < report.per_pc.size(); ++k) {
      os << k + 1 << ',' << format_double(report.per_pc(k)) << '\n';
    }
    manifest.input(wpath);
    manifest.output(out);
  }
  manifest.write(dir);
}

// ---------------------------------------------------------------------------

struct CvArgs {
  std::vector<std::string> data;
  std::string weights;
  std::string true_weights;
  std::vector<double> grid{0.0, 0.001, 0.01, 0.1, 1.0};
  double holdout = 0.1;
  int repeats = 30;
  Index max_pcs = 10;
  std::uint64_t seed = 1;
  int jobs = 1;
  double gamma_w = 0.0;
  std::string regularizer = "alpha-scaled";
  double theta = 0.5;
  bool no_standardize = false;
  std::string out = "cv";
};

void write_curves(const fs::path& path, const std::vector<double>& grid,
                  const Eigen::MatrixXd& curves) {
  auto os = open_csv(path);
  os << "gamma_m,pc,error\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (Index k = 0; k < curves.cols(); ++k) {
      os << format_double(grid[g]) << ',' << k + 1 << ','
         << format_double(curves(static_cast<Index>(g), k)) << '\n';
    }
  }
}

void cmd_cv(const CvArgs& a) {
  RunManifest manifest("cv");
  const LoadedData raw = load_data(a.data);
  const auto tables = a.no_standardize ? raw.tables : standardized(raw.tables);
  const WeightGraph w = load_weights(a.weights, raw.layout);
  const BlockDataMatrix x = BlockDataMatrix::from_tables(raw.layout, tables);

  CvConfig cfg;
  cfg.holdout = a.holdout;
  cfg.repeats = a.repeats;
  cfg.gamma_grid = a.grid;
  cfg.gamma_w = a.gamma_w;
  cfg.regularizer = parse_regularizer(a.regularizer);
  cfg.max_pcs = a.max_pcs;
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;
  const CvReport report = cv_error(x, w, cfg);
  const Selection sel = select_hyperparams(report, SelectionRule{a.theta});

  SolverConfig base;
  base.k = report.pcs;
  base.gamma_w = cfg.gamma_w;
  base.regularizer_m = base.regularizer_w = cfg.regularizer;

  const fs::path dir = a.out;
  ensure_dir(dir);
  std::vector<std::string> grid_text;
  for (double g : a.grid) grid_text.push_back(format_double(g));
  manifest.config("grid", join(grid_text));
  manifest.config("holdout", format_double(cfg.holdout));
  manifest.config("repeats", std::to_string(cfg.repeats));
  manifest.config("max_pcs", std::to_string(cfg.max_pcs));
  manifest.config("seed", std::to_string(cfg.seed));
  manifest.config("gamma_w", format_double(cfg.gamma_w));
  manifest.config("regularizer", to_string(cfg.regularizer));
  manifest.config("selection_rule", "knee");
  manifest.config("theta", format_double(a.theta));
  for (const auto& d : a.data) manifest.input(d);
  manifest.input(a.weights);
  {
    auto os = open_csv(dir / "cv.csv");
    os << "gamma_m,pc,mean_error,se_error\n";
    for (std::size_t g = 0; g < report.gamma_grid.size(); ++g) {
      for (Index k = 0; k < report.pcs; ++k) {
        os << format_double(report.gamma_grid[g]) << ',' << k + 1 << ','
           << format_double(report.mean(static_cast<Index>(g), k)) << ','
           << format_double(report.se(static_cast<Index>(g), k)) << '\n';
      }
    }
  }
  manifest.output(dir / "cv.csv");

  write_curves(dir / "fitting_error.csv", a.grid, error_curves(x, w, w, a.grid, base));
  manifest.output(dir / "fitting_error.csv");
  if (!a.true_weights.empty()) {
    const WeightGraph truth = load_weights(a.true_weights, raw.layout);
    write_curves(dir / "true_error.csv", a.grid, error_curves(x, w, truth, a.grid, base));
    manifest.input(a.true_weights);
    manifest.output(dir / "true_error.csv");
  }
  {
    auto os = open_csv(dir / "selection.txt");
    os << sel.describe() << '\n';
  }
  manifest.output(dir / "selection.txt");
  manifest.write(dir);
  std::cerr << sel.describe() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Cross-domain matching correlation analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate the latent-grid benchmark data");
  s->add_option("--out", sim.out, "Output directory")->capture_default_str();
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--grid", sim.grid, "Grid side length")->capture_default_str();
  s->add_option("--features", sim.features, "Feature count per domain")->delimiter(',');
  s->add_option("--replicates", sim.replicates, "Items per grid point per domain")->delimiter(',');
  s->add_option("--noise", sim.noise, "Noise standard deviation")->capture_default_str();
  s->add_option("--link-prob", sim.link_probability, "Probability of observing a true link")
      ->capture_default_str();

  const auto add_solver = [](CLI::App* c, SolverArgs& sa) {
    c->add_option("--gamma-m", sa.gamma_m, "Regularization on G")->capture_default_str();
    c->add_option("--gamma-w", sa.gamma_w, "Regularization on H")->capture_default_str();
    c->add_option("--regularizer", sa.regularizer, "identity or alpha-scaled")
        ->check(CLI::IsMember({"identity", "alpha-scaled"}))
        ->capture_default_str();
  };

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "Fit the projections and write a model");
  f->add_option("--data", fa.data, "Domain CSV files, in domain order")->delimiter(',')->required();
  f->add_option("--weights", fa.weights, "Weight CSV file")->required();
  f->add_option("--k", fa.k, "Common-space dimension (default P)");
  add_solver(f, fa.solver);
  f->add_flag("--no-standardize", fa.no_standardize, "Use the data columns as given");
  f->add_option("--out", fa.out, "Output directory")->capture_default_str();

  TransformArgs ta;
  auto* t = app.add_subcommand("transform", "Project data into the common space");
  t->add_option("--model", ta.model, "Model file")->required();
  t->add_option("--data", ta.data, "Domain CSV files")->delimiter(',')->required();
  t->add_option("--rescale", ta.rescale, "none, unit-variance or weighted")->capture_default_str();
  t->add_option("--weights", ta.weights, "Weight file for weighted rescaling");
  t->add_option("--out", ta.out, "Output directory")->capture_default_str();

  QueryArgs qa;
  auto* q = app.add_subcommand("query", "Rank items by common-space distance to one item");
  q->add_option("--model", qa.model, "Model file")->required();
  q->add_option("--data", qa.data, "Domain CSV files")->delimiter(',')->required();
  q->add_option("--domain", qa.domain, "Query domain (0-based)")->required();
  q->add_option("--index", qa.index, "Query item index (0-based)")->required();
  q->add_option("--dims", qa.dims, "Leading components used for distances (default K)");
  q->add_option("--top", qa.top, "Number of results (default all)");
  q->add_option("--filter-domains", qa.domains, "Candidate domains")->delimiter(',');
  q->add_option("--rescale", qa.rescale, "none or unit-variance")->capture_default_str();
  q->add_option("--truth", qa.truth, "Provenance file; adds latent distances");
  q->add_option("--out", qa.out, "Output directory")->capture_default_str();

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Per-PC matching error against weight files");
  e->add_option("--model", ea.model, "Model file")->required();
  e->add_option("--data", ea.data, "Domain CSV files")->delimiter(',')->required();
  e->add_option("--weights", ea.weights, "Weight files (observed, true, held-out, ...)")
      ->delimiter(',')
      ->required();
  e->add_option("--rescale", ea.rescale, "none, unit-variance or weighted")->capture_default_str();
  e->add_option("--out", ea.out, "Output directory")->capture_default_str();

  CvArgs ca;
  auto* c = app.add_subcommand("cv", "Weight-resampling cross-validation over gamma_M");
  c->add_option("--data", ca.data, "Domain CSV files")->delimiter(',')->required();
  c->add_option("--weights", ca.weights, "Observed weight file")->required();
  c->add_option("--true-weights", ca.true_weights, "True weight file; writes true_error.csv");
  c->add_option("--grid", ca.grid, "gamma_M grid")->delimiter(',');
  c->add_option("--holdout", ca.holdout, "Held-out edge probability")->capture_default_str();
  c->add_option("--repeats", ca.repeats, "Number of repeats")->capture_default_str();
  c->add_option("--max-pcs", ca.max_pcs, "Components reported")->capture_default_str();
  c->add_option("--seed", ca.seed, "Master seed")->capture_default_str();
  c->add_option("--jobs", ca.jobs, "Worker threads")->capture_default_str();
  c->add_option("--gamma-w", ca.gamma_w, "Regularization on H")->capture_default_str();
  c->add_option("--regularizer", ca.regularizer, "identity or alpha-scaled")
      ->check(CLI::IsMember({"identity", "alpha-scaled"}))
      ->capture_default_str();
  c->add_option("--theta", ca.theta, "Knee threshold factor")->capture_default_str();
  c->add_flag("--no-standardize", ca.no_standardize, "Use the data columns as given");
  c->add_option("--out", ca.out, "Output directory")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(err) == 0 ? 0 : 2;
  }

  try {
    if (*s) cmd_simulate(sim);
    else if (*f) cmd_fit(fa);
    else if (*t) cmd_transform(ta);
    else if (*q) cmd_query(qa);
    else if (*e) cmd_eval(ea);
    else if (*c) cmd_cv(ca);
  } catch (const Error& err) {
    std::cerr << "error: " << to_string(err.kind()) << ": " << err.what() << '\n';
    return err.kind() == ErrorKind::InvalidArgument ? 2 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace cdmca::cli
