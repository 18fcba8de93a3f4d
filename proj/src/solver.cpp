#include "cdmca/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "cdmca/error.hpp"
#include "cdmca/log.hpp"

namespace cdmca {

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::Identity: return "identity";
    case RegularizerKind::AlphaScaled: return "alpha-scaled";
    case RegularizerKind::Custom: return "custom";
  }
  return "unknown";
}

RegularizerKind parse_regularizer(const std::string& name) {
  if (name == "identity") return RegularizerKind::Identity;
  if (name == "alpha-scaled") return RegularizerKind::AlphaScaled;
  if (name == "custom") return RegularizerKind::Custom;
  throw Error(ErrorKind::InvalidArgument,
              "unknown regularizer '" + name + "' (expected identity or alpha-scaled)");
}

void SolverConfig::validate() const {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "K must be at least 1");
  if (!std::isfinite(gamma_m) || !std::isfinite(gamma_w)) {
    throw Error(ErrorKind::InvalidArgument, "regularization coefficients must be finite");
  }
  if (!allow_negative_gamma && (gamma_m < 0.0 || gamma_w < 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "gamma_M and gamma_W must be >= 0");
  }
  if (!(zero_threshold >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "zero threshold must be >= 0");
  }
}

Eigen::VectorXd default_regularizer_scale(const BlockDataMatrix& x, const DegreeMatrix& m) {
  const auto& layout = x.layout();
  Eigen::VectorXd alpha(layout.domains());
  for (Index d = 0; d < layout.domains(); ++d) {
    // tr(X^T M X) = sum_i m_i ||x_i||^2
    alpha(d) = m.block(d).dot(x.block(d).rowwise().squaredNorm()) /
               static_cast<double>(layout.features(d));
  }
  return alpha;
}

namespace {

Eigen::MatrixXd regularizer(RegularizerKind kind, const std::vector<Eigen::MatrixXd>& custom,
                            const DomainLayout& layout, const Eigen::VectorXd& alpha) {
  const Index p = layout.total_features();
  switch (kind) {
    case RegularizerKind::Identity:
      return Eigen::MatrixXd::Identity(p, p);
    case RegularizerKind::AlphaScaled: {
      Eigen::VectorXd diag(p);
      for (Index d = 0; d < layout.domains(); ++d) {
        diag.segment(layout.col_offset(d), layout.features(d)).setConstant(alpha(d));
      }
      return diag.asDiagonal();
    }
    case RegularizerKind::Custom: {
      if (static_cast<Index>(custom.size()) != layout.domains()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "custom regularizer needs one block per domain");
      }
      Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
      for (Index d = 0; d < layout.domains(); ++d) {
        const auto& b = custom[static_cast<std::size_t>(d)];
        const Index pd = layout.features(d);
        if (b.rows() != pd || b.cols() != pd) {
          throw Error(ErrorKind::DimensionMismatch,
                      "custom regularizer block " + std::to_string(d) + " must be " +
                          std::to_string(pd) + "x" + std::to_string(pd));
        }
        if (!b.allFinite()) {
          throw Error(ErrorKind::NonFinite, "custom regularizer has non-finite entries");
        }
        l.block(layout.col_offset(d), layout.col_offset(d), pd, pd) = b;
      }
      return 0.5 * (l + l.transpose());
    }
  }
  return {};
}

}  // namespace

Pencil assemble_pencil(const BlockDataMatrix& x, const WeightGraph& w, const SolverConfig& cfg) {
  cfg.validate();
  if (!(x.layout() == w.layout())) {
    throw Error(ErrorKind::DimensionMismatch, "data and weight layouts differ");
  }
  const auto& layout = x.layout();
  const Index p = layout.total_features();
  const DegreeMatrix m = degree_matrix(w);

  Pencil out;
  out.layout = layout;
  out.gamma_m = cfg.gamma_m;
  out.gamma_w = cfg.gamma_w;
  out.alpha = default_regularizer_scale(x, m);

  // X^T M X is block diagonal.
  out.g = Eigen::MatrixXd::Zero(p, p);
  for (Index d = 0; d < layout.domains(); ++d) {
    const auto& xd = x.block(d);
    const Index off = layout.col_offset(d);
    out.g.block(off, off, xd.cols(), xd.cols()) =
        xd.transpose() * m.block(d).asDiagonal() * xd;
  }

  // X^T W X block (d, e) = (X^d)^T (W^{de} X^e); W^{de} X^e is accumulated edge by edge.
  std::map<std::pair<Index, Index>, Eigen::MatrixXd> products;
  const auto product = [&](Index d, Index e) -> Eigen::MatrixXd& {
    auto [it, inserted] = products.try_emplace({d, e});
    if (inserted) it->second = Eigen::MatrixXd::Zero(layout.items(d), layout.features(e));
    return it->second;
  };
  for (const auto& edge : w.edges()) {
    const auto [da, ia] = layout.locate(edge.row);
    const auto [db, ib] = layout.locate(edge.col);
    product(da, db).row(ia) += edge.weight * x.block(db).row(ib);
    if (edge.row != edge.col) product(db, da).row(ib) += edge.weight * x.block(da).row(ia);
  }
  out.h = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [key, t] : products) {
    const auto [d, e] = key;
    out.h.block(layout.col_offset(d), layout.col_offset(e), layout.features(d),
                layout.features(e)) = x.block(d).transpose() * t;
  }
  out.reg_m = regularizer(cfg.regularizer_m, cfg.custom_m, layout, out.alpha);
  out.reg_w = regularizer(cfg.regularizer_w, cfg.custom_w, layout, out.alpha);
  out.g += cfg.gamma_m * out.reg_m;
  out.h += cfg.gamma_w * out.reg_w;
  out.g = 0.5 * (out.g + out.g.transpose()).eval();
  out.h = 0.5 * (out.h + out.h.transpose()).eval();

  if (!out.g.allFinite() || !out.h.allFinite()) {
    throw Error(ErrorKind::NonFinite, "pencil has non-finite entries");
  }
  const Eigen::VectorXd net = (cfg.gamma_m * out.reg_m - cfg.gamma_w * out.reg_w).diagonal();
  if ((net.array() < 0.0).any()) {
    warn("gamma_W L_W exceeds gamma_M L_M on the diagonal; the regularization term is not "
         "nonnegative definite");
  }
  return out;
}

namespace {

struct Whitening {
  Eigen::MatrixXd whitened;     // G^{-T/2} H G^{-1/2}
  Eigen::MatrixXd inverse_root; // G^{-1/2}
  Factorization kind;
};

Whitening whiten(const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
  const Index p = g.rows();
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = 10.0 * eps * static_cast<double>(std::max<Index>(p, 1));
  const double scale = std::max(g.diagonal().cwiseAbs().maxCoeff(),
                                std::numeric_limits<double>::min());

  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd l = llt.matrixL();
    const double pivot = l.diagonal().array().square().minCoeff();
    if (pivot > tol * scale) {
      // G^{1/2} = L^T, so G^{-1/2} = L^{-T}.
      Eigen::MatrixXd inv_l = l.triangularView<Eigen::Lower>().solve(
          Eigen::MatrixXd::Identity(p, p));
      Eigen::MatrixXd c = inv_l * h * inv_l.transpose();
      return {0.5 * (c + c.transpose()), inv_l.transpose(), Factorization::Cholesky};
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularG, "eigendecomposition of G did not converge");
  }
  const Eigen::VectorXd lam = es.eigenvalues();
  const double top = std::max(std::abs(lam(p - 1)), std::numeric_limits<double>::min());
  if (!(lam(0) > tol * top)) {
    throw Error(ErrorKind::SingularG,
                "G is not positive definite (smallest eigenvalue " + std::to_string(lam(0)) +
                    ", largest " + std::to_string(lam(p - 1)) +
                    "); increase gamma_M or check for items without links");
  }
  // G^{1/2} = Lambda^{1/2} V^T, so G^{-1/2} = V Lambda^{-1/2}.
  Eigen::MatrixXd inv_root = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::MatrixXd c = inv_root.transpose() * h * inv_root;
  return {0.5 * (c + c.transpose()), inv_root, Factorization::Spectral};
}

}  // namespace

SpectralSolution solve(const Pencil& pencil, Index k, double zero_threshold) {
  const Index p = pencil.g.rows();
  if (pencil.g.cols() != p || pencil.h.rows() != p || pencil.h.cols() != p || p == 0) {
    throw Error(ErrorKind::DimensionMismatch, "pencil matrices must be square and conformable");
  }
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "K must be at least 1");
  if (k > p) {
    throw Error(ErrorKind::InvalidArgument,
                "K = " + std::to_string(k) + " exceeds P = " + std::to_string(p));
  }

  const Whitening w = [&] {
    try {
      return whiten(pencil.g, pencil.h);
    } catch (const Error& e) {
      // Name domains whose whole diagonal block of G vanished, the usual cause.
      std::string empty;
      const auto& layout = pencil.layout;
      if (layout.total_features() == p) {
        for (Index d = 0; d < layout.domains(); ++d) {
          const Index off = layout.col_offset(d), pd = layout.features(d);
          if (pencil.g.block(off, off, pd, pd).isZero(0.0)) {
            empty += (empty.empty() ? "" : ", ") + std::to_string(d);
          }
        }
      }
      if (empty.empty()) throw;
      throw Error(ErrorKind::SingularG,
                  std::string(e.what()) + "; domain(s) " + empty +
                      " have no linked items and no regularization (the alpha-scaled "
                      "regularizer is zero there; use the identity regularizer)");
    }
  }();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.whitened);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidArgument, "whitened eigenproblem did not converge");
  }

  SpectralSolution out;
  out.factorization = w.kind;
  out.eigenvalues = es.eigenvalues().reverse();
  const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse().leftCols(k);
  out.projection = w.inverse_root * u;

  for (Index c = 0; c < k; ++c) {
    Index arg = 0;
    out.projection.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.projection(arg, c) < 0.0) out.projection.col(c) *= -1.0;
  }
  out.positive_count = (out.eigenvalues.array() > zero_threshold).count();
  for (Index c = 0; c < std::min(k, p - 1); ++c) {
    if (std::abs(out.eigenvalues(c) - out.eigenvalues(c + 1)) <= 1e-12) out.ties = true;
  }
  return out;
}

double check_constraint(const Eigen::Ref<const Eigen::MatrixXd>& projection, const Pencil& pencil) {
  const Eigen::MatrixXd gram = projection.transpose() * pencil.g * projection;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

ObjectiveIdentity objective_identity_check(const SpectralSolution& solution, const Pencil& pencil,
                                           const WeightGraph& w, const BlockDataMatrix& x) {
  const auto& layout = x.layout();
  const auto& a = solution.projection;
  const auto blocks = split_projections(a, layout);

  // phi = 1/2 sum_ij w_ij ||y_i - y_j||^2; each stored off-diagonal edge stands for two terms.
  double phi = 0.0;
  for (const auto& e : w.edges()) {
    if (e.row == e.col) continue;
    const auto [da, ia] = layout.locate(e.row);
    const auto [db, ib] = layout.locate(e.col);
    const Eigen::VectorXd yi = blocks[static_cast<std::size_t>(da)].transpose() *
                               x.block(da).row(ia).transpose();
    const Eigen::VectorXd yj = blocks[static_cast<std::size_t>(db)].transpose() *
                               x.block(db).row(ib).transpose();
    phi += e.weight * (yi - yj).squaredNorm();
  }
  const Eigen::MatrixXd net = pencil.gamma_m * pencil.reg_m - pencil.gamma_w * pencil.reg_w;
  const double reg = (a.transpose() * net * a).trace();
  const double h = (a.transpose() * pencil.h * a).trace();
  return {phi + reg, static_cast<double>(a.cols()) - h};
}

std::vector<Eigen::MatrixXd> split_projections(const Eigen::Ref<const Eigen::MatrixXd>& projection,
                                               const DomainLayout& layout) {
  if (projection.rows() != layout.total_features()) {
    throw Error(ErrorKind::DimensionMismatch,
                "projection has " + std::to_string(projection.rows()) + " rows, layout needs " +
                    std::to_string(layout.total_features()));
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(layout.domains()));
  for (Index d = 0; d < layout.domains(); ++d) {
    out.emplace_back(projection.middleRows(layout.col_offset(d), layout.features(d)));
  }
  return out;
}

Fit fit(const BlockDataMatrix& x, const WeightGraph& w, const SolverConfig& cfg) {
  Pencil pencil = assemble_pencil(x, w, cfg);
  SpectralSolution solution = solve(pencil, cfg.k, cfg.zero_threshold);
  return {std::move(pencil), std::move(solution)};
}

}  // namespace cdmca
