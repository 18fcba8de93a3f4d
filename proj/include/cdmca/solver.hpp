#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "cdmca/core.hpp"

namespace cdmca {

enum class RegularizerKind {
  Identity,     // L = I_P
  AlphaScaled,  // L = Diag(alpha_1 I_{p_1}, ..., alpha_D I_{p_D})
  Custom,       // user-supplied block-diagonal
};

std::string to_string(RegularizerKind kind);
RegularizerKind parse_regularizer(const std::string& name);

struct SolverConfig {
  Index k = 2;
  double gamma_m = 0.1;
  double gamma_w = 0.0;
  RegularizerKind regularizer_m = RegularizerKind::AlphaScaled;
  RegularizerKind regularizer_w = RegularizerKind::AlphaScaled;
  // Per-domain p_d x p_d blocks, consulted only for RegularizerKind::Custom.
  std::vector<Eigen::MatrixXd> custom_m;
  std::vector<Eigen::MatrixXd> custom_w;
  // Eigenvalues above this count as positive.
  double zero_threshold = 1e-10;
  // Negative gamma is rejected unless explicitly allowed.
  bool allow_negative_gamma = false;

  void validate() const;
};

/// G = X^T M X + gamma_M L_M and H = X^T W X + gamma_W L_W. The unscaled
/// regularizers are kept so the objective identity can be evaluated later.
struct Pencil {
  DomainLayout layout;
  Eigen::MatrixXd g;
  Eigen::MatrixXd h;
  Eigen::MatrixXd reg_m;
  Eigen::MatrixXd reg_w;
  double gamma_m = 0.0;
  double gamma_w = 0.0;
  Eigen::VectorXd alpha;  // per-domain scales tr((X^d)^T M^d X^d) / p_d
};

enum class Factorization { Cholesky, Spectral };

struct SpectralSolution {
  Eigen::VectorXd eigenvalues;  // all P, non-increasing
  Eigen::MatrixXd projection;   // A, P x K
  Index positive_count = 0;     // eigenvalues above the zero threshold
  bool ties = false;            // a tie among the leading K+1 eigenvalues
  Factorization factorization = Factorization::Cholesky;

  Index k() const { return projection.cols(); }
};

/// alpha_d = tr((X^d)^T M^d X^d) / p_d.
Eigen::VectorXd default_regularizer_scale(const BlockDataMatrix& x, const DegreeMatrix& m);

Pencil assemble_pencil(const BlockDataMatrix& x, const WeightGraph& w, const SolverConfig& cfg);

/// Maximizes tr(A^T H A) subject to A^T G A = I_K through the whitened
/// eigenproblem of G^{-T/2} H G^{-1/2}. Each column of A is flipped so its
/// largest-magnitude entry is positive.
///
/// G^{1/2} comes from a Cholesky factor. When Cholesky fails or its smallest
/// relative pivot falls below 10 * eps * P, a spectral square root is tried
/// instead; if the smallest eigenvalue of G is also below that scale the solve
/// throws SingularG.
SpectralSolution solve(const Pencil& pencil, Index k, double zero_threshold = 1e-10);

/// max |A^T G A - I_K|.
double check_constraint(const Eigen::Ref<const Eigen::MatrixXd>& projection, const Pencil& pencil);
inline double check_constraint(const SpectralSolution& s, const Pencil& pencil) {
  return check_constraint(s.projection, pencil);
}

struct ObjectiveIdentity {
  double lhs = 0.0;  // phi(A) + tr(A^T (gamma_M L_M - gamma_W L_W) A)
  double rhs = 0.0;  // K - tr(A^T H A)
};

/// phi(A) is summed edge by edge on Y = XA; the right side only uses the
/// pencil, so agreement checks the whole chain.
ObjectiveIdentity objective_identity_check(const SpectralSolution& solution, const Pencil& pencil,
                                           const WeightGraph& w, const BlockDataMatrix& x);

/// Vertical blocks A^1, ..., A^D of A.
std::vector<Eigen::MatrixXd> split_projections(const Eigen::Ref<const Eigen::MatrixXd>& projection,
                                               const DomainLayout& layout);

struct Fit {
  Pencil pencil;
  SpectralSolution solution;
};

/// assemble_pencil followed by solve with cfg.k.
Fit fit(const BlockDataMatrix& x, const WeightGraph& w, const SolverConfig& cfg);

}  // namespace cdmca
