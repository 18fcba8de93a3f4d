#pragma once

// Dense, brute-force reference computations used only by tests. None of these
// call into the library's solver, eval or core algebra.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd degrees(const MatrixXd& w) { return w.rowwise().sum(); }

inline MatrixXd xtmx(const MatrixXd& x, const MatrixXd& w) {
  return x.transpose() * degrees(w).asDiagonal() * x;
}

inline MatrixXd xtwx(const MatrixXd& x, const MatrixXd& w) { return x.transpose() * w * x; }

/// tr(Y^T (M - W) Y).
inline double laplacian_trace(const MatrixXd& y, const MatrixXd& w) {
  const MatrixXd lap = MatrixXd(degrees(w).asDiagonal()) - w;
  return (y.transpose() * lap * y).trace();
}

/// 1/2 sum_ij w_ij ||y_i - y_j||^2 over the full dense matrix.
inline double double_sum_error(const MatrixXd& y, const MatrixXd& w) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      s += 0.5 * w(i, j) * (y.row(i) - y.row(j)).squaredNorm();
    }
  }
  return s;
}

/// Column-wise double sums, one per component.
inline VectorXd double_sum_per_pc(const MatrixXd& y, const MatrixXd& w) {
  VectorXd out = VectorXd::Zero(y.cols());
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double d = y(i, k) - y(j, k);
        out(k) += 0.5 * w(i, j) * d * d;
      }
    }
  }
  return out;
}

/// Maximizer of v^T H v / v^T G v over `points` directions of the half circle,
/// returned G-normalized.
inline VectorXd grid_search_k1(const MatrixXd& g, const MatrixXd& h, int points) {
  double best = -std::numeric_limits<double>::infinity();
  Eigen::Vector2d arg;
  for (int t = 0; t < points; ++t) {
    const double theta = std::numbers::pi * t / points;
    const Eigen::Vector2d v(std::cos(theta), std::sin(theta));
    const double q = v.dot(h * v) / v.dot(g * v);
    if (q > best) {
      best = q;
      arg = v;
    }
  }
  return arg / std::sqrt(arg.dot(g * arg));
}

/// Angle between two lines (sign-insensitive), radians.
inline double line_angle(const VectorXd& a, const VectorXd& b) {
  const double c = std::min(1.0, std::abs(a.dot(b)) / (a.norm() * b.norm()));
  return std::acos(c);
}

/// Sample correlation matrix of the columns of raw data.
inline MatrixXd correlation(const MatrixXd& raw) {
  const MatrixXd c = raw.rowwise() - raw.colwise().mean();
  const MatrixXd cov = c.transpose() * c;
  const VectorXd sd = cov.diagonal().cwiseSqrt();
  return sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
}

struct Eig {
  VectorXd values;   // descending
  MatrixXd vectors;  // matching columns
};

inline Eig eig_desc(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

/// Laplacian-eigenmap base case: columns M^{-1/2} u_k of the top-K
/// eigenvectors of M^{-1/2} W M^{-1/2}.
inline MatrixXd normalized_adjacency_embedding(const MatrixXd& w, Eigen::Index k) {
  const VectorXd inv_sqrt = degrees(w).cwiseSqrt().cwiseInverse();
  const Eig e = eig_desc(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  return inv_sqrt.asDiagonal() * e.vectors.leftCols(k);
}

struct Cca {
  VectorXd correlations;
  MatrixXd dir1;  // p1 x r
  MatrixXd dir2;  // p2 x r
};

/// Classical CCA: QR of each centred block, SVD of Q1^T Q2.
inline Cca cca(const MatrixXd& x1, const MatrixXd& x2) {
  const MatrixXd c1 = x1.rowwise() - x1.colwise().mean();
  const MatrixXd c2 = x2.rowwise() - x2.colwise().mean();
  Eigen::HouseholderQR<MatrixXd> q1(c1), q2(c2);
  const MatrixXd thin1 = q1.householderQ() * MatrixXd::Identity(c1.rows(), c1.cols());
  const MatrixXd thin2 = q2.householderQ() * MatrixXd::Identity(c2.rows(), c2.cols());
  const MatrixXd r1 = q1.matrixQR().topRows(c1.cols()).triangularView<Eigen::Upper>();
  const MatrixXd r2 = q2.matrixQR().topRows(c2.cols()).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<MatrixXd> svd(thin1.transpose() * thin2, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index r = std::min(c1.cols(), c2.cols());
  Cca out;
  out.correlations = svd.singularValues().head(r);
  out.dir1 = r1.triangularView<Eigen::Upper>().solve(svd.matrixU().leftCols(r));
  out.dir2 = r2.triangularView<Eigen::Upper>().solve(svd.matrixV().leftCols(r));
  return out;
}

/// Spearman via explicit pairwise rank counting (O(n^2)), ties averaged.
inline double spearman_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double x : v) {
        if (x < v[i]) ++less;
        if (x == v[i]) ++equal;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) { ma += ra[i] / n; mb += rb[i] / n; }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
