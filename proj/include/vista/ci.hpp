#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vista/synth.hpp"

namespace vista {

class SingularCovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CiTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;
};

/// CI predicate: independent?(x, y, Z). Must be pure; all_markov_blankets may
/// call it from several threads.
using CiPredicate = std::function<bool(int, int, const std::vector<int>&)>;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Partial correlation of columns x, y given Z via precision-matrix inversion
/// of the (|Z|+2)-submatrix of the sample correlation matrix. Result clamped
/// to [-1 + 1e-12, 1 - 1e-12].
inline double partial_correlation(const DataMatrix& data, int x, int y,
                                  const std::vector<int>& z) {
  const int n_cols = static_cast<int>(data.cols());
  const auto check = [&](int c) {
    if (c < 0 || c >= n_cols) throw std::out_of_range("partial_correlation: column out of range");
  };
  check(x);
  check(y);
  if (x == y) throw std::invalid_argument("partial_correlation: x == y");
  for (int c : z) {
    check(c);
    if (c == x || c == y) throw std::invalid_argument("partial_correlation: x or y in Z");
  }
  const auto N = data.rows();
  if (N <= static_cast<Eigen::Index>(z.size()) + 3) {
    throw std::invalid_argument("partial_correlation: need N > |Z| + 3");
  }

  std::vector<int> idx{x, y};
  idx.insert(idx.end(), z.begin(), z.end());
  const int k = static_cast<int>(idx.size());

  DataMatrix sub(N, k);
  for (int c = 0; c < k; ++c) sub.col(c) = data.col(idx[c]);
  Eigen::RowVectorXd mean = sub.colwise().mean();
  sub.rowwise() -= mean;
  Eigen::MatrixXd cov = (sub.transpose() * sub) / static_cast<double>(N - 1);

  Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  for (int c = 0; c < k; ++c) {
    if (!(sd(c) > 0.0)) {
      throw SingularCovarianceError("partial_correlation: constant column in submatrix");
    }
  }
  Eigen::MatrixXd corr = cov.array() / (sd * sd.transpose()).array();

  double rho;
  if (z.empty()) {
    rho = corr(0, 1);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(corr);
    if (!lu.isInvertible()) {
      throw SingularCovarianceError("partial_correlation: singular correlation submatrix");
    }
    Eigen::MatrixXd prec = lu.inverse();
    rho = -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
  }
  const double clip = 1.0 - 1e-12;
  return std::clamp(rho, -clip, clip);
}

/// Fisher z: statistic sqrt(N - |Z| - 3) * atanh(rho); two-sided p-value from
/// the standard normal; independent iff p > alpha.
inline CiTestResult fisher_z_test(const DataMatrix& data, int x, int y,
                                  const std::vector<int>& z, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("fisher_z_test: alpha in (0,1)");
  const double rho = partial_correlation(data, x, y, z);
  const double dof = static_cast<double>(data.rows()) - static_cast<double>(z.size()) - 3.0;
  CiTestResult result;
  result.statistic = std::sqrt(dof) * std::atanh(rho);
  result.p_value = 2.0 * (1.0 - normal_cdf(std::abs(result.statistic)));
  result.independent = result.p_value > alpha;
  return result;
}

/// Fisher-z CI predicate bound to a dataset and significance level.
inline CiPredicate make_fisher_z_predicate(const DataMatrix& data, double alpha) {
  return [&data, alpha](int x, int y, const std::vector<int>& z) {
    return fisher_z_test(data, x, y, z, alpha).independent;
  };
}

}  // namespace vista
