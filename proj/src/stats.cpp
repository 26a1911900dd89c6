#include "plspath/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "plspath/common.hpp"

namespace plspath::stats {

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double variance(const Eigen::VectorXd& v) {
  const auto n = v.size();
  if (n < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(n - 1);
}

double sd(const Eigen::VectorXd& v) { return std::sqrt(variance(v)); }

double covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) throw MetricError("covariance: size mismatch");
  const double ma = a.mean(), mb = b.mean();
  return ((a.array() - ma) * (b.array() - mb)).sum() / static_cast<double>(a.size() - 1);
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double sa = sd(a), sb = sd(b);
  if (sa == 0.0 || sb == 0.0) throw MetricError("correlation: zero-variance input");
  return covariance(a, b) / (sa * sb);
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const double s = sd(x.col(j));
    if (s == 0.0) throw MetricError("standardize: zero-variance column " + std::to_string(j));
    z.col(j) = (x.col(j).array() - m) / s;
  }
  return z;
}

Eigen::MatrixXd standardize_with(const Eigen::MatrixXd& x, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& sigma) {
  if (x.cols() != mu.size() || x.cols() != sigma.size())
    throw MetricError("standardize_with: dimension mismatch");
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (sigma(j) == 0.0) throw MetricError("standardize_with: zero sigma");
    z.col(j) = (x.col(j).array() - mu(j)) / sigma(j);
  }
  return z;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd z = standardize(x);
  Eigen::MatrixXd r = (z.transpose() * z) / static_cast<double>(x.rows() - 1);
  r.diagonal().setOnes();
  return r;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw MetricError("quantile: empty input");
  if (p < 0.0 || p > 1.0) throw MetricError("quantile: p out of range");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double skewness(const Eigen::VectorXd& v) {
  const auto n = static_cast<double>(v.size());
  if (n < 3) return 0.0;
  const double m = v.mean();
  const double m2 = (v.array() - m).square().mean();
  if (m2 == 0.0) return 0.0;
  const double m3 = (v.array() - m).cube().mean();
  return m3 / std::pow(m2, 1.5);
}

double t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw MetricError("t_two_sided_p: df must be positive");
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double normal_quantile(double p) {
  boost::math::normal dist;
  return boost::math::quantile(dist, p);
}

double normal_cdf(double x) {
  boost::math::normal dist;
  return boost::math::cdf(dist, x);
}

Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw EstimationError("ols: dimension mismatch");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) throw EstimationError("ols: rank-deficient design matrix");
  return qr.solve(y);
}

}  // namespace plspath::stats
