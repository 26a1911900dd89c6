#pragma once

#include <Eigen/Dense>
#include <vector>

namespace plspath::stats {

double mean(const Eigen::VectorXd& v);

// Sample variance / standard deviation (n-1 denominator), used everywhere.
double variance(const Eigen::VectorXd& v);
double sd(const Eigen::VectorXd& v);

double covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Columnwise z-scores; throws MetricError on a zero-variance column.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& x);
Eigen::MatrixXd standardize_with(const Eigen::MatrixXd& x, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& sigma);

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x);

// Linear-interpolation quantile (the "type 7" convention): h = (n-1)p.
double quantile(std::vector<double> values, double p);

// Adjusted Fisher-Pearson-free moment skewness: m3 / m2^(3/2).
double skewness(const Eigen::VectorXd& v);

// Two-sided p-value from the Student t reference with df degrees of freedom.
double t_two_sided_p(double t, double df);

// Standard normal quantile and CDF.
double normal_quantile(double p);
double normal_cdf(double x);

// OLS solve y ~ X (no implicit intercept; add a ones column if wanted).
// Throws EstimationError when X is rank deficient.
Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace plspath::stats
