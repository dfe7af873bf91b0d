#pragma once

// Row-level estimators shared by parameter fitting and the BIC scorer.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "clgbn/dataset.hpp"

namespace clgbn::detail {

/// A regressor column: the raw value of a continuous column (level < 0) or the indicator
/// [value == level] of a discrete column.
struct Regressor {
  std::size_t col = 0;
  int level = -1;
};

struct OlsFit {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double rss = 0.0;
  double syy = 0.0;  // centered total sum of squares of the response
  std::size_t n = 0;
};

/// Relative eigenvalue floor of the regressor correlation matrix below which a design is collinear.
inline constexpr double kCollinearityTolerance = 1e-10;
/// A block is degenerate (sd = 0) when its ML sd is at most this fraction of the response sd.
inline constexpr double kDegenerateTolerance = 1e-9;

/// Throws NumericalError naming `node` when the centered cross-product matrix of the
/// regressors is (numerically) singular.
void check_rank(const Eigen::MatrixXd& centered_cross_products, const std::string& node);

/// Ordinary least squares of column y on an intercept plus `regressors`, over `rows`.
OlsFit ols(const Dataset& data, std::span<const std::size_t> rows, std::size_t y,
           std::span<const Regressor> regressors, const std::string& node);

bool is_degenerate(double rss, double syy);

/// Gaussian log-likelihood of an ML fit with residual sum of squares `rss` over n rows.
double gaussian_ml_loglik(double rss, double syy, std::size_t n);

struct LogisticFit {
  std::vector<std::vector<double>> weights;  // [state][intercept, slopes...]; state 0 zeros
  double loglik = 0.0;
};

/// Multinomial logistic regression of discrete column y (k states) on continuous columns,
/// by Newton-Raphson with step halving.
LogisticFit logistic(const Dataset& data, std::span<const std::size_t> rows, std::size_t y, std::size_t states,
                     std::span<const std::size_t> continuous, const std::string& node);

std::vector<double> softmax(const std::vector<std::vector<double>>& weights, std::span<const double> x);

}  // namespace clgbn::detail
