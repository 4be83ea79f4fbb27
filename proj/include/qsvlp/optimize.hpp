#pragma once

#include <Eigen/Dense>

#include <functional>

namespace qsvlp {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
  Eigen::VectorXd initial_step;  // per-coordinate simplex edge
  Eigen::VectorXd x_tolerance;   // per-coordinate simplex extent at convergence
  double f_tolerance = 0.0;      // absolute spread of simplex values at convergence
  int max_evaluations = 4000;
  int max_restarts = 2;          // re-inflate the simplex at the optimum
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  int restarts = 0;
  bool converged = false;
};

/// Derivative-free minimization. Infeasible points may return +inf.
NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts);

struct ScalarOptimum {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
};

/// Maximizes a unimodal function on [lo, hi] by golden-section search.
ScalarOptimum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double x_tolerance, int max_evaluations = 200);

/// Covariance D + c 1 1^T with D diagonal positive and c >= 0. Solves,
/// quadratic forms and the log-determinant cost O(n) through the
/// Sherman-Morrison identity.
class DiagonalPlusRankOne {
 public:
  DiagonalPlusRankOne(Eigen::VectorXd diagonal, double rank_one);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  double quadratic_form(const Eigen::VectorXd& r) const;
  double log_determinant() const;
  Eigen::MatrixXd dense() const;

  const Eigen::VectorXd& diagonal() const { return d_; }
  double rank_one() const { return c_; }

 private:
  Eigen::VectorXd d_;
  double c_;
  double denom_;  // 1 + c sum 1/d_i
};

}  // namespace qsvlp
