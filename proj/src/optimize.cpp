#include "qsvlp/optimize.hpp"

#include "qsvlp/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace qsvlp {

namespace {

// Standard coefficients: reflection, expansion, contraction, shrink.
constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    for (auto i : order) {
      xs.push_back(x[i]);
      fs.push_back(f[i]);
    }
    x = std::move(xs);
    f = std::move(fs);
  }
};

bool small_enough(const Simplex& s, const NelderMeadOptions& o) {
  const Eigen::Index n = s.x.front().size();
  for (std::size_t i = 1; i < s.x.size(); ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      if (std::abs(s.x[i][k] - s.x[0][k]) > o.x_tolerance[k]) return false;
  return true;
}

bool flat_enough(const Simplex& s, const NelderMeadOptions& o) {
  const double lo = s.f.front();
  const double hi = s.f.back();
  if (!std::isfinite(hi)) return false;
  const double scale = std::max(std::abs(lo), std::abs(hi));
  return hi - lo <= o.f_tolerance + 4.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  NelderMeadResult res;
  res.x = x0;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  Eigen::VectorXd start = x0;
  double best = eval(start);
  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    Simplex s;
    s.x.push_back(start);
    s.f.push_back(best);
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd v = start;
      v[k] += opts.initial_step[k];
      double fv = eval(v);
      if (!std::isfinite(fv)) {  // try the other side of an infeasible edge
        v[k] = start[k] - opts.initial_step[k];
        fv = eval(v);
      }
      s.x.push_back(v);
      s.f.push_back(fv);
    }
    bool converged = false;
    while (evals < opts.max_evaluations) {
      s.sort();
      if (small_enough(s, opts) || flat_enough(s, opts)) {
        converged = true;
        break;
      }
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) centroid += s.x[static_cast<std::size_t>(i)];
      centroid /= static_cast<double>(n);
      const auto worst = static_cast<std::size_t>(n);

      const Eigen::VectorXd xr = centroid + kReflect * (centroid - s.x[worst]);
      const double fr = eval(xr);
      if (fr < s.f[0]) {
        const Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
        const double fe = eval(xe);
        if (fe < fr) {
          s.x[worst] = xe;
          s.f[worst] = fe;
        } else {
          s.x[worst] = xr;
          s.f[worst] = fr;
        }
        continue;
      }
      if (fr < s.f[worst - 1]) {
        s.x[worst] = xr;
        s.f[worst] = fr;
        continue;
      }
      const bool outside = fr < s.f[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + kContract * (xr - centroid))
                                         : Eigen::VectorXd(centroid + kContract * (s.x[worst] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : s.f[worst])) {
        s.x[worst] = xc;
        s.f[worst] = fc;
        continue;
      }
      for (std::size_t i = 1; i < s.x.size(); ++i) {
        s.x[i] = s.x[0] + kShrink * (s.x[i] - s.x[0]);
        s.f[i] = eval(s.x[i]);
      }
    }
    s.sort();
    const bool improved = s.f[0] < best;
    if (s.f[0] <= best) {
      best = s.f[0];
      start = s.x[0];
    }
    res.converged = converged;
    res.restarts = attempt;
    // A collapsed simplex can stall away from the optimum; restart until a
    // fresh simplex no longer improves.
    if (!converged || (attempt > 0 && !improved)) break;
  }
  res.x = start;
  res.f = best;
  res.evaluations = evals;
  return res;
}

ScalarOptimum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double x_tolerance, int max_evaluations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int evals = 2;
  while (b - a > x_tolerance && evals < max_evaluations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc >= fd ? ScalarOptimum{c, fc, evals} : ScalarOptimum{d, fd, evals};
}

DiagonalPlusRankOne::DiagonalPlusRankOne(Eigen::VectorXd diagonal, double rank_one)
    : d_(std::move(diagonal)), c_(rank_one) {
  if (!(d_.array() > 0.0).all()) throw DomainError("diagonal part must be positive");
  if (!(c_ >= 0.0)) throw DomainError("rank-one weight must be nonnegative");
  denom_ = 1.0 + c_ * d_.cwiseInverse().sum();
}

Eigen::VectorXd DiagonalPlusRankOne::solve(const Eigen::VectorXd& b) const {
  const Eigen::VectorXd db = b.cwiseQuotient(d_);
  return db - Eigen::VectorXd::Constant(d_.size(), c_ * db.sum() / denom_).cwiseQuotient(d_);
}

double DiagonalPlusRankOne::quadratic_form(const Eigen::VectorXd& r) const {
  const double s = r.cwiseQuotient(d_).sum();
  return r.cwiseAbs2().cwiseQuotient(d_).sum() - c_ * s * s / denom_;
}

double DiagonalPlusRankOne::log_determinant() const {
  return d_.array().log().sum() + std::log(denom_);
}

Eigen::MatrixXd DiagonalPlusRankOne::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d_.size(), d_.size(), c_);
  m.diagonal() += d_;
  return m;
}

}  // namespace qsvlp
