#include "ldpr/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ldpr/errors.hpp"

namespace ldpr {
namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> vertices;
  std::vector<double> values;
};

class Runner {
 public:
  Runner(const Objective& objective, const NelderMeadOptions& options, OptimResult& result)
      : objective_(objective), options_(options), result_(result) {}

  double eval(const Eigen::VectorXd& x) {
    ++result_.evaluations;
    const double v = objective_(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  // Returns true when the run met the tolerance within its budget.
  bool run(Simplex& s) {
    const auto n = static_cast<double>(s.vertices.front().size());
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / n;
    const double gamma = 0.75 - 0.5 / n;
    const double delta = 1.0 - 1.0 / n;
    const std::size_t m = s.vertices.size();
    std::vector<std::size_t> order(m);

    for (std::size_t iter = 0; iter < options_.max_iterations; ++iter) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
      reorder(s, order);

      const double best = s.values.front();
      const double worst = s.values.back();
      if (worst - best <= options_.tolerance) return true;

      ++result_.iterations;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(s.vertices.front().size());
      for (std::size_t i = 0; i + 1 < m; ++i) centroid += s.vertices[i];
      centroid /= static_cast<double>(m - 1);

      const Eigen::VectorXd& xw = s.vertices.back();
      const Eigen::VectorXd xr = centroid + alpha * (centroid - xw);
      const double fr = eval(xr);
      const double second_worst = s.values[m - 2];

      if (fr < best) {
        const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
        const double fe = eval(xe);
        if (fe < fr) {
          replace_worst(s, xe, fe);
        } else {
          replace_worst(s, xr, fr);
        }
      } else if (fr < second_worst) {
        replace_worst(s, xr, fr);
      } else {
        const bool outside = fr < worst;
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid))
                                           : Eigen::VectorXd(centroid - gamma * (centroid - xw));
        const double fc = eval(xc);
        if ((outside && fc <= fr) || (!outside && fc < worst)) {
          replace_worst(s, xc, fc);
        } else {
          for (std::size_t i = 1; i < m; ++i) {
            s.vertices[i] = s.vertices[0] + delta * (s.vertices[i] - s.vertices[0]);
            s.values[i] = eval(s.vertices[i]);
          }
        }
      }
      result_.trace.push_back(*std::min_element(s.values.begin(), s.values.end()));
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    reorder(s, order);
    return s.values.back() - s.values.front() <= options_.tolerance;
  }

 private:
  static void reorder(Simplex& s, const std::vector<std::size_t>& order) {
    std::vector<Eigen::VectorXd> v;
    std::vector<double> f;
    v.reserve(order.size());
    f.reserve(order.size());
    for (std::size_t i : order) {
      v.push_back(std::move(s.vertices[i]));
      f.push_back(s.values[i]);
    }
    s.vertices = std::move(v);
    s.values = std::move(f);
  }

  static void replace_worst(Simplex& s, const Eigen::VectorXd& x, double f) {
    s.vertices.back() = x;
    s.values.back() = f;
  }

  const Objective& objective_;
  const NelderMeadOptions& options_;
  OptimResult& result_;
};

Simplex build_simplex(Runner& runner, const Eigen::VectorXd& origin, double origin_value,
                      const Eigen::VectorXd& step) {
  Simplex s;
  s.vertices.push_back(origin);
  s.values.push_back(origin_value);
  for (Eigen::Index i = 0; i < origin.size(); ++i) {
    Eigen::VectorXd v = origin;
    v[i] += step[i];
    s.values.push_back(runner.eval(v));
    s.vertices.push_back(std::move(v));
  }
  return s;
}

}  // namespace

OptimResult nelder_mead(const Objective& objective, const Eigen::VectorXd& start,
                        const Eigen::VectorXd& step, const NelderMeadOptions& options) {
  if (start.size() == 0 || start.size() != step.size()) {
    throw ParameterError("nelder_mead: start and step must be non-empty and equal length");
  }
  OptimResult result;
  Runner runner(objective, options, result);

  Eigen::VectorXd best = start;
  double best_value = runner.eval(start);
  result.trace.push_back(best_value);

  bool converged = false;
  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    Simplex s = build_simplex(runner, best, best_value, step);
    converged = runner.run(s);
    const double improvement = best_value - s.values.front();
    if (s.values.front() < best_value) {
      best = s.vertices.front();
      best_value = s.values.front();
    }
    if (!converged) break;
    if (restart > 0 && !(improvement > options.tolerance)) break;
  }
  result.x = best;
  result.value = best_value;
  result.converged = converged && std::isfinite(best_value);
  return result;
}

}  // namespace ldpr
