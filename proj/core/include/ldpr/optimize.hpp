#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <vector>

namespace ldpr {

struct NelderMeadOptions {
  // Iteration budget for a single simplex run; each restart gets a fresh one.
  std::size_t max_iterations = 500;
  // Convergence when the spread of objective values over the simplex drops
  // below this (absolute).
  double tolerance = 1e-8;
  std::size_t max_restarts = 3;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  // Best objective value after every iteration, across restarts.
  std::vector<double> trace;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Derivative-free minimization with the adaptive-coefficient Nelder-Mead
// simplex. After a run converges the simplex is rebuilt around the best
// vertex; the search stops once a restart no longer improves the objective
// by more than the tolerance. Non-finite objective values count as +inf.
OptimResult nelder_mead(const Objective& objective, const Eigen::VectorXd& start,
                        const Eigen::VectorXd& step, const NelderMeadOptions& options = {});

}  // namespace ldpr
