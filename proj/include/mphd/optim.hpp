#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace mphd {

/// Objective callback: returns f(x) and writes the gradient into `grad` (already sized).
/// Returning +infinity marks x as infeasible.
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
using ScalarFn = std::function<double(const Eigen::VectorXd& x)>;

enum class OptimMethod { kAdam, kLbfgs };

struct OptimConfig {
    OptimMethod method = OptimMethod::kAdam;
    double learning_rate = 1e-3;
    int iterations = 1000;

    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    int lbfgs_history = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search_evals = 40;
    /// L-BFGS stops once the infinity norm of the gradient falls below this.
    double gradient_tolerance = 1e-10;

    /// Optional box on x. Adam projects onto it; L-BFGS treats the outside as +infinity.
    std::optional<Eigen::VectorXd> lower;
    std::optional<Eigen::VectorXd> upper;

    void validate() const;
};

struct OptimResult {
    Eigen::VectorXd x;       // best iterate
    double value = 0.0;      // objective at x
    std::vector<double> trace;  // objective per iterate, starting with x0
    int iterations = 0;
    bool degraded = false;   // line search failed before the iteration budget was used
};

/// Runs exactly cfg.iterations Adam steps and returns the iterate with the best recorded
/// objective (trace length iterations + 1). Throws kNumericalFailure naming the iteration
/// if the objective or gradient is not finite.
OptimResult adam(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimConfig& cfg);

/// L-BFGS with two-loop recursion and a strong-Wolfe bracketing/zoom line search.
OptimResult lbfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimConfig& cfg);

OptimResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimConfig& cfg);

/// Central differences, one coordinate at a time.
Eigen::VectorXd finite_diff_grad(const ScalarFn& f, const Eigen::VectorXd& x, double h = 1e-5);

}  // namespace mphd
