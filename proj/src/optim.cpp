#include "mphd/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "mphd/error.hpp"

namespace mphd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside_box(const Eigen::VectorXd& x, const OptimConfig& cfg) {
    if (cfg.lower && (x.array() < cfg.lower->array()).any()) return false;
    if (cfg.upper && (x.array() > cfg.upper->array()).any()) return false;
    return true;
}

void project(Eigen::VectorXd& x, const OptimConfig& cfg) {
    if (cfg.lower) x = x.cwiseMax(*cfg.lower);
    if (cfg.upper) x = x.cwiseMin(*cfg.upper);
}

// Evaluates f with the box barrier applied; non-finite values collapse to +inf.
struct Evaluation {
    double value = kInf;
    Eigen::VectorXd grad;
};

Evaluation evaluate(const ObjectiveFn& f, const Eigen::VectorXd& x, const OptimConfig& cfg) {
    Evaluation e;
    e.grad = Eigen::VectorXd::Zero(x.size());
    if (!inside_box(x, cfg)) return e;
    double v = kInf;
    try {
        v = f(x, e.grad);
    } catch (const Error& err) {
        if (err.code() != ErrorCode::kNumericalFailure) throw;
        v = kInf;
    }
    if (!std::isfinite(v) || !e.grad.allFinite()) {
        e.value = kInf;
        return e;
    }
    e.value = v;
    return e;
}

struct LineSearchResult {
    bool ok = false;
    double step = 0.0;
    Evaluation at;
};

// Strong-Wolfe line search (bracketing + zoom). Infeasible trial points behave like
// sufficient-decrease failures, so the step shrinks back into the feasible region.
LineSearchResult strong_wolfe(const ObjectiveFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                              double f0, double df0, double initial_step, const OptimConfig& cfg) {
    int evals = 0;
    auto phi = [&](double alpha) {
        ++evals;
        return evaluate(f, x + alpha * p, cfg);
    };

    LineSearchResult best_armijo;
    auto note_armijo = [&](double alpha, const Evaluation& e) {
        if (e.value <= f0 + cfg.wolfe_c1 * alpha * df0 &&
            (!best_armijo.ok || e.value < best_armijo.at.value)) {
            best_armijo.ok = true;
            best_armijo.step = alpha;
            best_armijo.at = e;
        }
    };

    auto zoom = [&](double lo, double f_lo, double df_lo, double hi, double f_hi) -> LineSearchResult {
        while (evals < cfg.max_line_search_evals) {
            double alpha;
            const double width = hi - lo;
            if (std::isfinite(f_hi)) {
                // minimizer of the quadratic through (lo, f_lo, df_lo) and (hi, f_hi)
                const double denom = 2.0 * (f_hi - f_lo - df_lo * width);
                alpha = denom > 0.0 ? lo - df_lo * width * width / denom : lo + 0.5 * width;
                const double a = std::min(lo, hi), b = std::max(lo, hi);
                const double margin = 0.1 * std::abs(width);
                alpha = std::clamp(alpha, a + margin, b - margin);
            } else {
                alpha = lo + 0.5 * width;
            }
            if (std::abs(width) < 1e-16 * std::max(1.0, std::abs(lo))) break;
            Evaluation e = phi(alpha);
            note_armijo(alpha, e);
            if (e.value > f0 + cfg.wolfe_c1 * alpha * df0 || e.value >= f_lo) {
                hi = alpha;
                f_hi = e.value;
            } else {
                const double d = e.grad.dot(p);
                if (std::abs(d) <= -cfg.wolfe_c2 * df0) {
                    return LineSearchResult{true, alpha, std::move(e)};
                }
                if (d * (hi - lo) >= 0.0) {
                    hi = lo;
                    f_hi = f_lo;
                }
                lo = alpha;
                f_lo = e.value;
                df_lo = d;
            }
        }
        return best_armijo;
    };

    double alpha_prev = 0.0;
    double f_prev = f0;
    double df_prev = df0;
    double alpha = initial_step;
    for (int i = 0; evals < cfg.max_line_search_evals; ++i) {
        Evaluation e = phi(alpha);
        note_armijo(alpha, e);
        if (e.value > f0 + cfg.wolfe_c1 * alpha * df0 || (i > 0 && e.value >= f_prev)) {
            return zoom(alpha_prev, f_prev, df_prev, alpha, e.value);
        }
        const double d = e.grad.dot(p);
        if (std::abs(d) <= -cfg.wolfe_c2 * df0) {
            return LineSearchResult{true, alpha, std::move(e)};
        }
        if (d >= 0.0) {
            return zoom(alpha, e.value, d, alpha_prev, f_prev);
        }
        alpha_prev = alpha;
        f_prev = e.value;
        df_prev = d;
        alpha *= 2.0;
    }
    return best_armijo;
}

}  // namespace

void OptimConfig::validate() const {
    if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "optimizer iterations must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
    if (lbfgs_history < 1) throw Error(ErrorCode::kInvalidArgument, "L-BFGS history must be >= 1");
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "Wolfe constants must satisfy 0 < c1 < c2 < 1");
    }
}

OptimResult adam(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimConfig& cfg) {
    cfg.validate();
    Eigen::VectorXd x = x0;
    project(x, cfg);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd grad(x.size());

    OptimResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
    result.value = kInf;

    double b1_power = 1.0;
    double b2_power = 1.0;
    for (int t = 0; t <= cfg.iterations; ++t) {
        grad.setZero();
        const double value = f(x, grad);
        if (!std::isfinite(value) || !grad.allFinite()) {
            throw Error(ErrorCode::kNumericalFailure,
                        "adam: non-finite objective or gradient at iteration " + std::to_string(t));
        }
        result.trace.push_back(value);
        if (value < result.value) {
            result.value = value;
            result.x = x;
        }
        if (t == cfg.iterations) break;
        b1_power *= cfg.adam_beta1;
        b2_power *= cfg.adam_beta2;
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseAbs2();
        const Eigen::ArrayXd m_hat = m.array() / (1.0 - b1_power);
        const Eigen::ArrayXd v_hat = v.array() / (1.0 - b2_power);
        x.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
        project(x, cfg);
    }
    result.iterations = cfg.iterations;
    return result;
}

OptimResult lbfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimConfig& cfg) {
    cfg.validate();
    OptimResult result;
    Evaluation current = evaluate(f, x0, cfg);
    if (!std::isfinite(current.value)) {
        throw Error(ErrorCode::kNumericalFailure, "lbfgs: objective is not finite at the initial point");
    }
    Eigen::VectorXd x = x0;
    result.x = x;
    result.value = current.value;
    result.trace.push_back(current.value);

    std::deque<Eigen::VectorXd> s_hist;
    std::deque<Eigen::VectorXd> y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const Eigen::VectorXd& g = current.grad;
        if (g.lpNorm<Eigen::Infinity>() <= cfg.gradient_tolerance) break;

        // two-loop recursion
        Eigen::VectorXd q = g;
        const std::size_t k = s_hist.size();
        std::vector<double> alphas(k);
        for (std::size_t i = k; i-- > 0;) {
            alphas[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alphas[i] * y_hist[i];
        }
        if (k > 0) {
            q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        }
        for (std::size_t i = 0; i < k; ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alphas[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd p = -q;
        double df0 = g.dot(p);
        if (!(df0 < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            p = -g;
            df0 = -g.squaredNorm();
        }
        const double initial_step =
            s_hist.empty() ? std::min(1.0, 1.0 / std::max(g.lpNorm<Eigen::Infinity>(), 1e-300)) : 1.0;

        LineSearchResult ls = strong_wolfe(f, x, p, current.value, df0, initial_step, cfg);
        if (!ls.ok) {
            result.degraded = true;
            break;
        }
        const Eigen::VectorXd x_new = x + ls.step * p;
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = ls.at.grad - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.lbfgs_history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = x_new;
        current = std::move(ls.at);
        result.trace.push_back(current.value);
        result.iterations = iter + 1;
        if (current.value < result.value) {
            result.value = current.value;
            result.x = x;
        }
    }
    return result;
}

OptimResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimConfig& cfg) {
    return cfg.method == OptimMethod::kAdam ? adam(f, x0, cfg) : lbfgs(f, x0, cfg);
}

Eigen::VectorXd finite_diff_grad(const ScalarFn& f, const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace mphd
