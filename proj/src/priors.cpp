#include "mphd/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "mphd/error.hpp"

namespace mphd {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be finite");
    }
}

struct SampleStats {
    double n = 0.0;
    double sum = 0.0;
    double sum_log = 0.0;
    double sum_xlogx = 0.0;
};

SampleStats positive_sample_stats(std::span<const double> samples) {
    SampleStats s;
    s.n = static_cast<double>(samples.size());
    for (double x : samples) {
        require_finite(x, "sample");
        if (x <= 0.0) {
            throw Error(ErrorCode::kDomain, "gamma_mle: samples must be strictly positive");
        }
        const double lx = std::log(x);
        s.sum += x;
        s.sum_log += lx;
        s.sum_xlogx += x * lx;
    }
    return s;
}

// Per-sample profile log-likelihood of the shape with the rate at its conditional MLE a / mean.
double profile_log_likelihood(double a, double log_mean, double mean_log) {
    return a * (std::log(a) - log_mean) - std::lgamma(a) + (a - 1.0) * mean_log - a;
}

}  // namespace

void validate(const PriorFamily& prior) {
    std::visit(Overloaded{
                   [](const Gamma& g) {
                       if (!(g.shape > 0.0) || !(g.rate > 0.0) || !std::isfinite(g.shape) ||
                           !std::isfinite(g.rate)) {
                           throw Error(ErrorCode::kInvalidArgument,
                                       "Gamma prior requires positive finite shape and rate");
                       }
                   },
                   [](const Normal& n) {
                       if (!std::isfinite(n.mean) || !(n.stddev > 0.0) || !std::isfinite(n.stddev)) {
                           throw Error(ErrorCode::kInvalidArgument,
                                       "Normal prior requires finite mean and positive stddev");
                       }
                   },
                   [](const Uniform& u) {
                       if (!std::isfinite(u.lo) || !std::isfinite(u.hi) || !(u.lo < u.hi)) {
                           throw Error(ErrorCode::kInvalidArgument, "Uniform prior requires lo < hi");
                       }
                   },
               },
               prior);
}

std::string describe(const PriorFamily& prior) {
    std::ostringstream out;
    out.precision(6);
    std::visit(Overloaded{
                   [&](const Gamma& g) { out << "Gamma(a=" << g.shape << ", b=" << g.rate << ")"; },
                   [&](const Normal& n) { out << "Normal(c=" << n.mean << ", d=" << n.stddev << ")"; },
                   [&](const Uniform& u) { out << "Uniform(" << u.lo << ", " << u.hi << ")"; },
               },
               prior);
    return out.str();
}

double log_pdf(const PriorFamily& prior, double x) {
    require_finite(x, "log_pdf argument");
    return std::visit(Overloaded{
                          [x](const Gamma& g) {
                              if (x <= 0.0) return kNegInf;
                              return g.shape * std::log(g.rate) - std::lgamma(g.shape) +
                                     (g.shape - 1.0) * std::log(x) - g.rate * x;
                          },
                          [x](const Normal& n) {
                              const double z = (x - n.mean) / n.stddev;
                              return -0.5 * z * z - std::log(n.stddev) -
                                     0.5 * std::log(2.0 * std::numbers::pi);
                          },
                          [x](const Uniform& u) {
                              if (x < u.lo || x > u.hi) return kNegInf;
                              return -std::log(u.hi - u.lo);
                          },
                      },
                      prior);
}

double log_pdf_dx(const PriorFamily& prior, double x) {
    return std::visit(Overloaded{
                          [x](const Gamma& g) {
                              if (x <= 0.0) return 0.0;
                              return (g.shape - 1.0) / x - g.rate;
                          },
                          [x](const Normal& n) { return -(x - n.mean) / (n.stddev * n.stddev); },
                          [](const Uniform&) { return 0.0; },
                      },
                      prior);
}

double sample(const PriorFamily& prior, Rng& rng) {
    return std::visit(Overloaded{
                          [&rng](const Gamma& g) {
                              std::gamma_distribution<double> dist(g.shape, 1.0 / g.rate);
                              return dist(rng);
                          },
                          [&rng](const Normal& n) {
                              std::normal_distribution<double> dist(n.mean, n.stddev);
                              return dist(rng);
                          },
                          [&rng](const Uniform& u) {
                              std::uniform_real_distribution<double> dist(u.lo, u.hi);
                              return dist(rng);
                          },
                      },
                      prior);
}

double mode(const PriorFamily& prior) {
    return std::visit(Overloaded{
                          [](const Gamma& g) { return g.shape >= 1.0 ? (g.shape - 1.0) / g.rate : 0.0; },
                          [](const Normal& n) { return n.mean; },
                          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                      },
                      prior);
}

double mean(const PriorFamily& prior) {
    return std::visit(Overloaded{
                          [](const Gamma& g) { return g.shape / g.rate; },
                          [](const Normal& n) { return n.mean; },
                          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                      },
                      prior);
}

Gamma gamma_mle_closed_form(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::kDegenerateData, "gamma_mle: need at least 2 samples");
    }
    const SampleStats s = positive_sample_stats(samples);
    const double denom = s.n * s.sum_xlogx - s.sum_log * s.sum;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw Error(ErrorCode::kDegenerateData, "gamma_mle: samples have zero spread");
    }
    const double a = s.n * s.sum / denom;
    return Gamma{a, a * s.n / s.sum};
}

Gamma gamma_mle(std::span<const double> samples) {
    Gamma g = gamma_mle_closed_form(samples);
    const SampleStats s = positive_sample_stats(samples);
    const double mean_x = s.sum / s.n;
    const double log_mean = std::log(mean_x);
    const double mean_log = s.sum_log / s.n;
    const double target = log_mean - mean_log;
    if (!(target > 0.0)) {
        throw Error(ErrorCode::kDegenerateData, "gamma_mle: samples have zero spread");
    }

    double a = g.shape;
    double ll = profile_log_likelihood(a, log_mean, mean_log);
    for (int iter = 0; iter < 20; ++iter) {
        const double f = std::log(a) - boost::math::digamma(a) - target;
        const double df = 1.0 / a - boost::math::trigamma(a);
        if (f == 0.0 || !(df < 0.0)) break;
        double step = -f / df;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            const double candidate = a + step;
            if (candidate > 0.0) {
                const double cand_ll = profile_log_likelihood(candidate, log_mean, mean_log);
                if (cand_ll >= ll) {
                    a = candidate;
                    ll = cand_ll;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted || std::abs(step) <= 1e-15 * a) break;
    }
    return Gamma{a, a / mean_x};
}

Normal normal_mle(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::kDegenerateData, "normal_mle: need at least 2 samples");
    }
    double sum = 0.0;
    for (double x : samples) {
        require_finite(x, "sample");
        sum += x;
    }
    const double n = static_cast<double>(samples.size());
    const double mu = sum / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mu) * (x - mu);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) {
        throw Error(ErrorCode::kDegenerateData, "normal_mle: samples have zero spread");
    }
    return Normal{mu, sd};
}

double gamma_log_likelihood(const Gamma& g, std::span<const double> samples) {
    double total = 0.0;
    for (double x : samples) total += log_pdf(g, x);
    return total;
}

double gamma_kl(const Gamma& p, const Gamma& q) {
    validate(p);
    validate(q);
    const double kl = (p.shape - q.shape) * boost::math::digamma(p.shape) - std::lgamma(p.shape) +
                      std::lgamma(q.shape) + q.shape * (std::log(p.rate) - std::log(q.rate)) +
                      p.shape * (q.rate - p.rate) / p.rate;
    return std::max(kl, 0.0);
}

GpPrior hand_specified_prior(std::size_t dim) {
    GpPrior prior;
    prior.constant_mean = Normal{0.5, 0.5};
    prior.length_scales.assign(dim, Gamma{1.0, 0.1});
    prior.signal_variance = Gamma{1.0, 5.0};
    prior.noise_variance = Gamma{1.0, 100.0};
    return prior;
}

GpPrior non_informative_prior(std::size_t dim) {
    GpPrior prior;
    prior.constant_mean = Uniform{0.0, 1.0};
    prior.length_scales.assign(dim, Uniform{1e-5, 30.0});
    prior.signal_variance = Uniform{1e-5, 1.0};
    prior.noise_variance = Uniform{1e-5, 0.1};
    return prior;
}

}  // namespace mphd
