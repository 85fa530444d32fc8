#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mphd/rng.hpp"

namespace mphd {

/// Gamma distribution with shape `a` and rate `b` (mean a/b).
struct Gamma {
    double shape = 1.0;
    double rate = 1.0;
    bool operator==(const Gamma&) const = default;
};

struct Normal {
    double mean = 0.0;
    double stddev = 1.0;
    bool operator==(const Normal&) const = default;
};

struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const Uniform&) const = default;
};

using PriorFamily = std::variant<Gamma, Normal, Uniform>;

void validate(const PriorFamily& prior);
std::string describe(const PriorFamily& prior);

/// Exact log-density. Gamma at x <= 0 and Uniform outside [lo, hi] return -infinity,
/// which optimizers treat as a barrier. Throws on non-finite x.
double log_pdf(const PriorFamily& prior, double x);

/// d/dx log_pdf; zero outside the support.
double log_pdf_dx(const PriorFamily& prior, double x);

double sample(const PriorFamily& prior, Rng& rng);

/// Componentwise mode: (a-1)/b for Gamma (0 when a < 1), mean for Normal, midpoint for Uniform.
double mode(const PriorFamily& prior);

double mean(const PriorFamily& prior);

/// Gamma MLE: closed-form Ye-Chen estimate refined by at most 20 Newton steps on the
/// profile likelihood equation log(a) - digamma(a) = log(mean x) - mean(log x).
/// A Newton step is only accepted if it does not decrease the Gamma log-likelihood.
/// Requires n >= 2 strictly positive samples with nonzero spread.
Gamma gamma_mle(std::span<const double> samples);

/// The Ye-Chen closed form alone (no refinement).
Gamma gamma_mle_closed_form(std::span<const double> samples);

/// Normal MLE: sample mean and root mean squared deviation (divisor n).
Normal normal_mle(std::span<const double> samples);

double gamma_log_likelihood(const Gamma& g, std::span<const double> samples);

/// KL(p || q) in closed form.
double gamma_kl(const Gamma& p, const Gamma& q);

/// Priors over every parameter of one GP on a d-dimensional domain.
struct GpPrior {
    PriorFamily constant_mean = Normal{};
    std::vector<PriorFamily> length_scales;
    PriorFamily signal_variance = Gamma{};
    PriorFamily noise_variance = Gamma{};
    bool operator==(const GpPrior&) const = default;
};

/// Hand-specified HGP baseline priors (same for every domain).
GpPrior hand_specified_prior(std::size_t dim);

/// Non-informative HGP baseline: uniform priors on every parameter.
GpPrior non_informative_prior(std::size_t dim);

}  // namespace mphd
