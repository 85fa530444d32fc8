#pragma once

// Two-step pre-training: a per-dataset GP fit (step 1), then a prior over the fitted
// parameters as a function of the dimension context (step 2). Also the pseudo sub-dataset
// construction and the estimator-consistency experiments.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mphd/context.hpp"
#include "mphd/data.hpp"
#include "mphd/synth.hpp"

namespace mphd {

struct Step1Config {
    int iterations = 20000;
    double learning_rate = 1e-3;
    std::size_t subsample_per_subdataset = 50;
    /// Seeded random starts in addition to the deterministic one.
    int restarts = 2;
};

struct Step2Config {
    int iterations = 10000;
    double learning_rate = 1e-3;
};

struct PretrainConfig {
    Step1Config step1;
    Step2Config step2;
    Smoothness nu = Smoothness::kNu52;
    std::set<std::string> exclude_dataset_ids;

    void validate() const;
};

/// Box on the raw parameters during step 1 and MAP refits. The noise floor sits below the
/// others because noise variances near 1e-4 are common on normalized data.
struct ParameterBox {
    double scale_lo = 1e-4;
    double scale_hi = 1e4;
    double noise_lo = 1e-8;
    double noise_hi = 1e4;
    double mean_abs = 1e4;

    Eigen::VectorXd lower_unconstrained(std::size_t dim) const;
    Eigen::VectorXd upper_unconstrained(std::size_t dim) const;
    GpParams clamp(GpParams params) const;
};

struct DatasetEstimate {
    std::string dataset_id;
    DomainDescriptor domain;
    GpParams params;
    double nll = 0.0;  // full-data negative log likelihood at params
};

struct Provenance {
    std::vector<std::string> dataset_ids;
    std::vector<std::string> excluded_ids;
    std::uint64_t seed = 0;
    /// Hash of the canonical encoding of the training sub-datasets actually used.
    std::string training_data_hash;
};

struct PretrainedModel {
    PhiModel phi;
    std::vector<DatasetEstimate> estimates;
    PretrainConfig config;
    Provenance provenance;

    const DatasetEstimate* find_estimate(const std::string& dataset_id) const;
};

/// Deterministic start: every length-scale 0.5, signal variance = sample variance of y,
/// noise = 1e-3 * signal variance, mean = sample mean of y.
GpParams step1_initial_params(std::span<const SubDataset> subdatasets);

/// Adam on the GP negative log likelihood with a fresh subsample per sub-dataset each
/// iteration. Candidates per start are the start, the best iterate and the final iterate;
/// the one with the lowest full-data likelihood wins.
GpParams step1_fit_dataset(std::span<const SubDataset> subdatasets, const PretrainConfig& cfg, Rng& rng);

/// (context, fitted length-scale) for every dimension of every estimate.
std::vector<PhiPair> phi_training_pairs(std::span<const DatasetEstimate> estimates);

PhiModel step2_fit(std::span<const DatasetEstimate> estimates, PhiKind kind, const PretrainConfig& cfg, Rng& rng);

/// Step 1 for every dataset with at least one training sub-dataset and not excluded, in
/// superdataset order. Each dataset draws from its own stream keyed by (seed, id).
std::vector<DatasetEstimate> step1_fit_all(const SuperDataset& superdataset, const PretrainConfig& cfg,
                                           std::uint64_t seed);

PretrainedModel pretrain(const SuperDataset& superdataset, PhiKind kind, const PretrainConfig& cfg,
                         std::uint64_t seed);

/// Step 2 on precomputed estimates, recording the given provenance.
PretrainedModel pretrain_from_estimates(std::vector<DatasetEstimate> estimates, PhiKind kind,
                                        const PretrainConfig& cfg, Provenance provenance);

/// Negative log density of params under prior, summed over all parameters.
double prior_nll(const GpPrior& prior, const GpParams& params);

/// Mean over estimates of prior_nll under the prior phi assigns to each estimate's domain.
double heldout_prior_nll(const PhiModel& phi, std::span<const DatasetEstimate> estimates);

/// Concatenates the sub-datasets after shifting block j by (q + q') j along every axis,
/// where q' is one plus the largest pairwise distance inside the dataset.
SubDataset build_pseudo_subdataset(std::span<const SubDataset> subdatasets, double q);

// ---- consistency experiments ----

struct ParameterSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
};

struct VaryMSpec {
    GpParams truth;
    Smoothness nu = Smoothness::kNu52;
    std::size_t observations_per_subdataset = 25;
    std::vector<std::size_t> grid;
    int repeats = 20;
    PretrainConfig pretrain;
    std::uint64_t seed = 0;
};

struct VaryMPoint {
    std::size_t m = 0;
    std::vector<GpParams> estimates;  // one per repeat
    ParameterSummary length_scale;    // first dimension
    ParameterSummary signal_variance;
    ParameterSummary noise_variance;
    ParameterSummary constant_mean;
};

struct VaryNSpec {
    SynthConfig generator;
    /// When set, the first round(fraction * N_total) datasets train and the rest are held out.
    std::optional<double> train_fraction;
    std::vector<std::size_t> grid;
    int repeats = 5;
    std::vector<PhiKind> phi_kinds{PhiKind::kNn, PhiKind::kConstant};
    PretrainConfig pretrain;
    std::uint64_t seed = 0;
};

struct VaryNRun {
    std::size_t n = 0;
    PhiKind kind = PhiKind::kNn;
    int repeat = 0;
    /// gamma_kl(truth || learned) for the length-scale prior, averaged over d in the
    /// generator's dimension range.
    double length_scale_kl = 0.0;
    double signal_variance_kl = 0.0;
    double noise_variance_kl = 0.0;
    std::optional<double> heldout_nll;
    Gamma learned_length_scale_at_lo;  // phi output for a continuous dim at d = dim_lo
};

struct VaryNReport {
    std::vector<VaryNRun> runs;
    std::string kl_direction = "truth||learned";

    std::vector<double> values(std::size_t n, PhiKind kind, double VaryNRun::*field) const;
    std::vector<double> heldout(std::size_t n, PhiKind kind) const;
};

ParameterSummary summarize(std::vector<double> values);

std::vector<VaryMPoint> consistency_vary_m(const VaryMSpec& spec);
VaryNReport consistency_vary_n(const VaryNSpec& spec);

}  // namespace mphd
