#pragma once

// Ground-truth synthetic super-datasets: per dataset draw a dimension, GP parameters from
// the profile's priors, then i.i.d. GP function samples observed with Gaussian noise.

#include <cstdint>
#include <optional>
#include <utility>

#include "mphd/data.hpp"

namespace mphd {

enum class SynthProfile { kS, kL, kCustom };
enum class SynthScale { kFull, kDesk };

/// Gamma whose parameters are affine in the domain dimension: a = a0 + a1 d, b = b0 + b1 d.
struct LinearGammaRule {
    double shape_intercept = 1.0;
    double shape_slope = 0.0;
    double rate_intercept = 1.0;
    double rate_slope = 0.0;

    /// Throws kDomain when the shape or rate is not positive at d.
    Gamma at(std::size_t d) const;
};

struct GroundTruthPriorSpec {
    Normal constant_mean;
    LinearGammaRule length_scale;
    Gamma signal_variance;
    Gamma noise_variance;

    GpPrior at(std::size_t d) const;
};

struct SynthConfig {
    SynthProfile profile = SynthProfile::kS;
    std::size_t n_datasets = 20;
    std::size_t subdatasets_per_dataset = 10;
    std::size_t observations_per_subdataset = 300;
    std::size_t dim_lo = 2;
    std::size_t dim_hi = 5;
    Smoothness nu = Smoothness::kNu32;
    GroundTruthPriorSpec priors;
    /// Probability that a dimension is discrete (custom profile only); discrete
    /// dimensions take one of 10 equispaced levels in [0, 1].
    double discrete_probability = 0.0;
    /// Replaces the sampled noise variance when set (0 gives noiseless observations).
    std::optional<double> noise_variance_override;
    std::uint64_t seed = 0;

    static SynthConfig profile_s(SynthScale scale = SynthScale::kFull);
    static SynthConfig profile_l(SynthScale scale = SynthScale::kFull);

    void validate() const;
};

GroundTruthPriorSpec ground_truth_prior_spec(SynthProfile profile);

/// Priors for a d-dimensional domain under profile S or L.
GpPrior ground_truth_priors(SynthProfile profile, std::size_t d);

/// Draws f ~ GP(params) jointly at `inputs` (duplicate rows share one value) and adds
/// N(0, noise_variance) noise to every output.
Eigen::VectorXd sample_gp_observations(const Eigen::MatrixXd& inputs, const GpParams& params, Smoothness nu,
                                       double noise_variance, Rng& rng);

SuperDataset generate_superdataset(const SynthConfig& cfg);

enum class SplitMode { kPerDatasetSubsplit, kPerSuperSplit };

SplitMode split_mode_from_string(const std::string& s);

/// Writes train/test labels into every sub-dataset. kPerSuperSplit marks the first
/// round(fraction * N) datasets as training; kPerDatasetSubsplit marks a seeded
/// round(fraction * M_i) of each dataset's sub-datasets as training.
void assign_splits(SuperDataset& superdataset, SplitMode mode, double fraction, std::uint64_t seed);

/// Returns (train, test) copies; units are datasets for kPerSuperSplit and sub-datasets otherwise.
std::pair<SuperDataset, SuperDataset> split_superdataset(const SuperDataset& superdataset, SplitMode mode,
                                                         double fraction, std::uint64_t seed);

}  // namespace mphd
