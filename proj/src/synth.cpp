#include "mphd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mphd/error.hpp"
#include "mphd/parallel.hpp"

namespace mphd {
namespace {

std::size_t split_count(std::size_t n, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "split fraction must lie in (0, 1)");
    }
    const auto k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
    if (k == 0 || k >= n) {
        throw Error(ErrorCode::kInvalidArgument, "split of " + std::to_string(n) + " units at fraction " +
                                                     std::to_string(fraction) + " leaves one side empty");
    }
    return k;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed, std::uint64_t index) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derive_rng(seed, "split", index);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

Dataset generate_dataset(const SynthConfig& cfg, std::size_t index) {
    Rng rng = derive_rng(cfg.seed, "synth-dataset", index);
    Dataset ds;
    ds.id = "d" + std::to_string(index);

    std::uniform_int_distribution<std::size_t> dim_dist(cfg.dim_lo, cfg.dim_hi);
    const std::size_t d = dim_dist(rng);
    std::bernoulli_distribution discrete(cfg.discrete_probability);
    for (std::size_t j = 0; j < d; ++j) {
        const bool is_discrete = cfg.profile == SynthProfile::kCustom && discrete(rng);
        ds.domain.dims.push_back(DimSpec{is_discrete ? DimKind::kDiscrete : DimKind::kContinuous,
                                         std::make_pair(0.0, 1.0)});
    }

    GroundTruth truth;
    truth.nu = cfg.nu;
    truth.prior = cfg.priors.at(d);
    truth.params.constant_mean = sample(truth.prior.constant_mean, rng);
    truth.params.length_scales.resize(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
        truth.params.length_scales[static_cast<Eigen::Index>(j)] = sample(truth.prior.length_scales[j], rng);
    }
    truth.params.signal_variance = sample(truth.prior.signal_variance, rng);
    truth.params.noise_variance = sample(truth.prior.noise_variance, rng);
    // Draws can underflow to zero for tiny shapes; keep the recorded truth valid.
    truth.params.length_scales = truth.params.length_scales.cwiseMax(1e-12);
    truth.params.signal_variance = std::max(truth.params.signal_variance, 1e-12);
    truth.params.noise_variance = std::max(truth.params.noise_variance, 1e-300);
    const double noise = cfg.noise_variance_override.value_or(truth.params.noise_variance);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> level(0, 9);
    const auto n_obs = static_cast<Eigen::Index>(cfg.observations_per_subdataset);
    for (std::size_t j = 0; j < cfg.subdatasets_per_dataset; ++j) {
        LabeledSubDataset sd;
        sd.id = "s" + std::to_string(j);
        sd.data.inputs.resize(n_obs, static_cast<Eigen::Index>(d));
        for (Eigen::Index r = 0; r < n_obs; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                sd.data.inputs(r, static_cast<Eigen::Index>(c)) =
                    ds.domain.dims[c].kind == DimKind::kDiscrete ? level(rng) / 9.0 : unit(rng);
            }
        }
        sd.data.outputs = sample_gp_observations(sd.data.inputs, truth.params, cfg.nu, noise, rng);
        ds.subdatasets.push_back(std::move(sd));
    }
    ds.ground_truth = std::move(truth);
    return ds;
}

}  // namespace

Gamma LinearGammaRule::at(std::size_t d) const {
    const double dd = static_cast<double>(d);
    const Gamma g{shape_intercept + shape_slope * dd, rate_intercept + rate_slope * dd};
    if (!(g.shape > 0.0) || !(g.rate > 0.0)) {
        throw Error(ErrorCode::kDomain, "length-scale prior rule is not valid at d = " + std::to_string(d));
    }
    return g;
}

GpPrior GroundTruthPriorSpec::at(std::size_t d) const {
    GpPrior prior;
    prior.constant_mean = constant_mean;
    prior.length_scales.assign(d, length_scale.at(d));
    prior.signal_variance = signal_variance;
    prior.noise_variance = noise_variance;
    return prior;
}

GroundTruthPriorSpec ground_truth_prior_spec(SynthProfile profile) {
    GroundTruthPriorSpec spec;
    switch (profile) {
        case SynthProfile::kS:
            spec.constant_mean = Normal{1.0, 1.0};
            spec.length_scale = LinearGammaRule{10.0, 0.0, 30.0, 0.0};
            spec.signal_variance = Gamma{1.0, 1.0};
            spec.noise_variance = Gamma{10.0, 100000.0};
            return spec;
        case SynthProfile::kL:
            spec.constant_mean = Normal{0.5, 0.2};
            spec.length_scale = LinearGammaRule{0.8462, 0.07692, 5.7077, -0.3539};
            spec.signal_variance = Gamma{15.0, 100.0};
            spec.noise_variance = Gamma{1.0, 10000.0};
            return spec;
        case SynthProfile::kCustom:
            break;
    }
    throw Error(ErrorCode::kInvalidArgument, "custom profiles carry their own priors");
}

GpPrior ground_truth_priors(SynthProfile profile, std::size_t d) { return ground_truth_prior_spec(profile).at(d); }

SynthConfig SynthConfig::profile_s(SynthScale scale) {
    SynthConfig cfg;
    cfg.profile = SynthProfile::kS;
    cfg.n_datasets = 20;
    cfg.subdatasets_per_dataset = 10;
    cfg.observations_per_subdataset = scale == SynthScale::kFull ? 300 : 100;
    cfg.dim_lo = 2;
    cfg.dim_hi = 5;
    cfg.nu = Smoothness::kNu32;
    cfg.priors = ground_truth_prior_spec(SynthProfile::kS);
    return cfg;
}

SynthConfig SynthConfig::profile_l(SynthScale scale) {
    SynthConfig cfg;
    cfg.profile = SynthProfile::kL;
    cfg.nu = Smoothness::kNu52;
    cfg.priors = ground_truth_prior_spec(SynthProfile::kL);
    cfg.dim_lo = 2;
    if (scale == SynthScale::kFull) {
        cfg.n_datasets = 20;
        cfg.subdatasets_per_dataset = 20;
        cfg.observations_per_subdataset = 3000;
        cfg.dim_hi = 14;
    } else {
        cfg.n_datasets = 8;
        cfg.subdatasets_per_dataset = 6;
        cfg.observations_per_subdataset = 300;
        cfg.dim_hi = 8;
    }
    return cfg;
}

void SynthConfig::validate() const {
    if (dim_lo < 1 || dim_hi > 32 || dim_lo > dim_hi) {
        throw Error(ErrorCode::kInvalidArgument, "dimension range must lie within [1, 32]");
    }
    if (n_datasets < 1 || subdatasets_per_dataset < 1 || observations_per_subdataset < 1) {
        throw Error(ErrorCode::kInvalidArgument, "synthetic counts must be >= 1");
    }
    if (!(discrete_probability >= 0.0 && discrete_probability <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "discrete_probability must lie in [0, 1]");
    }
    if (noise_variance_override && !(*noise_variance_override >= 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "noise override must be non-negative");
    }
    for (std::size_t d = dim_lo; d <= dim_hi; ++d) priors.at(d);
    mphd::validate(PriorFamily{priors.constant_mean});
    mphd::validate(PriorFamily{priors.signal_variance});
    mphd::validate(PriorFamily{priors.noise_variance});
}

Eigen::VectorXd sample_gp_observations(const Eigen::MatrixXd& inputs, const GpParams& params, Smoothness nu,
                                       double noise_variance, Rng& rng) {
    // Collapse duplicate rows so the sampled function is single-valued.
    std::map<std::vector<double>, Eigen::Index> unique_index;
    std::vector<Eigen::Index> row_to_unique(static_cast<std::size_t>(inputs.rows()));
    std::vector<Eigen::Index> unique_rows;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        std::vector<double> key(static_cast<std::size_t>(inputs.cols()));
        for (Eigen::Index c = 0; c < inputs.cols(); ++c) key[static_cast<std::size_t>(c)] = inputs(r, c);
        auto [it, inserted] = unique_index.emplace(std::move(key), static_cast<Eigen::Index>(unique_rows.size()));
        if (inserted) unique_rows.push_back(r);
        row_to_unique[static_cast<std::size_t>(r)] = it->second;
    }
    Eigen::MatrixXd unique(static_cast<Eigen::Index>(unique_rows.size()), inputs.cols());
    for (std::size_t i = 0; i < unique_rows.size(); ++i) unique.row(static_cast<Eigen::Index>(i)) = inputs.row(unique_rows[i]);

    GpParams latent = params;
    latent.noise_variance = std::numeric_limits<double>::min();
    Eigen::MatrixXd k = gram_matrix(unique, latent, nu);
    const RobustCholesky chol = robust_cholesky(k, params.signal_variance);

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(unique.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const Eigen::VectorXd f = (chol.llt.matrixL() * z).array() + params.constant_mean;

    Eigen::VectorXd y(inputs.rows());
    const double noise_sd = std::sqrt(noise_variance);
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        y[r] = f[row_to_unique[static_cast<std::size_t>(r)]];
        if (noise_sd > 0.0) y[r] += noise_sd * normal(rng);
    }
    return y;
}

SuperDataset generate_superdataset(const SynthConfig& cfg) {
    cfg.validate();
    SuperDataset out;
    out.normalized = false;
    out.datasets.resize(cfg.n_datasets);
    parallel_for(cfg.n_datasets, [&](std::size_t i) { out.datasets[i] = generate_dataset(cfg, i); });
    return out;
}

SplitMode split_mode_from_string(const std::string& s) {
    if (s == "per_dataset_subsplit") return SplitMode::kPerDatasetSubsplit;
    if (s == "per_super_split") return SplitMode::kPerSuperSplit;
    throw Error(ErrorCode::kInvalidArgument, "unknown split mode '" + s + "'");
}

void assign_splits(SuperDataset& superdataset, SplitMode mode, double fraction, std::uint64_t seed) {
    if (mode == SplitMode::kPerSuperSplit) {
        const std::size_t n_train = split_count(superdataset.datasets.size(), fraction);
        for (std::size_t i = 0; i < superdataset.datasets.size(); ++i) {
            for (auto& sd : superdataset.datasets[i].subdatasets) sd.split = i < n_train ? Split::kTrain : Split::kTest;
        }
        return;
    }
    for (std::size_t i = 0; i < superdataset.datasets.size(); ++i) {
        Dataset& ds = superdataset.datasets[i];
        const std::size_t n_train = split_count(ds.subdatasets.size(), fraction);
        const std::vector<std::size_t> order = seeded_permutation(ds.subdatasets.size(), seed, fnv1a64(ds.id));
        for (std::size_t k = 0; k < order.size(); ++k) {
            ds.subdatasets[order[k]].split = k < n_train ? Split::kTrain : Split::kTest;
        }
    }
}

std::pair<SuperDataset, SuperDataset> split_superdataset(const SuperDataset& superdataset, SplitMode mode,
                                                         double fraction, std::uint64_t seed) {
    SuperDataset labeled = superdataset;
    assign_splits(labeled, mode, fraction, seed);
    SuperDataset train;
    SuperDataset test;
    train.normalized = test.normalized = superdataset.normalized;
    for (const Dataset& ds : labeled.datasets) {
        Dataset tr = ds;
        Dataset te = ds;
        tr.subdatasets.clear();
        te.subdatasets.clear();
        for (const auto& sd : ds.subdatasets) (sd.split == Split::kTrain ? tr : te).subdatasets.push_back(sd);
        if (!tr.subdatasets.empty()) train.datasets.push_back(std::move(tr));
        if (!te.subdatasets.empty()) test.datasets.push_back(std::move(te));
    }
    return {std::move(train), std::move(test)};
}

}  // namespace mphd
