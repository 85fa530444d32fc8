#pragma once

// Bayesian optimization driver: acquisitions, MAP refits against a fixed prior, candidate
// selection on tabular and continuous oracles, baselines and regret bookkeeping.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mphd/pretrain.hpp"

namespace mphd {

enum class AcquisitionKind { kPi, kEi, kUcb };

struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::kPi;
    double zeta = 0.1;  // PI target offset
    double beta = 3.0;  // UCB exploration weight
    /// UCB = mu + sqrt(beta) sigma when true, mu + beta sigma otherwise.
    bool ucb_sqrt_beta = true;

    void validate() const;
};

std::string to_string(AcquisitionKind kind);
AcquisitionKind acquisition_kind_from_string(const std::string& s);

/// Maximization form: larger is better. sigma is the latent predictive standard deviation.
double acquisition_value(const AcquisitionSpec& spec, double mu, double sigma, double y_best);

struct TabularOracle {
    Eigen::MatrixXd candidates;  // n x d
    Eigen::VectorXd values;      // n
};

struct ContinuousOracle {
    std::function<double(const Eigen::VectorXd&)> function;  // over [0, 1]^d
    std::optional<double> y_max;
};

struct ObjectiveOracle {
    DomainDescriptor domain;
    std::variant<TabularOracle, ContinuousOracle> source;
    /// Value range used to scale regret to [0, 1].
    double value_lo = 0.0;
    double value_hi = 1.0;

    static ObjectiveOracle tabular(const SubDataset& table, DomainDescriptor domain);
    /// Tabular oracle whose regret range is the table's own min and max.
    static ObjectiveOracle tabular_self_scaled(const SubDataset& table, DomainDescriptor domain);

    std::size_t dim() const { return domain.dim(); }
    bool is_tabular() const { return std::holds_alternative<TabularOracle>(source); }
    std::optional<double> y_max() const;
    void validate() const;
};

enum class MethodKind {
    kMphdStandard,
    kMphdNonNn,
    kBaseGp,
    kHandSpecifiedHgp,
    kNonInformativeHgp,
    kGroundTruthHgp,
    kGroundTruthGp,
    kRandom,
};

std::string to_string(MethodKind kind);
MethodKind method_kind_from_string(const std::string& s);

/// A method with its surrogate resolved for one test domain: a prior for MAP-refit methods,
/// fixed parameters for BaseGp and GroundTruthGp, nothing for Random.
struct MethodSpec {
    MethodKind kind = MethodKind::kRandom;
    Smoothness nu = Smoothness::kNu52;
    std::optional<GpPrior> prior;
    std::optional<GpParams> params;

    bool refits() const { return prior.has_value(); }
    void validate(std::size_t dim) const;
};

struct MapRefitConfig {
    int iterations = 100;
    /// Seeded draws from the prior in addition to the prior-mode start.
    int restarts = 1;
    ParameterBox box;
};

/// Prior modes, clamped into the box.
GpParams prior_mode_params(const GpPrior& prior, const ParameterBox& box);

/// Maximizes log p(y | theta) + sum log p(theta_h) over theta with L-BFGS in log coordinates.
/// The prior density is taken over theta itself, so with no observations the result is the
/// componentwise prior mode.
GpParams map_refit(const SubDataset& observations, const GpPrior& prior, Smoothness nu,
                   const MapRefitConfig& cfg, Rng& rng);

/// Negative log posterior (up to a constant) used by map_refit; +infinity outside the support.
double map_objective(const SubDataset& observations, const GpPrior& prior, Smoothness nu, const GpParams& params);

struct Proposal {
    Eigen::VectorXd x;
    std::optional<std::size_t> candidate;  // tabular index
};

/// Tabular: argmax over candidates with observed[i] false, ties to the lowest index.
/// Continuous: best of 2000 uniform draws, ties to the first draw.
Proposal propose_next(const AcquisitionSpec& acq, const GpParams& params, Smoothness nu,
                      const SubDataset& observations, const ObjectiveOracle& oracle,
                      const std::vector<bool>& observed, Rng& rng);

struct BoConfig {
    int budget = 100;
    int n_init = 5;
    std::uint64_t seed = 0;
    /// Separates initial designs of different tasks that share a seed.
    std::uint64_t task_key = 0;
    int continuous_candidates = 2000;
    MapRefitConfig map;

    void validate() const;
};

struct TraceObservation {
    Eigen::VectorXd x;
    double y = 0.0;
    int iteration = 0;  // 0 for initial observations
    bool initial = false;
    std::optional<std::size_t> candidate;
};

struct BoTrace {
    std::string method;
    std::uint64_t seed = 0;
    std::vector<TraceObservation> observations;  // n_init + budget entries
    std::vector<double> incumbent;               // budget + 1 entries
    std::vector<double> regret;                  // budget + 1 entries
};

BoTrace run_bo(const MethodSpec& method, const AcquisitionSpec& acq, const ObjectiveOracle& oracle,
               const BoConfig& cfg);

/// Regret after each BO iteration: (y_max - best so far) / (value_hi - value_lo), where
/// entry 0 is the state after the initial design.
std::vector<double> normalized_simple_regret(const BoTrace& trace, const ObjectiveOracle& oracle);

/// The same quantity after every individual observation.
std::vector<double> regret_per_observation(std::span<const double> ys, const ObjectiveOracle& oracle);

enum class Setting { kDefault, kNtot };

std::string to_string(Setting s);
Setting setting_from_string(const std::string& s);

struct ExperimentConfig {
    std::vector<MethodKind> methods;
    Setting setting = Setting::kDefault;
    AcquisitionSpec acquisition;
    std::vector<std::uint64_t> seeds{0};
    int budget = 100;
    int n_init = 5;
    Smoothness nu = Smoothness::kNu52;
    MapRefitConfig map;
};

struct RunRecord {
    std::string dataset_id;
    std::string subdataset_id;
    std::uint64_t seed = 0;
    std::vector<double> regret;
};

struct MethodCurve {
    MethodKind method = MethodKind::kRandom;
    std::vector<double> mean;
    std::vector<double> stddev;  // population standard deviation across runs
    std::vector<RunRecord> runs;
};

struct ExperimentResult {
    std::vector<MethodCurve> curves;
};

/// Picks the pre-trained model a method uses on a test dataset. Default setting: the model of
/// the right phi kind with no exclusions. NToT: the model of that kind that excluded the dataset.
const PretrainedModel& select_model(std::span<const PretrainedModel> models, PhiKind kind, Setting setting,
                                    const std::string& dataset_id);

MethodSpec resolve_method(MethodKind kind, const Dataset& dataset, std::span<const PretrainedModel> models,
                          Setting setting, Smoothness nu);

/// run_bo over every test sub-dataset x seed x method, aggregated per method.
ExperimentResult run_experiment(const SuperDataset& superdataset, std::span<const PretrainedModel> models,
                                const ExperimentConfig& cfg);

}  // namespace mphd
