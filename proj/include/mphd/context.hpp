#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mphd/priors.hpp"
#include "mphd/rng.hpp"

namespace mphd {

enum class DimKind { kDiscrete, kContinuous };

struct DimSpec {
    DimKind kind = DimKind::kContinuous;
    std::optional<std::pair<double, double>> bounds;  // raw (pre-normalization) range
    bool operator==(const DimSpec&) const = default;
};

struct DomainDescriptor {
    std::vector<DimSpec> dims;

    std::size_t dim() const { return dims.size(); }
    static DomainDescriptor all_continuous(std::size_t d);
    bool operator==(const DomainDescriptor&) const = default;
};

/// (is_discrete, is_continuous, n_discrete, n_continuous) for one length-scale.
using ContextVector = std::array<double, 4>;

std::vector<ContextVector> encode_contexts(const DomainDescriptor& domain);

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
};

/// Feed-forward 4 -> 16 -> 16 -> 2 network with tanh hidden units. The count entries of the
/// context are divided by `count_scale` before the first layer and both outputs pass through
/// softplus(z) + positivity_epsilon to give (shape, rate).
struct NnPhi {
    std::vector<DenseLayer> layers;
    double count_scale = 20.0;
    double positivity_epsilon = 1e-4;

    static constexpr int kInput = 4;
    static constexpr int kHidden = 16;
    static constexpr int kOutput = 2;

    /// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
    static NnPhi initialize(Rng& rng);
    static NnPhi zeros();

    std::size_t num_parameters() const;
    /// Flattened layer by layer: weights row-major, then bias.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& flat);
};

/// The same length-scale Gamma for every context.
struct ConstantPhi {
    Gamma length_scale;
};

/// Priors learned without a network for the remaining GP parameter types.
struct SharedPriors {
    Normal constant_mean;
    Gamma signal_variance;
    Gamma noise_variance;
    bool operator==(const SharedPriors&) const = default;
};

enum class PhiKind { kNn, kConstant };

struct PhiModel {
    std::variant<NnPhi, ConstantPhi> length_scale;
    SharedPriors shared;

    PhiKind kind() const {
        return std::holds_alternative<NnPhi>(length_scale) ? PhiKind::kNn : PhiKind::kConstant;
    }
};

Gamma phi_forward(const NnPhi& phi, const ContextVector& context);
Gamma phi_forward(const PhiModel& phi, const ContextVector& context);

/// Full GP prior for a domain: phi output per length-scale plus the shared priors.
GpPrior gp_prior_for_domain(const PhiModel& phi, const DomainDescriptor& domain);

struct PhiPair {
    ContextVector context;
    double value = 0.0;  // estimated length-scale
};

struct PhiObjective {
    double value = 0.0;
    Eigen::VectorXd gradient;  // over NnPhi::parameters()
};

/// -sum log Gamma(value | phi(context)) with exact backpropagation.
PhiObjective phi_objective_and_grad(const NnPhi& phi, std::span<const PhiPair> pairs);

/// Versioned JSON encoding of a PhiModel (see README for the layout).
std::string serialize_phi(const PhiModel& phi);
PhiModel deserialize_phi(const std::string& bytes);

std::string to_string(DimKind kind);
DimKind dim_kind_from_string(const std::string& s);
std::string to_string(PhiKind kind);
PhiKind phi_kind_from_string(const std::string& s);

}  // namespace mphd
