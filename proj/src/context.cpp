#include "mphd/context.hpp"

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

#include "mphd/codec.hpp"
#include "mphd/error.hpp"

namespace mphd {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Eigen::Vector4d standardize(const ContextVector& c, double count_scale) {
    return Eigen::Vector4d(c[0], c[1], c[2] / count_scale, c[3] / count_scale);
}

void check_network(const NnPhi& phi) {
    if (phi.layers.size() != 3 || phi.layers[0].weights.rows() != NnPhi::kHidden ||
        phi.layers[0].weights.cols() != NnPhi::kInput || phi.layers[1].weights.rows() != NnPhi::kHidden ||
        phi.layers[1].weights.cols() != NnPhi::kHidden || phi.layers[2].weights.rows() != NnPhi::kOutput ||
        phi.layers[2].weights.cols() != NnPhi::kHidden) {
        throw Error(ErrorCode::kInvalidArgument, "NnPhi must be a 4-16-16-2 network");
    }
    for (const DenseLayer& layer : phi.layers) {
        if (layer.bias.size() != layer.weights.rows()) {
            throw Error(ErrorCode::kInvalidArgument, "NnPhi bias size does not match layer width");
        }
        if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
            throw Error(ErrorCode::kInvalidArgument, "NnPhi weights must be finite");
        }
    }
    if (!(phi.count_scale > 0.0) || !(phi.positivity_epsilon > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "NnPhi scale and epsilon must be positive");
    }
}

struct ForwardPass {
    Eigen::Vector4d input;
    Eigen::VectorXd h1;
    Eigen::VectorXd h2;
    Eigen::Vector2d out;
};

ForwardPass forward(const NnPhi& phi, const ContextVector& context) {
    ForwardPass f;
    f.input = standardize(context, phi.count_scale);
    f.h1 = (phi.layers[0].weights * f.input + phi.layers[0].bias).array().tanh();
    f.h2 = (phi.layers[1].weights * f.h1 + phi.layers[1].bias).array().tanh();
    f.out = phi.layers[2].weights * f.h2 + phi.layers[2].bias;
    return f;
}

}  // namespace

DomainDescriptor DomainDescriptor::all_continuous(std::size_t d) {
    DomainDescriptor domain;
    domain.dims.assign(d, DimSpec{DimKind::kContinuous, std::nullopt});
    return domain;
}

std::vector<ContextVector> encode_contexts(const DomainDescriptor& domain) {
    if (domain.dims.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "encode_contexts: domain has no dimensions");
    }
    double n_discrete = 0.0;
    double n_continuous = 0.0;
    for (const DimSpec& dim : domain.dims) {
        (dim.kind == DimKind::kDiscrete ? n_discrete : n_continuous) += 1.0;
    }
    std::vector<ContextVector> contexts;
    contexts.reserve(domain.dims.size());
    for (const DimSpec& dim : domain.dims) {
        const bool discrete = dim.kind == DimKind::kDiscrete;
        contexts.push_back({discrete ? 1.0 : 0.0, discrete ? 0.0 : 1.0, n_discrete, n_continuous});
    }
    return contexts;
}

NnPhi NnPhi::zeros() {
    NnPhi phi;
    phi.layers = {
        DenseLayer{Eigen::MatrixXd::Zero(kHidden, kInput), Eigen::VectorXd::Zero(kHidden)},
        DenseLayer{Eigen::MatrixXd::Zero(kHidden, kHidden), Eigen::VectorXd::Zero(kHidden)},
        DenseLayer{Eigen::MatrixXd::Zero(kOutput, kHidden), Eigen::VectorXd::Zero(kOutput)},
    };
    return phi;
}

NnPhi NnPhi::initialize(Rng& rng) {
    NnPhi phi = zeros();
    for (DenseLayer& layer : phi.layers) {
        const double limit =
            std::sqrt(6.0 / static_cast<double>(layer.weights.rows() + layer.weights.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = dist(rng);
        }
    }
    return phi;
}

std::size_t NnPhi::num_parameters() const {
    std::size_t n = 0;
    for (const DenseLayer& layer : layers) n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
    return n;
}

Eigen::VectorXd NnPhi::parameters() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(num_parameters()));
    Eigen::Index k = 0;
    for (const DenseLayer& layer : layers) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) flat[k++] = layer.weights(r, c);
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat[k++] = layer.bias[r];
    }
    return flat;
}

void NnPhi::set_parameters(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != num_parameters()) {
        throw Error(ErrorCode::kDimensionMismatch, "NnPhi::set_parameters: wrong vector length");
    }
    Eigen::Index k = 0;
    for (DenseLayer& layer : layers) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = flat[k++];
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = flat[k++];
    }
}

Gamma phi_forward(const NnPhi& phi, const ContextVector& context) {
    check_network(phi);
    const ForwardPass f = forward(phi, context);
    return Gamma{softplus(f.out[0]) + phi.positivity_epsilon, softplus(f.out[1]) + phi.positivity_epsilon};
}

Gamma phi_forward(const PhiModel& phi, const ContextVector& context) {
    if (const auto* nn = std::get_if<NnPhi>(&phi.length_scale)) return phi_forward(*nn, context);
    return std::get<ConstantPhi>(phi.length_scale).length_scale;
}

GpPrior gp_prior_for_domain(const PhiModel& phi, const DomainDescriptor& domain) {
    GpPrior prior;
    prior.constant_mean = phi.shared.constant_mean;
    prior.signal_variance = phi.shared.signal_variance;
    prior.noise_variance = phi.shared.noise_variance;
    for (const ContextVector& c : encode_contexts(domain)) prior.length_scales.emplace_back(phi_forward(phi, c));
    return prior;
}

PhiObjective phi_objective_and_grad(const NnPhi& phi, std::span<const PhiPair> pairs) {
    check_network(phi);
    if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "phi objective needs at least one pair");

    const DenseLayer& l1 = phi.layers[0];
    const DenseLayer& l2 = phi.layers[1];
    const DenseLayer& l3 = phi.layers[2];
    Eigen::MatrixXd g_w1 = Eigen::MatrixXd::Zero(l1.weights.rows(), l1.weights.cols());
    Eigen::MatrixXd g_w2 = Eigen::MatrixXd::Zero(l2.weights.rows(), l2.weights.cols());
    Eigen::MatrixXd g_w3 = Eigen::MatrixXd::Zero(l3.weights.rows(), l3.weights.cols());
    Eigen::VectorXd g_b1 = Eigen::VectorXd::Zero(l1.bias.size());
    Eigen::VectorXd g_b2 = Eigen::VectorXd::Zero(l2.bias.size());
    Eigen::VectorXd g_b3 = Eigen::VectorXd::Zero(l3.bias.size());

    PhiObjective out;
    for (const PhiPair& pair : pairs) {
        if (!(pair.value > 0.0) || !std::isfinite(pair.value)) {
            throw Error(ErrorCode::kDomain, "phi objective: length-scale values must be positive");
        }
        const ForwardPass f = forward(phi, pair.context);
        const double a = softplus(f.out[0]) + phi.positivity_epsilon;
        const double b = softplus(f.out[1]) + phi.positivity_epsilon;
        const double log_x = std::log(pair.value);
        const double log_b = std::log(b);
        out.value -= a * log_b - std::lgamma(a) + (a - 1.0) * log_x - b * pair.value;

        const double d_a = -(log_b - boost::math::digamma(a) + log_x);
        const double d_b = -(a / b - pair.value);
        const Eigen::Vector2d d_out(d_a * sigmoid(f.out[0]), d_b * sigmoid(f.out[1]));

        g_w3.noalias() += d_out * f.h2.transpose();
        g_b3 += d_out;
        const Eigen::VectorXd d_a2 = (l3.weights.transpose() * d_out).array() * (1.0 - f.h2.array().square());
        g_w2.noalias() += d_a2 * f.h1.transpose();
        g_b2 += d_a2;
        const Eigen::VectorXd d_a1 = (l2.weights.transpose() * d_a2).array() * (1.0 - f.h1.array().square());
        g_w1.noalias() += d_a1 * f.input.transpose();
        g_b1 += d_a1;
    }

    NnPhi grad_net = NnPhi::zeros();
    grad_net.layers[0] = DenseLayer{g_w1, g_b1};
    grad_net.layers[1] = DenseLayer{g_w2, g_b2};
    grad_net.layers[2] = DenseLayer{g_w3, g_b3};
    out.gradient = grad_net.parameters();
    return out;
}

std::string serialize_phi(const PhiModel& phi) {
    nlohmann::json j = {{"format", "mphd-phi"}, {"version", kPhiFormatVersion}, {"phi", phi_to_json(phi)}};
    return j.dump(1) + "\n";
}

PhiModel deserialize_phi(const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kMalformed, std::string("phi file: ") + e.what());
    }
    check_header(j, "mphd-phi", kPhiFormatVersion);
    if (!j.contains("phi")) throw Error(ErrorCode::kMalformed, "phi file: missing 'phi'");
    return phi_from_json(j.at("phi"));
}

std::string to_string(DimKind kind) { return kind == DimKind::kDiscrete ? "discrete" : "continuous"; }

DimKind dim_kind_from_string(const std::string& s) {
    if (s == "discrete") return DimKind::kDiscrete;
    if (s == "continuous") return DimKind::kContinuous;
    throw Error(ErrorCode::kSchema, "unknown dimension kind '" + s + "'");
}

std::string to_string(PhiKind kind) { return kind == PhiKind::kNn ? "nn" : "constant"; }

PhiKind phi_kind_from_string(const std::string& s) {
    if (s == "nn") return PhiKind::kNn;
    if (s == "constant") return PhiKind::kConstant;
    throw Error(ErrorCode::kInvalidArgument, "unknown phi kind '" + s + "' (expected nn|constant)");
}

}  // namespace mphd
