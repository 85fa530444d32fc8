#include "mphd/codec.hpp"

#include <cmath>

#include "mphd/error.hpp"

namespace mphd {

using nlohmann::json;

void check_header(const json& j, const std::string& format, int version) {
    if (!j.is_object() || !j.contains("format") || !j.at("format").is_string()) {
        throw Error(ErrorCode::kMalformed, "missing 'format' tag (expected '" + format + "')");
    }
    if (j.at("format").get<std::string>() != format) {
        throw Error(ErrorCode::kMalformed,
                    "format is '" + j.at("format").get<std::string>() + "', expected '" + format + "'");
    }
    if (!j.contains("version") || !j.at("version").is_number_integer()) {
        throw Error(ErrorCode::kMalformed, "missing integer 'version' tag");
    }
    const int found = j.at("version").get<int>();
    if (found != version) {
        throw Error(ErrorCode::kVersion, format + " version " + std::to_string(found) +
                                             " is not supported (expected " + std::to_string(version) + ")");
    }
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::kSchema, path + ": missing field '" + key + "'");
    }
    return j.at(key);
}

double require_number(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number()) throw Error(ErrorCode::kSchema, path + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(ErrorCode::kSchema, path + "." + key + ": value is not finite");
    return x;
}

std::string require_string(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_string()) throw Error(ErrorCode::kSchema, path + "." + key + ": expected a string");
    return v.get<std::string>();
}

json prior_to_json(const PriorFamily& prior) {
    if (const auto* g = std::get_if<Gamma>(&prior)) {
        return {{"family", "gamma"}, {"shape", g->shape}, {"rate", g->rate}};
    }
    if (const auto* n = std::get_if<Normal>(&prior)) {
        return {{"family", "normal"}, {"mean", n->mean}, {"stddev", n->stddev}};
    }
    const auto& u = std::get<Uniform>(prior);
    return {{"family", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
}

PriorFamily prior_from_json(const json& j, const std::string& path) {
    const std::string family = require_string(j, "family", path);
    PriorFamily prior;
    if (family == "gamma") {
        prior = Gamma{require_number(j, "shape", path), require_number(j, "rate", path)};
    } else if (family == "normal") {
        prior = Normal{require_number(j, "mean", path), require_number(j, "stddev", path)};
    } else if (family == "uniform") {
        prior = Uniform{require_number(j, "lo", path), require_number(j, "hi", path)};
    } else {
        throw Error(ErrorCode::kSchema, path + ".family: unknown prior family '" + family + "'");
    }
    try {
        validate(prior);
    } catch (const Error& e) {
        throw Error(ErrorCode::kSchema, path + ": " + e.what());
    }
    return prior;
}

Gamma gamma_from_json(const json& j, const std::string& path) {
    const PriorFamily p = prior_from_json(j, path);
    if (!std::holds_alternative<Gamma>(p)) throw Error(ErrorCode::kSchema, path + ": expected a gamma prior");
    return std::get<Gamma>(p);
}

Normal normal_from_json(const json& j, const std::string& path) {
    const PriorFamily p = prior_from_json(j, path);
    if (!std::holds_alternative<Normal>(p)) throw Error(ErrorCode::kSchema, path + ": expected a normal prior");
    return std::get<Normal>(p);
}

json gp_params_to_json(const GpParams& params) {
    return {{"constant_mean", params.constant_mean},
            {"length_scales", std::vector<double>(params.length_scales.data(),
                                                  params.length_scales.data() + params.length_scales.size())},
            {"signal_variance", params.signal_variance},
            {"noise_variance", params.noise_variance}};
}

GpParams gp_params_from_json(const json& j, const std::string& path) {
    GpParams p;
    p.constant_mean = require_number(j, "constant_mean", path);
    const json& ls = require(j, "length_scales", path);
    if (!ls.is_array() || ls.empty()) throw Error(ErrorCode::kSchema, path + ".length_scales: expected a nonempty array");
    p.length_scales.resize(static_cast<Eigen::Index>(ls.size()));
    for (std::size_t i = 0; i < ls.size(); ++i) {
        if (!ls[i].is_number()) throw Error(ErrorCode::kSchema, path + ".length_scales: expected numbers");
        p.length_scales[static_cast<Eigen::Index>(i)] = ls[i].get<double>();
    }
    p.signal_variance = require_number(j, "signal_variance", path);
    p.noise_variance = require_number(j, "noise_variance", path);
    try {
        p.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::kSchema, path + ": " + e.what());
    }
    return p;
}

json gp_prior_to_json(const GpPrior& prior) {
    json ls = json::array();
    for (const PriorFamily& p : prior.length_scales) ls.push_back(prior_to_json(p));
    return {{"constant_mean", prior_to_json(prior.constant_mean)},
            {"length_scales", ls},
            {"signal_variance", prior_to_json(prior.signal_variance)},
            {"noise_variance", prior_to_json(prior.noise_variance)}};
}

GpPrior gp_prior_from_json(const json& j, const std::string& path) {
    GpPrior prior;
    prior.constant_mean = prior_from_json(require(j, "constant_mean", path), path + ".constant_mean");
    const json& ls = require(j, "length_scales", path);
    if (!ls.is_array()) throw Error(ErrorCode::kSchema, path + ".length_scales: expected an array");
    for (std::size_t i = 0; i < ls.size(); ++i) {
        prior.length_scales.push_back(prior_from_json(ls[i], path + ".length_scales[" + std::to_string(i) + "]"));
    }
    prior.signal_variance = prior_from_json(require(j, "signal_variance", path), path + ".signal_variance");
    prior.noise_variance = prior_from_json(require(j, "noise_variance", path), path + ".noise_variance");
    return prior;
}

json domain_to_json(const DomainDescriptor& domain) {
    json dims = json::array();
    for (const DimSpec& d : domain.dims) {
        json entry = {{"kind", to_string(d.kind)}};
        if (d.bounds) entry["bounds"] = {d.bounds->first, d.bounds->second};
        dims.push_back(entry);
    }
    return {{"dims", dims}};
}

DomainDescriptor domain_from_json(const json& j, const std::string& path) {
    DomainDescriptor domain;
    const json& dims = require(j, "dims", path);
    if (!dims.is_array() || dims.empty()) throw Error(ErrorCode::kSchema, path + ".dims: expected a nonempty array");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const std::string p = path + ".dims[" + std::to_string(i) + "]";
        DimSpec spec;
        try {
            spec.kind = dim_kind_from_string(require_string(dims[i], "kind", p));
        } catch (const Error& e) {
            throw Error(ErrorCode::kSchema, p + ": " + e.what());
        }
        if (dims[i].contains("bounds")) {
            const json& b = dims[i].at("bounds");
            if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
                throw Error(ErrorCode::kSchema, p + ".bounds: expected [lo, hi]");
            }
            spec.bounds = std::make_pair(b[0].get<double>(), b[1].get<double>());
        }
        domain.dims.push_back(spec);
    }
    return domain;
}

json phi_to_json(const PhiModel& phi) {
    json j;
    if (const auto* nn = std::get_if<NnPhi>(&phi.length_scale)) {
        json layers = json::array();
        for (const DenseLayer& layer : nn->layers) {
            json rows = json::array();
            for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
                std::vector<double> row(static_cast<std::size_t>(layer.weights.cols()));
                for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row[static_cast<std::size_t>(c)] = layer.weights(r, c);
                rows.push_back(row);
            }
            layers.push_back({{"weights", rows},
                              {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
        }
        j["kind"] = "nn";
        j["activation"] = "tanh";
        j["positivity"] = "softplus";
        j["count_scale"] = nn->count_scale;
        j["positivity_epsilon"] = nn->positivity_epsilon;
        j["layers"] = layers;
    } else {
        j["kind"] = "constant";
        j["length_scale"] = prior_to_json(std::get<ConstantPhi>(phi.length_scale).length_scale);
    }
    j["shared_priors"] = {{"constant_mean", prior_to_json(phi.shared.constant_mean)},
                          {"signal_variance", prior_to_json(phi.shared.signal_variance)},
                          {"noise_variance", prior_to_json(phi.shared.noise_variance)}};
    return j;
}

PhiModel phi_from_json(const json& j) {
    const std::string path = "phi";
    PhiModel phi;
    try {
        const std::string kind = require_string(j, "kind", path);
        if (kind == "nn") {
            NnPhi nn = NnPhi::zeros();
            nn.count_scale = require_number(j, "count_scale", path);
            nn.positivity_epsilon = require_number(j, "positivity_epsilon", path);
            const json& layers = require(j, "layers", path);
            if (!layers.is_array() || layers.size() != nn.layers.size()) {
                throw Error(ErrorCode::kMalformed, "phi.layers: expected 3 layers");
            }
            for (std::size_t l = 0; l < layers.size(); ++l) {
                DenseLayer& layer = nn.layers[l];
                const json& rows = require(layers[l], "weights", path);
                const json& bias = require(layers[l], "bias", path);
                if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != layer.weights.rows() ||
                    !bias.is_array() || static_cast<Eigen::Index>(bias.size()) != layer.bias.size()) {
                    throw Error(ErrorCode::kMalformed, "phi.layers[" + std::to_string(l) + "]: wrong shape");
                }
                for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
                    const json& row = rows[static_cast<std::size_t>(r)];
                    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != layer.weights.cols()) {
                        throw Error(ErrorCode::kMalformed, "phi.layers[" + std::to_string(l) + "]: wrong row width");
                    }
                    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
                        layer.weights(r, c) = row[static_cast<std::size_t>(c)].get<double>();
                    }
                    layer.bias[r] = bias[static_cast<std::size_t>(r)].get<double>();
                }
            }
            phi.length_scale = std::move(nn);
        } else if (kind == "constant") {
            phi.length_scale = ConstantPhi{gamma_from_json(require(j, "length_scale", path), path + ".length_scale")};
        } else {
            throw Error(ErrorCode::kMalformed, "phi.kind: unknown kind '" + kind + "'");
        }
        const json& shared = require(j, "shared_priors", path);
        phi.shared.constant_mean = normal_from_json(require(shared, "constant_mean", path), path + ".shared_priors.constant_mean");
        phi.shared.signal_variance = gamma_from_json(require(shared, "signal_variance", path), path + ".shared_priors.signal_variance");
        phi.shared.noise_variance = gamma_from_json(require(shared, "noise_variance", path), path + ".shared_priors.noise_variance");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformed, std::string("phi: ") + e.what());
    }
    return phi;
}

std::string to_string(Smoothness nu) { return nu == Smoothness::kNu52 ? "5/2" : "3/2"; }

Smoothness smoothness_from_string(const std::string& s) {
    if (s == "5/2" || s == "2.5") return Smoothness::kNu52;
    if (s == "3/2" || s == "1.5") return Smoothness::kNu32;
    throw Error(ErrorCode::kInvalidArgument, "unsupported smoothness '" + s + "' (expected 3/2 or 5/2)");
}

}  // namespace mphd
