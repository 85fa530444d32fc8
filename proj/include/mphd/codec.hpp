#pragma once

// JSON encodings shared by the model, super-dataset and results files.

#include <string>

#include "json.hpp"

#include "mphd/context.hpp"
#include "mphd/gp.hpp"
#include "mphd/priors.hpp"

namespace mphd {

inline constexpr int kPhiFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kSuperDatasetFormatVersion = 1;
inline constexpr int kResultsFormatVersion = 1;

/// Throws kMalformed when `format` is missing or different and kVersion when the version differs.
void check_header(const nlohmann::json& j, const std::string& format, int version);

nlohmann::json prior_to_json(const PriorFamily& prior);
PriorFamily prior_from_json(const nlohmann::json& j, const std::string& path);
Gamma gamma_from_json(const nlohmann::json& j, const std::string& path);
Normal normal_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json gp_params_to_json(const GpParams& params);
GpParams gp_params_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json gp_prior_to_json(const GpPrior& prior);
GpPrior gp_prior_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json domain_to_json(const DomainDescriptor& domain);
DomainDescriptor domain_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json phi_to_json(const PhiModel& phi);
PhiModel phi_from_json(const nlohmann::json& j);

std::string to_string(Smoothness nu);
Smoothness smoothness_from_string(const std::string& s);

/// Field access with schema diagnostics that name the offending path.
const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& path);
double require_number(const nlohmann::json& j, const std::string& key, const std::string& path);
std::string require_string(const nlohmann::json& j, const std::string& key, const std::string& path);

}  // namespace mphd
