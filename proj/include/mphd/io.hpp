#pragma once

// Text file formats (JSON with a format/version header), normalization and artifact hashing.
// Layouts are documented in README.md.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "mphd/bo.hpp"
#include "mphd/data.hpp"
#include "mphd/pretrain.hpp"

namespace mphd {

/// Hex FNV-1a 64 of the bytes.
std::string content_hash(std::string_view bytes);

std::string read_text(const std::filesystem::path& path);
/// Writes to a unique sibling temp file, then renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Parses JSON, turning syntax errors into kMalformed with line and column.
nlohmann::json parse_json(const std::string& text, const std::string& what);

nlohmann::json superdataset_to_json(const SuperDataset& superdataset);
SuperDataset superdataset_from_json(const nlohmann::json& j);
std::string encode_superdataset(const SuperDataset& superdataset);
SuperDataset decode_superdataset(const std::string& text);
void write_superdataset(const std::filesystem::path& path, const SuperDataset& superdataset);
SuperDataset read_superdataset(const std::filesystem::path& path);

nlohmann::json pretrain_config_to_json(const PretrainConfig& cfg);
PretrainConfig pretrain_config_from_json(const nlohmann::json& j, const std::string& path);

std::string encode_model(const PretrainedModel& model);
PretrainedModel decode_model(const std::string& text);
void write_model(const std::filesystem::path& path, const PretrainedModel& model);
PretrainedModel read_model(const std::filesystem::path& path);

struct ResultsProvenance {
    std::vector<std::string> model_hashes;
    std::string dataset_hash;
    nlohmann::json config;
};

struct ResultsFile {
    ExperimentConfig config;
    ExperimentResult result;
    ResultsProvenance provenance;
};

std::string encode_results(const ResultsFile& results);
ResultsFile decode_results(const std::string& text);

/// Plot-ready table: method, iteration, mean, std; one row per (method, iteration).
std::string curves_to_delimited(const ExperimentResult& result, char delimiter);

enum class OutputGranularity { kDataset, kSubdataset };

/// Min-max normalizes inputs per dimension over each dataset and outputs per dataset (or per
/// sub-dataset). Degenerate ranges map to 0.5 and are flagged. Ground truth is dropped since
/// it describes the raw scale.
SuperDataset normalize_superdataset(const SuperDataset& raw, OutputGranularity granularity = OutputGranularity::kDataset);

/// Inverse of normalize_superdataset using the stored metadata.
SuperDataset denormalize_superdataset(const SuperDataset& normalized);

}  // namespace mphd
