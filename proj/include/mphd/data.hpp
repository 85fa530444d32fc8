#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mphd/context.hpp"
#include "mphd/gp.hpp"
#include "mphd/priors.hpp"

namespace mphd {

enum class Split { kUnassigned, kTrain, kTest };

std::string to_string(Split split);
Split split_from_string(const std::string& s);

struct LabeledSubDataset {
    std::string id;
    SubDataset data;
    Split split = Split::kUnassigned;
};

/// Ground truth recorded by the synthetic generator.
struct GroundTruth {
    GpParams params;
    GpPrior prior;
    Smoothness nu = Smoothness::kNu52;
};

/// Observations on functions sharing one domain.
struct Dataset {
    std::string id;
    DomainDescriptor domain;
    std::vector<LabeledSubDataset> subdatasets;
    std::optional<GroundTruth> ground_truth;

    std::size_t dim() const { return domain.dim(); }

    /// Sub-datasets used for pre-training: those labeled train, or all of them when none
    /// carries a train/test label.
    std::vector<SubDataset> training_subdatasets() const;
    std::vector<const LabeledSubDataset*> test_subdatasets() const;
    std::vector<SubDataset> all_subdatasets() const;
};

/// Min-max bookkeeping for one dataset, enough to invert normalization.
struct DatasetNormalization {
    std::string dataset_id;
    std::vector<double> input_min;
    std::vector<double> input_max;
    std::vector<bool> input_degenerate;
    // One entry per dataset (granularity "dataset") or per sub-dataset ("subdataset").
    std::vector<double> output_min;
    std::vector<double> output_max;
    std::vector<bool> output_degenerate;
};

struct NormalizationInfo {
    std::string output_granularity = "dataset";
    std::vector<DatasetNormalization> datasets;
};

struct SuperDataset {
    bool normalized = false;
    std::vector<Dataset> datasets;
    std::optional<NormalizationInfo> normalization;

    const Dataset* find(const std::string& id) const;
    /// Throws kSchema if inputs and domains disagree or values are not finite.
    void validate() const;
};

}  // namespace mphd
