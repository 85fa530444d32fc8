#include "mphd/data.hpp"

#include <cmath>

#include "mphd/error.hpp"

namespace mphd {

std::string to_string(Split split) {
    switch (split) {
        case Split::kTrain: return "train";
        case Split::kTest: return "test";
        case Split::kUnassigned: break;
    }
    return "unassigned";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::kTrain;
    if (s == "test") return Split::kTest;
    if (s == "unassigned") return Split::kUnassigned;
    throw Error(ErrorCode::kSchema, "unknown split label '" + s + "'");
}

std::vector<SubDataset> Dataset::training_subdatasets() const {
    bool any_labeled = false;
    for (const auto& sd : subdatasets) any_labeled |= sd.split != Split::kUnassigned;
    std::vector<SubDataset> out;
    for (const auto& sd : subdatasets) {
        if (!any_labeled || sd.split == Split::kTrain) out.push_back(sd.data);
    }
    return out;
}

std::vector<const LabeledSubDataset*> Dataset::test_subdatasets() const {
    std::vector<const LabeledSubDataset*> out;
    for (const auto& sd : subdatasets) {
        if (sd.split == Split::kTest) out.push_back(&sd);
    }
    return out;
}

std::vector<SubDataset> Dataset::all_subdatasets() const {
    std::vector<SubDataset> out;
    out.reserve(subdatasets.size());
    for (const auto& sd : subdatasets) out.push_back(sd.data);
    return out;
}

const Dataset* SuperDataset::find(const std::string& id) const {
    for (const Dataset& d : datasets) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

void SuperDataset::validate() const {
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        const Dataset& ds = datasets[i];
        const std::string path = "datasets[" + std::to_string(i) + "]";
        if (ds.domain.dims.empty()) throw Error(ErrorCode::kSchema, path + ".domain: no dimensions");
        for (std::size_t j = 0; j < ds.subdatasets.size(); ++j) {
            const SubDataset& sd = ds.subdatasets[j].data;
            const std::string sp = path + ".subdatasets[" + std::to_string(j) + "]";
            if (sd.inputs.rows() != sd.outputs.size()) {
                throw Error(ErrorCode::kSchema, sp + ": " + std::to_string(sd.inputs.rows()) + " input rows but " +
                                                    std::to_string(sd.outputs.size()) + " outputs");
            }
            if (sd.outputs.size() > 0 && static_cast<std::size_t>(sd.inputs.cols()) != ds.dim()) {
                throw Error(ErrorCode::kSchema, sp + ".inputs: rows have width " + std::to_string(sd.inputs.cols()) +
                                                    " but the domain has " + std::to_string(ds.dim()) + " dimensions");
            }
            if (!sd.inputs.allFinite() || !sd.outputs.allFinite()) {
                throw Error(ErrorCode::kSchema, sp + ": non-finite value");
            }
            if (normalized && sd.inputs.size() > 0 &&
                (sd.inputs.minCoeff() < 0.0 || sd.inputs.maxCoeff() > 1.0)) {
                throw Error(ErrorCode::kSchema, sp + ".inputs: normalized flag set but values leave [0, 1]");
            }
        }
        if (ds.ground_truth && ds.ground_truth->params.dim() != ds.dim()) {
            throw Error(ErrorCode::kSchema, path + ".ground_truth: length-scale count does not match the domain");
        }
    }
}

}  // namespace mphd
