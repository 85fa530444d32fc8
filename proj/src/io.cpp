#include "mphd/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "mphd/codec.hpp"
#include "mphd/error.hpp"

namespace mphd {

using nlohmann::json;

namespace {

constexpr const char* kSuperDatasetFormat = "mphd-superdataset";
constexpr const char* kModelFormat = "mphd-model";
constexpr const char* kResultsFormat = "mphd-results";

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

std::vector<double> doubles_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw Error(ErrorCode::kSchema, path + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw Error(ErrorCode::kSchema, path + "[" + std::to_string(i) + "]: expected a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

SubDataset subdataset_from_json(const json& j, const std::string& path, std::size_t dim) {
    const json& inputs = require(j, "inputs", path);
    const std::vector<double> outputs = doubles_from_json(require(j, "outputs", path), path + ".outputs");
    if (!inputs.is_array()) throw Error(ErrorCode::kSchema, path + ".inputs: expected an array of rows");
    if (inputs.size() != outputs.size()) {
        throw Error(ErrorCode::kSchema, path + ": " + std::to_string(inputs.size()) + " input rows but " +
                                            std::to_string(outputs.size()) + " outputs");
    }
    SubDataset sd;
    sd.inputs.resize(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        const std::string rp = path + ".inputs[" + std::to_string(r) + "]";
        const std::vector<double> row = doubles_from_json(inputs[r], rp);
        if (row.size() != dim) {
            throw Error(ErrorCode::kSchema, rp + ": row has width " + std::to_string(row.size()) +
                                                " but the domain has " + std::to_string(dim) + " dimensions");
        }
        for (std::size_t c = 0; c < dim; ++c) {
            sd.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
    }
    sd.outputs = Eigen::Map<const Eigen::VectorXd>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
    return sd;
}

json bools_to_json(const std::vector<bool>& v) {
    json out = json::array();
    for (bool b : v) out.push_back(b);
    return out;
}

std::vector<bool> bools_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw Error(ErrorCode::kSchema, path + ": expected an array of booleans");
    std::vector<bool> out;
    for (const json& b : j) {
        if (!b.is_boolean()) throw Error(ErrorCode::kSchema, path + ": expected booleans");
        out.push_back(b.get<bool>());
    }
    return out;
}

json normalization_to_json(const NormalizationInfo& info) {
    json datasets = json::array();
    for (const DatasetNormalization& d : info.datasets) {
        datasets.push_back({{"dataset_id", d.dataset_id},
                            {"input_min", d.input_min},
                            {"input_max", d.input_max},
                            {"input_degenerate", bools_to_json(d.input_degenerate)},
                            {"output_min", d.output_min},
                            {"output_max", d.output_max},
                            {"output_degenerate", bools_to_json(d.output_degenerate)}});
    }
    return {{"output_granularity", info.output_granularity}, {"datasets", datasets}};
}

NormalizationInfo normalization_from_json(const json& j, const std::string& path) {
    NormalizationInfo info;
    info.output_granularity = require_string(j, "output_granularity", path);
    if (info.output_granularity != "dataset" && info.output_granularity != "subdataset") {
        throw Error(ErrorCode::kSchema, path + ".output_granularity: expected 'dataset' or 'subdataset'");
    }
    const json& ds = require(j, "datasets", path);
    if (!ds.is_array()) throw Error(ErrorCode::kSchema, path + ".datasets: expected an array");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::string p = path + ".datasets[" + std::to_string(i) + "]";
        DatasetNormalization d;
        d.dataset_id = require_string(ds[i], "dataset_id", p);
        d.input_min = doubles_from_json(require(ds[i], "input_min", p), p + ".input_min");
        d.input_max = doubles_from_json(require(ds[i], "input_max", p), p + ".input_max");
        d.input_degenerate = bools_from_json(require(ds[i], "input_degenerate", p), p + ".input_degenerate");
        d.output_min = doubles_from_json(require(ds[i], "output_min", p), p + ".output_min");
        d.output_max = doubles_from_json(require(ds[i], "output_max", p), p + ".output_max");
        d.output_degenerate = bools_from_json(require(ds[i], "output_degenerate", p), p + ".output_degenerate");
        info.datasets.push_back(std::move(d));
    }
    return info;
}

json estimate_to_json(const DatasetEstimate& e) {
    return {{"dataset_id", e.dataset_id}, {"domain", domain_to_json(e.domain)}, {"params", gp_params_to_json(e.params)},
            {"nll", e.nll}};
}

DatasetEstimate estimate_from_json(const json& j, const std::string& path) {
    DatasetEstimate e;
    e.dataset_id = require_string(j, "dataset_id", path);
    e.domain = domain_from_json(require(j, "domain", path), path + ".domain");
    e.params = gp_params_from_json(require(j, "params", path), path + ".params");
    e.nll = require_number(j, "nll", path);
    if (e.params.dim() != e.domain.dim()) {
        throw Error(ErrorCode::kSchema, path + ": parameter dimension does not match the domain");
    }
    return e;
}

template <typename T>
T require_integer(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number_integer()) throw Error(ErrorCode::kSchema, path + "." + key + ": expected an integer");
    return v.get<T>();
}

json acquisition_to_json(const AcquisitionSpec& a) {
    return {{"kind", to_string(a.kind)}, {"zeta", a.zeta}, {"beta", a.beta}, {"ucb_sqrt_beta", a.ucb_sqrt_beta}};
}

AcquisitionSpec acquisition_from_json(const json& j, const std::string& path) {
    AcquisitionSpec a;
    a.kind = acquisition_kind_from_string(require_string(j, "kind", path));
    a.zeta = require_number(j, "zeta", path);
    a.beta = require_number(j, "beta", path);
    const json& s = require(j, "ucb_sqrt_beta", path);
    if (!s.is_boolean()) throw Error(ErrorCode::kSchema, path + ".ucb_sqrt_beta: expected a boolean");
    a.ucb_sqrt_beta = s.get<bool>();
    return a;
}

}  // namespace

std::string content_hash(std::string_view bytes) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return hex;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) throw Error(ErrorCode::kIo, "failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::kIo, "cannot rename onto '" + path.string() + "': " + ec.message());
    }
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        const std::size_t nl = upto == 0 ? std::string::npos : text.rfind('\n', upto - 1);
        const std::size_t col = nl == std::string::npos ? upto : upto - nl - 1;
        throw Error(ErrorCode::kMalformed, what + ": JSON syntax error at line " + std::to_string(line) + ", column " +
                                               std::to_string(col) + ": " + e.what());
    }
}

json superdataset_to_json(const SuperDataset& superdataset) {
    json datasets = json::array();
    for (const Dataset& ds : superdataset.datasets) {
        json subs = json::array();
        for (const LabeledSubDataset& sd : ds.subdatasets) {
            subs.push_back({{"id", sd.id},
                            {"split", to_string(sd.split)},
                            {"inputs", matrix_to_json(sd.data.inputs)},
                            {"outputs", vector_to_json(sd.data.outputs)}});
        }
        json d = {{"id", ds.id}, {"domain", domain_to_json(ds.domain)}, {"subdatasets", subs}};
        if (ds.ground_truth) {
            d["ground_truth"] = {{"nu", to_string(ds.ground_truth->nu)},
                                 {"params", gp_params_to_json(ds.ground_truth->params)},
                                 {"prior", gp_prior_to_json(ds.ground_truth->prior)}};
        }
        datasets.push_back(std::move(d));
    }
    json j = {{"format", kSuperDatasetFormat},
              {"version", kSuperDatasetFormatVersion},
              {"normalized", superdataset.normalized},
              {"datasets", datasets}};
    if (superdataset.normalization) j["normalization"] = normalization_to_json(*superdataset.normalization);
    return j;
}

SuperDataset superdataset_from_json(const json& j) {
    check_header(j, kSuperDatasetFormat, kSuperDatasetFormatVersion);
    SuperDataset out;
    const json& norm = require(j, "normalized", "$");
    if (!norm.is_boolean()) throw Error(ErrorCode::kSchema, "$.normalized: expected a boolean");
    out.normalized = norm.get<bool>();
    if (j.contains("normalization")) out.normalization = normalization_from_json(j.at("normalization"), "$.normalization");
    const json& datasets = require(j, "datasets", "$");
    if (!datasets.is_array()) throw Error(ErrorCode::kSchema, "$.datasets: expected an array");
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        const std::string path = "$.datasets[" + std::to_string(i) + "]";
        const json& dj = datasets[i];
        Dataset ds;
        ds.id = require_string(dj, "id", path);
        ds.domain = domain_from_json(require(dj, "domain", path), path + ".domain");
        const json& subs = require(dj, "subdatasets", path);
        if (!subs.is_array()) throw Error(ErrorCode::kSchema, path + ".subdatasets: expected an array");
        for (std::size_t k = 0; k < subs.size(); ++k) {
            const std::string sp = path + ".subdatasets[" + std::to_string(k) + "]";
            LabeledSubDataset sd;
            sd.id = require_string(subs[k], "id", sp);
            sd.split = subs[k].contains("split") ? split_from_string(require_string(subs[k], "split", sp))
                                                 : Split::kUnassigned;
            sd.data = subdataset_from_json(subs[k], sp, ds.dim());
            ds.subdatasets.push_back(std::move(sd));
        }
        if (dj.contains("ground_truth")) {
            const json& gt = dj.at("ground_truth");
            const std::string gp = path + ".ground_truth";
            GroundTruth truth;
            truth.nu = smoothness_from_string(require_string(gt, "nu", gp));
            truth.params = gp_params_from_json(require(gt, "params", gp), gp + ".params");
            truth.prior = gp_prior_from_json(require(gt, "prior", gp), gp + ".prior");
            ds.ground_truth = std::move(truth);
        }
        out.datasets.push_back(std::move(ds));
    }
    out.validate();
    return out;
}

std::string encode_superdataset(const SuperDataset& superdataset) {
    superdataset.validate();
    return superdataset_to_json(superdataset).dump() + "\n";
}

SuperDataset decode_superdataset(const std::string& text) {
    return superdataset_from_json(parse_json(text, "super-dataset file"));
}

void write_superdataset(const std::filesystem::path& path, const SuperDataset& superdataset) {
    write_text_atomic(path, encode_superdataset(superdataset));
}

SuperDataset read_superdataset(const std::filesystem::path& path) {
    try {
        return decode_superdataset(read_text(path));
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

json pretrain_config_to_json(const PretrainConfig& cfg) {
    return {{"step1",
             {{"iterations", cfg.step1.iterations},
              {"learning_rate", cfg.step1.learning_rate},
              {"subsample_per_subdataset", cfg.step1.subsample_per_subdataset},
              {"restarts", cfg.step1.restarts}}},
            {"step2", {{"iterations", cfg.step2.iterations}, {"learning_rate", cfg.step2.learning_rate}}},
            {"nu", to_string(cfg.nu)},
            {"exclude_dataset_ids", cfg.exclude_dataset_ids}};
}

PretrainConfig pretrain_config_from_json(const json& j, const std::string& path) {
    PretrainConfig cfg;
    const json& s1 = require(j, "step1", path);
    cfg.step1.iterations = require_integer<int>(s1, "iterations", path + ".step1");
    cfg.step1.learning_rate = require_number(s1, "learning_rate", path + ".step1");
    cfg.step1.subsample_per_subdataset = require_integer<std::size_t>(s1, "subsample_per_subdataset", path + ".step1");
    cfg.step1.restarts = require_integer<int>(s1, "restarts", path + ".step1");
    const json& s2 = require(j, "step2", path);
    cfg.step2.iterations = require_integer<int>(s2, "iterations", path + ".step2");
    cfg.step2.learning_rate = require_number(s2, "learning_rate", path + ".step2");
    cfg.nu = smoothness_from_string(require_string(j, "nu", path));
    const json& ex = require(j, "exclude_dataset_ids", path);
    if (!ex.is_array()) throw Error(ErrorCode::kSchema, path + ".exclude_dataset_ids: expected an array");
    for (const json& id : ex) {
        if (!id.is_string()) throw Error(ErrorCode::kSchema, path + ".exclude_dataset_ids: expected strings");
        cfg.exclude_dataset_ids.insert(id.get<std::string>());
    }
    cfg.validate();
    return cfg;
}

std::string encode_model(const PretrainedModel& model) {
    json estimates = json::array();
    for (const DatasetEstimate& e : model.estimates) estimates.push_back(estimate_to_json(e));
    const json j = {{"format", kModelFormat},
                    {"version", kModelFormatVersion},
                    {"phi", phi_to_json(model.phi)},
                    {"estimates", estimates},
                    {"config", pretrain_config_to_json(model.config)},
                    {"provenance",
                     {{"dataset_ids", model.provenance.dataset_ids},
                      {"excluded_ids", model.provenance.excluded_ids},
                      {"seed", model.provenance.seed},
                      {"training_data_hash", model.provenance.training_data_hash}}}};
    return j.dump(1) + "\n";
}

PretrainedModel decode_model(const std::string& text) {
    const json j = parse_json(text, "model file");
    check_header(j, kModelFormat, kModelFormatVersion);
    PretrainedModel model;
    model.phi = phi_from_json(require(j, "phi", "$"));
    const json& estimates = require(j, "estimates", "$");
    if (!estimates.is_array()) throw Error(ErrorCode::kSchema, "$.estimates: expected an array");
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        model.estimates.push_back(estimate_from_json(estimates[i], "$.estimates[" + std::to_string(i) + "]"));
    }
    model.config = pretrain_config_from_json(require(j, "config", "$"), "$.config");
    const json& prov = require(j, "provenance", "$");
    try {
        model.provenance.dataset_ids = require(prov, "dataset_ids", "$.provenance").get<std::vector<std::string>>();
        model.provenance.excluded_ids = require(prov, "excluded_ids", "$.provenance").get<std::vector<std::string>>();
        model.provenance.seed = require(prov, "seed", "$.provenance").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kSchema, std::string("$.provenance: ") + e.what());
    }
    model.provenance.training_data_hash = require_string(prov, "training_data_hash", "$.provenance");
    if (model.estimates.size() != model.provenance.dataset_ids.size()) {
        throw Error(ErrorCode::kSchema, "$.estimates: count does not match provenance.dataset_ids");
    }
    return model;
}

void write_model(const std::filesystem::path& path, const PretrainedModel& model) {
    write_text_atomic(path, encode_model(model));
}

PretrainedModel read_model(const std::filesystem::path& path) {
    try {
        return decode_model(read_text(path));
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

std::string encode_results(const ResultsFile& results) {
    const ExperimentConfig& cfg = results.config;
    json methods = json::array();
    for (const MethodCurve& c : results.result.curves) {
        json runs = json::array();
        for (const RunRecord& r : c.runs) {
            runs.push_back({{"dataset_id", r.dataset_id},
                            {"subdataset_id", r.subdataset_id},
                            {"seed", r.seed},
                            {"regret", r.regret}});
        }
        methods.push_back({{"method", to_string(c.method)}, {"mean", c.mean}, {"std", c.stddev}, {"runs", runs}});
    }
    const json j = {{"format", kResultsFormat},
                    {"version", kResultsFormatVersion},
                    {"acquisition", acquisition_to_json(cfg.acquisition)},
                    {"setting", to_string(cfg.setting)},
                    {"seeds", cfg.seeds},
                    {"budget", cfg.budget},
                    {"n_init", cfg.n_init},
                    {"nu", to_string(cfg.nu)},
                    {"map_iterations", cfg.map.iterations},
                    {"map_restarts", cfg.map.restarts},
                    {"methods", methods},
                    {"provenance",
                     {{"model_hashes", results.provenance.model_hashes},
                      {"dataset_hash", results.provenance.dataset_hash},
                      {"config", results.provenance.config}}}};
    return j.dump(1) + "\n";
}

ResultsFile decode_results(const std::string& text) {
    const json j = parse_json(text, "results file");
    check_header(j, kResultsFormat, kResultsFormatVersion);
    ResultsFile out;
    ExperimentConfig& cfg = out.config;
    cfg.acquisition = acquisition_from_json(require(j, "acquisition", "$"), "$.acquisition");
    cfg.setting = setting_from_string(require_string(j, "setting", "$"));
    cfg.budget = require_integer<int>(j, "budget", "$");
    cfg.n_init = require_integer<int>(j, "n_init", "$");
    cfg.nu = smoothness_from_string(require_string(j, "nu", "$"));
    cfg.map.iterations = require_integer<int>(j, "map_iterations", "$");
    cfg.map.restarts = require_integer<int>(j, "map_restarts", "$");
    try {
        cfg.seeds = require(j, "seeds", "$").get<std::vector<std::uint64_t>>();
        const json& prov = require(j, "provenance", "$");
        out.provenance.model_hashes = require(prov, "model_hashes", "$.provenance").get<std::vector<std::string>>();
        out.provenance.dataset_hash = require_string(prov, "dataset_hash", "$.provenance");
        out.provenance.config = require(prov, "config", "$.provenance");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kSchema, std::string("$: ") + e.what());
    }
    const json& methods = require(j, "methods", "$");
    if (!methods.is_array()) throw Error(ErrorCode::kSchema, "$.methods: expected an array");
    const std::size_t len = static_cast<std::size_t>(cfg.budget) + 1;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        const std::string path = "$.methods[" + std::to_string(m) + "]";
        MethodCurve c;
        c.method = method_kind_from_string(require_string(methods[m], "method", path));
        cfg.methods.push_back(c.method);
        c.mean = doubles_from_json(require(methods[m], "mean", path), path + ".mean");
        c.stddev = doubles_from_json(require(methods[m], "std", path), path + ".std");
        if (c.mean.size() != len || c.stddev.size() != len) {
            throw Error(ErrorCode::kSchema, path + ": curve length must be budget + 1 = " + std::to_string(len));
        }
        const json& runs = require(methods[m], "runs", path);
        if (!runs.is_array()) throw Error(ErrorCode::kSchema, path + ".runs: expected an array");
        for (std::size_t r = 0; r < runs.size(); ++r) {
            const std::string rp = path + ".runs[" + std::to_string(r) + "]";
            RunRecord rec;
            rec.dataset_id = require_string(runs[r], "dataset_id", rp);
            rec.subdataset_id = require_string(runs[r], "subdataset_id", rp);
            rec.seed = require_integer<std::uint64_t>(runs[r], "seed", rp);
            rec.regret = doubles_from_json(require(runs[r], "regret", rp), rp + ".regret");
            c.runs.push_back(std::move(rec));
        }
        out.result.curves.push_back(std::move(c));
    }
    return out;
}

std::string curves_to_delimited(const ExperimentResult& result, char delimiter) {
    // Shortest representation that parses back to the same double.
    auto num = [](double v) {
        std::array<char, 32> buf{};
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        return std::string(buf.data(), res.ptr);
    };
    std::ostringstream out;
    out << "method" << delimiter << "iteration" << delimiter << "mean" << delimiter << "std" << delimiter << "runs\n";
    for (const MethodCurve& c : result.curves) {
        for (std::size_t i = 0; i < c.mean.size(); ++i) {
            out << to_string(c.method) << delimiter << i << delimiter << num(c.mean[i]) << delimiter << num(c.stddev[i])
                << delimiter << c.runs.size() << '\n';
        }
    }
    return out.str();
}

SuperDataset normalize_superdataset(const SuperDataset& raw, OutputGranularity granularity) {
    raw.validate();
    SuperDataset out = raw;
    out.normalized = true;
    NormalizationInfo info;
    info.output_granularity = granularity == OutputGranularity::kDataset ? "dataset" : "subdataset";

    auto scale = [](double v, double lo, double hi, bool degenerate) { return degenerate ? 0.5 : (v - lo) / (hi - lo); };

    for (Dataset& ds : out.datasets) {
        DatasetNormalization meta;
        meta.dataset_id = ds.id;
        const auto d = static_cast<Eigen::Index>(ds.dim());
        for (Eigen::Index c = 0; c < d; ++c) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& sd : ds.subdatasets) {
                if (sd.data.size() == 0) continue;
                lo = std::min(lo, sd.data.inputs.col(c).minCoeff());
                hi = std::max(hi, sd.data.inputs.col(c).maxCoeff());
            }
            if (!std::isfinite(lo)) lo = hi = 0.0;
            const bool degenerate = !(hi > lo);
            meta.input_min.push_back(lo);
            meta.input_max.push_back(hi);
            meta.input_degenerate.push_back(degenerate);
            for (auto& sd : ds.subdatasets) {
                for (Eigen::Index r = 0; r < sd.data.inputs.rows(); ++r) {
                    sd.data.inputs(r, c) = scale(sd.data.inputs(r, c), lo, hi, degenerate);
                }
            }
            ds.domain.dims[static_cast<std::size_t>(c)].bounds = std::make_pair(lo, hi);
        }

        auto output_range = [](const std::vector<LabeledSubDataset*>& group) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const LabeledSubDataset* sd : group) {
                if (sd->data.size() == 0) continue;
                lo = std::min(lo, sd->data.outputs.minCoeff());
                hi = std::max(hi, sd->data.outputs.maxCoeff());
            }
            if (!std::isfinite(lo)) lo = hi = 0.0;
            return std::make_pair(lo, hi);
        };
        std::vector<std::vector<LabeledSubDataset*>> groups;
        if (granularity == OutputGranularity::kDataset) {
            groups.emplace_back();
            for (auto& sd : ds.subdatasets) groups.back().push_back(&sd);
        } else {
            for (auto& sd : ds.subdatasets) groups.push_back({&sd});
        }
        for (const auto& group : groups) {
            const auto [lo, hi] = output_range(group);
            const bool degenerate = !(hi > lo);
            meta.output_min.push_back(lo);
            meta.output_max.push_back(hi);
            meta.output_degenerate.push_back(degenerate);
            for (LabeledSubDataset* sd : group) {
                for (Eigen::Index r = 0; r < sd->data.outputs.size(); ++r) {
                    sd->data.outputs[r] = scale(sd->data.outputs[r], lo, hi, degenerate);
                }
            }
        }
        ds.ground_truth.reset();
        info.datasets.push_back(std::move(meta));
    }
    out.normalization = std::move(info);
    return out;
}

SuperDataset denormalize_superdataset(const SuperDataset& normalized) {
    if (!normalized.normalized || !normalized.normalization) {
        throw Error(ErrorCode::kInvalidArgument, "super-dataset carries no normalization metadata");
    }
    const NormalizationInfo& info = *normalized.normalization;
    const bool per_dataset = info.output_granularity == "dataset";
    SuperDataset out = normalized;
    out.normalized = false;
    out.normalization.reset();
    if (info.datasets.size() != out.datasets.size()) {
        throw Error(ErrorCode::kSchema, "normalization metadata does not match the datasets");
    }
    auto unscale = [](double v, double lo, double hi, bool degenerate) { return degenerate ? lo : lo + v * (hi - lo); };
    for (std::size_t i = 0; i < out.datasets.size(); ++i) {
        Dataset& ds = out.datasets[i];
        const DatasetNormalization& meta = info.datasets[i];
        const std::size_t groups = per_dataset ? 1 : ds.subdatasets.size();
        if (meta.dataset_id != ds.id || meta.input_min.size() != ds.dim() || meta.output_min.size() != groups) {
            throw Error(ErrorCode::kSchema, "normalization metadata does not match dataset '" + ds.id + "'");
        }
        for (std::size_t k = 0; k < ds.subdatasets.size(); ++k) {
            SubDataset& sd = ds.subdatasets[k].data;
            for (Eigen::Index c = 0; c < sd.inputs.cols(); ++c) {
                const auto cc = static_cast<std::size_t>(c);
                for (Eigen::Index r = 0; r < sd.inputs.rows(); ++r) {
                    sd.inputs(r, c) = unscale(sd.inputs(r, c), meta.input_min[cc], meta.input_max[cc],
                                              meta.input_degenerate[cc]);
                }
            }
            const std::size_t g = per_dataset ? 0 : k;
            for (Eigen::Index r = 0; r < sd.outputs.size(); ++r) {
                sd.outputs[r] = unscale(sd.outputs[r], meta.output_min[g], meta.output_max[g], meta.output_degenerate[g]);
            }
        }
    }
    return out;
}

}  // namespace mphd
