#include "doctest.h"

#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "mphd/cli.hpp"
#include "mphd/error.hpp"
#include "mphd/io.hpp"
#include "mphd/synth.hpp"

using namespace mphd;
namespace fs = std::filesystem;

namespace {

SuperDataset sample_superdataset() {
    SynthConfig cfg = SynthConfig::profile_l(SynthScale::kDesk);
    cfg.n_datasets = 3;
    cfg.subdatasets_per_dataset = 5;
    cfg.observations_per_subdataset = 12;
    cfg.dim_hi = 3;
    cfg.seed = 2;
    SuperDataset sd = generate_superdataset(cfg);
    assign_splits(sd, SplitMode::kPerDatasetSubsplit, 0.6, 3);
    return sd;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::kIo;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mphd-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

struct CliRun {
    int status;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "mphd");
    std::ostringstream out, err;
    const int status = run_cli(args, out, err);
    return {status, out.str(), err.str()};
}

const std::vector<std::string> kQuickTraining{"--step1-iterations", "60", "--step1-lr", "0.03", "--restarts", "0",
                                              "--step2-iterations", "50", "--step2-lr", "0.01"};

std::vector<std::string> with_training(std::vector<std::string> args) {
    args.insert(args.end(), kQuickTraining.begin(), kQuickTraining.end());
    return args;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("superdataset round trip is exact") {
    const SuperDataset sd = sample_superdataset();
    const std::string text = encode_superdataset(sd);
    const SuperDataset back = decode_superdataset(text);
    CHECK(encode_superdataset(back) == text);
    REQUIRE(back.datasets.size() == sd.datasets.size());
    for (std::size_t i = 0; i < sd.datasets.size(); ++i) {
        const Dataset& a = sd.datasets[i];
        const Dataset& b = back.datasets[i];
        CHECK(a.id == b.id);
        CHECK(a.domain == b.domain);
        CHECK(a.ground_truth->params == b.ground_truth->params);
        CHECK(a.ground_truth->prior == b.ground_truth->prior);
        for (std::size_t j = 0; j < a.subdatasets.size(); ++j) {
            CHECK(a.subdatasets[j].split == b.subdatasets[j].split);
            CHECK(a.subdatasets[j].data.inputs == b.subdatasets[j].data.inputs);
            CHECK(a.subdatasets[j].data.outputs == b.subdatasets[j].data.outputs);
        }
    }
}

TEST_CASE("superdataset schema, version and syntax errors") {
    nlohmann::json j = superdataset_to_json(sample_superdataset());
    nlohmann::json wide = j;
    auto& rows = wide["datasets"][0]["subdatasets"][0]["inputs"];
    const std::size_t d = wide["datasets"][0]["domain"]["dims"].size();
    for (auto& row : rows) {
        while (row.size() <= d) row.push_back(0.5);
    }
    try {
        superdataset_from_json(wide);
        FAIL("expected a schema error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kSchema);
        CHECK(std::string(e.what()).find("$.datasets[0]") != std::string::npos);
    }

    nlohmann::json future = j;
    future["version"] = 42;
    CHECK(code_of([&] { superdataset_from_json(future); }) == ErrorCode::kVersion);

    try {
        decode_superdataset("{\n  \"format\": \"mphd-superdataset\",\n  oops\n}");
        FAIL("expected a syntax error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kMalformed);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    nlohmann::json nan_value = j;
    nan_value["datasets"][0]["subdatasets"][0]["outputs"][0] = "nan";
    CHECK(code_of([&] { superdataset_from_json(nan_value); }) == ErrorCode::kSchema);
}

TEST_CASE("min-max normalization examples and inverse") {
    SuperDataset raw;
    Dataset d;
    d.id = "raw";
    d.domain = DomainDescriptor::all_continuous(1);
    LabeledSubDataset s;
    s.id = "s";
    s.data.inputs.resize(3, 1);
    s.data.inputs.col(0) << 2.0, 4.0, 3.0;
    s.data.outputs = Eigen::Vector3d(-5.0, 15.0, 0.0);
    d.subdatasets.push_back(s);
    raw.datasets.push_back(d);

    const SuperDataset n = normalize_superdataset(raw);
    CHECK(n.normalized);
    const Eigen::MatrixXd& x = n.datasets[0].subdatasets[0].data.inputs;
    CHECK(x(0, 0) == 0.0);
    CHECK(x(1, 0) == 1.0);
    CHECK(x(2, 0) == 0.5);
    CHECK(n.datasets[0].subdatasets[0].data.outputs[2] == doctest::Approx(0.25));

    const SuperDataset back = denormalize_superdataset(n);
    CHECK((back.datasets[0].subdatasets[0].data.inputs - s.data.inputs).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((back.datasets[0].subdatasets[0].data.outputs - s.data.outputs).cwiseAbs().maxCoeff() <= 1e-12);

    const SuperDataset twice = normalize_superdataset(denormalize_superdataset(n));
    SuperDataset unit = n;
    unit.normalization.reset();
    unit.normalized = false;
    const SuperDataset same = normalize_superdataset(unit);
    CHECK((same.datasets[0].subdatasets[0].data.inputs - x).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((twice.datasets[0].subdatasets[0].data.outputs - n.datasets[0].subdatasets[0].data.outputs)
              .cwiseAbs()
              .maxCoeff() <= 1e-15);
}

TEST_CASE("degenerate ranges map to one half and are flagged") {
    SuperDataset raw;
    Dataset d;
    d.id = "flat";
    d.domain = DomainDescriptor::all_continuous(2);
    LabeledSubDataset s;
    s.id = "s";
    s.data.inputs.resize(2, 2);
    s.data.inputs << 1.0, 7.0, 2.0, 7.0;
    s.data.outputs = Eigen::Vector2d(3.0, 3.0);
    d.subdatasets.push_back(s);
    raw.datasets.push_back(d);
    const SuperDataset n = normalize_superdataset(raw, OutputGranularity::kSubdataset);
    CHECK(n.datasets[0].subdatasets[0].data.inputs(0, 1) == 0.5);
    CHECK(n.datasets[0].subdatasets[0].data.outputs[0] == 0.5);
    CHECK(n.normalization->datasets[0].input_degenerate[1]);
    CHECK(n.normalization->datasets[0].output_degenerate[0]);
    CHECK(n.normalization->output_granularity == "subdataset");
}

TEST_CASE("model and results round trips") {
    PretrainedModel m;
    m.phi = PhiModel{ConstantPhi{Gamma{1.25, 3.5}}, SharedPriors{Normal{0.5, 0.2}, Gamma{15, 100}, Gamma{1, 1e4}}};
    DatasetEstimate e;
    e.dataset_id = "d0";
    e.domain = DomainDescriptor::all_continuous(2);
    e.params.length_scales = Eigen::Vector2d(0.1, 1.0 / 3.0);
    e.nll = -12.5;
    m.estimates = {e};
    m.provenance = Provenance{{"d0"}, {"d9"}, 7, "0123456789abcdef"};
    const std::string text = encode_model(m);
    CHECK(encode_model(decode_model(text)) == text);
    CHECK(decode_model(text).estimates[0].params == e.params);

    ResultsFile r;
    r.config.methods = {MethodKind::kRandom};
    r.config.budget = 2;
    MethodCurve c;
    c.method = MethodKind::kRandom;
    c.mean = {0.5, 0.25, 0.1};
    c.stddev = {0.1, 0.1, 0.0};
    c.runs = {RunRecord{"d0", "s1", 0, {0.5, 0.25, 0.1}}};
    r.result.curves = {c};
    r.provenance.dataset_hash = "abc";
    const std::string rt = encode_results(r);
    CHECK(encode_results(decode_results(rt)) == rt);

    nlohmann::json broken = nlohmann::json::parse(rt);
    broken["methods"][0]["mean"].push_back(0.0);
    CHECK(code_of([&] { decode_results(broken.dump()); }) == ErrorCode::kSchema);

    const std::string csv = curves_to_delimited(r.result, ',');
    CHECK(csv.rfind("method,iteration,mean,std,runs\n", 0) == 0);
    CHECK(csv.find("random,2,0.1,0,1") != std::string::npos);
}

TEST_CASE("cli: usage and file errors carry exit codes and JSON records") {
    const CliRun none = cli({});
    CHECK(none.status == 1);
    CHECK(nlohmann::json::parse(none.err)["error"]["exit_code"] == 1);

    const CliRun bad_flag = cli({"synth-gen", "--profile", "S", "--bogus"});
    CHECK(bad_flag.status == 1);
    CHECK(nlohmann::json::parse(bad_flag.err)["error"]["code"] == "usage");

    const CliRun missing = cli({"inspect", "/nonexistent/file.json"});
    CHECK(missing.status == 1);
    CHECK(nlohmann::json::parse(missing.err).contains("error"));

    TempDir dir;
    const CliRun profile = cli({"synth-gen", "--profile", "Q", "--out", dir / "x.json"});
    CHECK(profile.status == 1);
}

TEST_CASE("cli: synth-gen, pretrain with exclusion, inspect, bo-run and export") {
    TempDir dir;
    REQUIRE(cli({"synth-gen", "--profile", "L", "--scale", "desk", "--seed", "4", "--out", dir / "a.json"}).status == 0);
    REQUIRE(cli({"synth-gen", "--profile", "L", "--scale", "desk", "--seed", "4", "--out", dir / "b.json"}).status == 0);
    CHECK(read_text(dir / "a.json") == read_text(dir / "b.json"));

    // Shrink the file so the CLI pipeline stays fast.
    SuperDataset sd = read_superdataset(dir / "a.json");
    // Only d2 keeps test sub-datasets, so the single NToT model covers every test domain.
    sd.datasets.resize(4);
    for (auto& d : sd.datasets) {
        for (auto& s : d.subdatasets) {
            s.data.inputs.conservativeResize(20, Eigen::NoChange);
            s.data.outputs.conservativeResize(20);
            if (d.id != "d2") s.split = Split::kTrain;
        }
    }
    write_superdataset(dir / "small.json", sd);

    const CliRun pre = cli(with_training({"pretrain", "--data", dir / "small.json", "--phi", "constant", "--seed", "1",
                                          "--ntot-exclude", "d2", "--out", dir / "model.json"}));
    REQUIRE_MESSAGE(pre.status == 0, pre.err);
    const CliRun ins = cli({"inspect", dir / "model.json"});
    REQUIRE(ins.status == 0);
    const auto summary = nlohmann::json::parse(ins.out);
    CHECK(summary["provenance"]["excluded_ids"] == nlohmann::json::array({"d2"}));

    const CliRun run = cli({"bo-run", "--data", dir / "small.json", "--model", dir / "model.json", "--methods",
                            "random,mphd-non-nn", "--setting", "ntot", "--seeds", "0", "--budget", "0", "--out",
                            dir / "results.json"});
    REQUIRE_MESSAGE(run.status == 0, run.err);
    const ResultsFile res = decode_results(read_text(dir / "results.json"));
    REQUIRE(res.result.curves.size() == 2);
    for (const auto& c : res.result.curves) CHECK(c.mean.size() == 1);

    const CliRun exported = cli({"export-curves", "--results", dir / "results.json", "--format", "tsv"});
    CHECK(exported.status == 0);
    CHECK(exported.out.rfind("method\titeration\tmean\tstd\truns\n", 0) == 0);

    const CliRun default_setting = cli({"bo-run", "--data", dir / "small.json", "--model", dir / "model.json",
                                        "--methods", "mphd", "--budget", "0", "--out", dir / "r2.json"});
    CHECK(default_setting.status == 1);
    CHECK(nlohmann::json::parse(default_setting.err)["error"]["code"] == "configuration_error");
}

}  // TEST_SUITE
