#include "mphd/cli.hpp"

#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mphd/bo.hpp"
#include "mphd/codec.hpp"
#include "mphd/error.hpp"
#include "mphd/io.hpp"
#include "mphd/pretrain.hpp"
#include "mphd/synth.hpp"

namespace mphd {
namespace {

using nlohmann::json;

struct TrainingFlags {
    int step1_iterations = 20000;
    double step1_lr = 1e-3;
    std::size_t subsample = 50;
    int restarts = 2;
    int step2_iterations = 10000;
    double step2_lr = 1e-3;

    void attach(CLI::App* app) {
        app->add_option("--step1-iterations", step1_iterations, "Adam iterations per step-1 start")->capture_default_str();
        app->add_option("--step1-lr", step1_lr, "Step-1 Adam learning rate")->capture_default_str();
        app->add_option("--subsample", subsample, "Points drawn per sub-dataset per step-1 iteration")
            ->capture_default_str();
        app->add_option("--restarts", restarts, "Seeded step-1 restarts besides the deterministic start")
            ->capture_default_str();
        app->add_option("--step2-iterations", step2_iterations, "Adam iterations for the prior network")
            ->capture_default_str();
        app->add_option("--step2-lr", step2_lr, "Step-2 Adam learning rate")->capture_default_str();
    }

    PretrainConfig config() const {
        PretrainConfig cfg;
        cfg.step1.iterations = step1_iterations;
        cfg.step1.learning_rate = step1_lr;
        cfg.step1.subsample_per_subdataset = subsample;
        cfg.step1.restarts = restarts;
        cfg.step2.iterations = step2_iterations;
        cfg.step2.learning_rate = step2_lr;
        return cfg;
    }
};

SynthScale scale_from_string(const std::string& s) {
    if (s == "full") return SynthScale::kFull;
    if (s == "desk") return SynthScale::kDesk;
    throw Error(ErrorCode::kInvalidArgument, "unknown scale '" + s + "' (expected full or desk)");
}

SynthConfig profile_config(const std::string& profile, const std::string& scale) {
    if (profile == "S") return SynthConfig::profile_s(scale_from_string(scale));
    if (profile == "L") return SynthConfig::profile_l(scale_from_string(scale));
    throw Error(ErrorCode::kInvalidArgument, "unknown profile '" + profile + "' (expected S or L)");
}

/// Smoothness shared by every dataset's ground truth, if any.
std::optional<Smoothness> truth_smoothness(const SuperDataset& sd) {
    std::optional<Smoothness> nu;
    for (const Dataset& ds : sd.datasets) {
        if (!ds.ground_truth) return std::nullopt;
        if (nu && *nu != ds.ground_truth->nu) return std::nullopt;
        nu = ds.ground_truth->nu;
    }
    return nu;
}

Smoothness resolve_nu(const std::string& flag, std::optional<Smoothness> fallback) {
    if (flag != "auto") return smoothness_from_string(flag);
    return fallback.value_or(Smoothness::kNu52);
}

PhiKind phi_kind_flag(const std::string& s) {
    if (s == "nn") return PhiKind::kNn;
    if (s == "constant") return PhiKind::kConstant;
    throw Error(ErrorCode::kInvalidArgument, "unknown phi kind '" + s + "' (expected nn or constant)");
}

json summary_json(const ParameterSummary& s) { return {{"mean", s.mean}, {"std", s.stddev}, {"median", s.median}}; }

json gamma_json(const Gamma& g) { return {{"shape", g.shape}, {"rate", g.rate}}; }

int cmd_synth_gen(const std::string& profile, const std::string& scale, std::uint64_t seed, const std::string& split,
                  double fraction, const std::string& out_path, std::ostream& out) {
    SynthConfig cfg = profile_config(profile, scale);
    cfg.seed = seed;
    SuperDataset sd = generate_superdataset(cfg);
    std::string mode = split;
    if (mode == "auto") mode = profile == "S" ? "per_super_split" : "per_dataset_subsplit";
    if (mode != "none") assign_splits(sd, split_mode_from_string(mode), fraction, derive_seed(seed, "split"));
    const std::string text = encode_superdataset(sd);
    write_text_atomic(out_path, text);
    out << json{{"wrote", out_path}, {"datasets", sd.datasets.size()}, {"hash", content_hash(text)}}.dump() << "\n";
    return 0;
}

int cmd_pretrain(const std::string& data_path, const std::string& phi, std::uint64_t seed,
                 const std::vector<std::string>& exclude, const std::string& nu_flag, const TrainingFlags& flags,
                 const std::string& out_path, std::ostream& out) {
    const SuperDataset sd = read_superdataset(data_path);
    PretrainConfig cfg = flags.config();
    cfg.exclude_dataset_ids.insert(exclude.begin(), exclude.end());
    cfg.nu = resolve_nu(nu_flag, truth_smoothness(sd));
    const PretrainedModel model = pretrain(sd, phi_kind_flag(phi), cfg, seed);
    const std::string text = encode_model(model);
    write_text_atomic(out_path, text);
    out << json{{"wrote", out_path}, {"datasets", model.provenance.dataset_ids}, {"hash", content_hash(text)}}.dump()
        << "\n";
    return 0;
}

struct BoRunFlags {
    std::string data;
    std::vector<std::string> models;
    std::vector<std::string> methods{"mphd"};
    std::string acq = "pi";
    double zeta = 0.1;
    double beta = 3.0;
    bool ucb_linear_beta = false;
    std::string setting = "default";
    std::vector<std::uint64_t> seeds{0};
    int budget = 100;
    int n_init = 5;
    std::string nu = "auto";
    int map_iterations = 100;
    int map_restarts = 1;
    std::string out;
};

int cmd_bo_run(const BoRunFlags& f, std::ostream& out) {
    const std::string data_text = read_text(f.data);
    const SuperDataset sd = decode_superdataset(data_text);
    std::vector<PretrainedModel> models;
    ResultsFile results;
    for (const std::string& path : f.models) {
        const std::string text = read_text(path);
        try {
            models.push_back(decode_model(text));
        } catch (const Error& e) {
            throw Error(e.code(), path + ": " + e.what());
        }
        results.provenance.model_hashes.push_back(content_hash(text));
    }
    results.provenance.dataset_hash = content_hash(data_text);

    ExperimentConfig& cfg = results.config;
    for (const std::string& m : f.methods) cfg.methods.push_back(method_kind_from_string(m));
    cfg.setting = setting_from_string(f.setting);
    cfg.acquisition.kind = acquisition_kind_from_string(f.acq);
    cfg.acquisition.zeta = f.zeta;
    cfg.acquisition.beta = f.beta;
    cfg.acquisition.ucb_sqrt_beta = !f.ucb_linear_beta;
    cfg.seeds = f.seeds;
    cfg.budget = f.budget;
    cfg.n_init = f.n_init;
    cfg.map.iterations = f.map_iterations;
    cfg.map.restarts = f.map_restarts;
    std::optional<Smoothness> fallback = truth_smoothness(sd);
    if (!models.empty()) fallback = models.front().config.nu;
    cfg.nu = resolve_nu(f.nu, fallback);
    results.provenance.config = {{"models", f.models.size()}, {"nu_flag", f.nu}};

    results.result = run_experiment(sd, models, cfg);
    const std::string text = encode_results(results);
    write_text_atomic(f.out, text);
    json summary = json::object();
    for (const MethodCurve& c : results.result.curves) summary[to_string(c.method)] = c.mean.back();
    out << json{{"wrote", f.out}, {"final_mean_regret", summary}, {"hash", content_hash(text)}}.dump() << "\n";
    return 0;
}

struct ConsistencyFlags {
    std::string vary;
    std::vector<std::size_t> grid;
    int repeats = 20;
    std::string profile = "gp1d";
    std::string scale = "desk";
    std::uint64_t seed = 0;
    std::vector<std::string> phi{"nn", "constant"};
    double train_fraction = 0.0;
    std::string out;
};

int cmd_consistency(const ConsistencyFlags& f, const TrainingFlags& training, std::ostream& out) {
    json report = {{"format", "mphd-consistency"}, {"version", 1}, {"vary", f.vary}, {"grid", f.grid},
                   {"repeats", f.repeats}, {"seed", f.seed}, {"training", pretrain_config_to_json(training.config())}};
    if (f.vary == "M") {
        if (f.profile != "gp1d") throw Error(ErrorCode::kInvalidArgument, "vary M supports --profile gp1d only");
        VaryMSpec spec;
        spec.truth.constant_mean = 0.0;
        spec.truth.length_scales = Eigen::VectorXd::Constant(1, 0.3);
        spec.truth.signal_variance = 1.0;
        spec.truth.noise_variance = 1e-3;
        spec.grid = f.grid;
        spec.repeats = f.repeats;
        spec.pretrain = training.config();
        spec.seed = f.seed;
        json points = json::array();
        for (const VaryMPoint& p : consistency_vary_m(spec)) {
            json est = json::array();
            for (const GpParams& g : p.estimates) est.push_back(gp_params_to_json(g));
            points.push_back({{"m", p.m},
                              {"length_scale", summary_json(p.length_scale)},
                              {"signal_variance", summary_json(p.signal_variance)},
                              {"noise_variance", summary_json(p.noise_variance)},
                              {"constant_mean", summary_json(p.constant_mean)},
                              {"estimates", est}});
        }
        report["truth"] = gp_params_to_json(spec.truth);
        report["points"] = points;
    } else if (f.vary == "N") {
        VaryNSpec spec;
        spec.generator = profile_config(f.profile, f.scale);
        if (f.train_fraction > 0.0) spec.train_fraction = f.train_fraction;
        spec.grid = f.grid;
        spec.repeats = f.repeats;
        spec.phi_kinds.clear();
        for (const std::string& k : f.phi) spec.phi_kinds.push_back(phi_kind_flag(k));
        spec.pretrain = training.config();
        spec.seed = f.seed;
        const VaryNReport r = consistency_vary_n(spec);
        json runs = json::array();
        for (const VaryNRun& run : r.runs) {
            json j = {{"n", run.n},
                      {"phi", to_string(run.kind)},
                      {"repeat", run.repeat},
                      {"length_scale_kl", run.length_scale_kl},
                      {"signal_variance_kl", run.signal_variance_kl},
                      {"noise_variance_kl", run.noise_variance_kl},
                      {"learned_length_scale_at_dim_lo", gamma_json(run.learned_length_scale_at_lo)}};
            if (run.heldout_nll) j["heldout_nll"] = *run.heldout_nll;
            runs.push_back(std::move(j));
        }
        json curves = json::array();
        for (PhiKind k : spec.phi_kinds) {
            for (std::size_t n : spec.grid) {
                json c = {{"n", n},
                          {"phi", to_string(k)},
                          {"length_scale_kl", summary_json(summarize(r.values(n, k, &VaryNRun::length_scale_kl)))}};
                const std::vector<double> h = r.heldout(n, k);
                if (!h.empty()) c["heldout_nll"] = summary_json(summarize(h));
                curves.push_back(std::move(c));
            }
        }
        report["profile"] = f.profile;
        report["kl_direction"] = r.kl_direction;
        report["runs"] = runs;
        report["curves"] = curves;
    } else {
        throw Error(ErrorCode::kInvalidArgument, "--vary must be M or N");
    }
    const std::string text = report.dump(1) + "\n";
    write_text_atomic(f.out, text);
    out << json{{"wrote", f.out}, {"hash", content_hash(text)}}.dump() << "\n";
    return 0;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
    const std::string text = read_text(path);
    const json j = parse_json(text, path);
    const std::string format = j.is_object() && j.contains("format") && j.at("format").is_string()
                                   ? j.at("format").get<std::string>()
                                   : std::string();
    json summary = {{"path", path}, {"format", format}, {"hash", content_hash(text)}};
    if (format == "mphd-model") {
        const PretrainedModel m = decode_model(text);
        summary["phi_kind"] = to_string(m.phi.kind());
        summary["provenance"] = {{"dataset_ids", m.provenance.dataset_ids},
                                 {"excluded_ids", m.provenance.excluded_ids},
                                 {"seed", m.provenance.seed},
                                 {"training_data_hash", m.provenance.training_data_hash}};
        summary["config"] = pretrain_config_to_json(m.config);
        summary["shared_priors"] = {{"constant_mean", prior_to_json(m.phi.shared.constant_mean)},
                                    {"signal_variance", prior_to_json(m.phi.shared.signal_variance)},
                                    {"noise_variance", prior_to_json(m.phi.shared.noise_variance)}};
        json by_dim = json::object();
        for (std::size_t d = 1; d <= 8; ++d) {
            by_dim[std::to_string(d)] =
                gamma_json(phi_forward(m.phi, encode_contexts(DomainDescriptor::all_continuous(d)).front()));
        }
        summary["length_scale_prior_all_continuous"] = by_dim;
    } else if (format == "mphd-superdataset") {
        const SuperDataset sd = decode_superdataset(text);
        json datasets = json::array();
        for (const Dataset& ds : sd.datasets) {
            std::map<std::string, int> splits;
            std::size_t points = 0;
            for (const auto& sub : ds.subdatasets) {
                ++splits[to_string(sub.split)];
                points += sub.data.size();
            }
            datasets.push_back({{"id", ds.id},
                                {"dim", ds.dim()},
                                {"subdatasets", ds.subdatasets.size()},
                                {"observations", points},
                                {"splits", splits},
                                {"ground_truth", ds.ground_truth.has_value()}});
        }
        summary["normalized"] = sd.normalized;
        summary["datasets"] = datasets;
    } else if (format == "mphd-results") {
        const ResultsFile r = decode_results(text);
        json methods = json::object();
        for (const MethodCurve& c : r.result.curves) {
            methods[to_string(c.method)] = {{"runs", c.runs.size()}, {"final_mean", c.mean.back()},
                                            {"final_std", c.stddev.back()}};
        }
        summary["setting"] = to_string(r.config.setting);
        summary["acquisition"] = to_string(r.config.acquisition.kind);
        summary["budget"] = r.config.budget;
        summary["methods"] = methods;
        summary["provenance"] = {{"model_hashes", r.provenance.model_hashes},
                                 {"dataset_hash", r.provenance.dataset_hash}};
    } else {
        throw Error(ErrorCode::kMalformed, path + ": unrecognized format '" + format + "'");
    }
    out << summary.dump(1) << "\n";
    return 0;
}

int cmd_export_curves(const std::string& results_path, const std::string& delimiter, const std::string& out_path,
                      std::ostream& out) {
    const ResultsFile r = decode_results(read_text(results_path));
    char delim = ',';
    if (delimiter == "tsv") {
        delim = '\t';
    } else if (delimiter != "csv") {
        throw Error(ErrorCode::kInvalidArgument, "--format must be csv or tsv");
    }
    const std::string text = curves_to_delimited(r.result, delim);
    if (out_path.empty()) {
        out << text;
    } else {
        write_text_atomic(out_path, text);
    }
    return 0;
}

int cmd_normalize(const std::string& data_path, const std::string& granularity, const std::string& out_path,
                  std::ostream& out) {
    OutputGranularity g = OutputGranularity::kDataset;
    if (granularity == "subdataset") {
        g = OutputGranularity::kSubdataset;
    } else if (granularity != "dataset") {
        throw Error(ErrorCode::kInvalidArgument, "--granularity must be dataset or subdataset");
    }
    const SuperDataset normalized = normalize_superdataset(read_superdataset(data_path), g);
    const std::string text = encode_superdataset(normalized);
    write_text_atomic(out_path, text);
    out << json{{"wrote", out_path}, {"hash", content_hash(text)}}.dump() << "\n";
    return 0;
}

void print_error(std::ostream& err, std::string_view code, const std::string& message, int exit_code) {
    err << json{{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical-prior GP Bayesian optimization: synthesis, pre-training and BO runs", "mphd"};
    app.require_subcommand(1);

    // synth-gen
    std::string profile;
    std::string scale = "full";
    std::uint64_t seed = 0;
    std::string split = "auto";
    double train_fraction = 0.8;
    std::string out_path;
    CLI::App* synth = app.add_subcommand("synth-gen", "Generate a synthetic super-dataset with ground truth");
    synth->add_option("--profile", profile, "S or L")->required();
    synth->add_option("--scale", scale, "full or desk")->capture_default_str();
    synth->add_option("--seed", seed, "Root seed")->capture_default_str();
    synth->add_option("--split", split, "auto, none, per_dataset_subsplit or per_super_split")->capture_default_str();
    synth->add_option("--train-fraction", train_fraction, "Share of units labeled train")->capture_default_str();
    synth->add_option("--out", out_path, "Output super-dataset file")->required();

    // pretrain
    std::string data_path;
    std::string phi = "nn";
    std::vector<std::string> exclude;
    std::string nu = "auto";
    TrainingFlags training;
    CLI::App* pre = app.add_subcommand("pretrain", "Fit per-dataset GPs, then the prior model");
    pre->add_option("--data", data_path, "Super-dataset file")->required();
    pre->add_option("--phi", phi, "nn or constant")->capture_default_str();
    pre->add_option("--seed", seed, "Root seed")->capture_default_str();
    pre->add_option("--ntot-exclude", exclude, "Dataset id to leave out (repeatable)");
    pre->add_option("--nu", nu, "3/2, 5/2 or auto (ground truth when present, else 5/2)")->capture_default_str();
    pre->add_option("--out", out_path, "Output model file")->required();
    training.attach(pre);

    // bo-run
    BoRunFlags bo;
    CLI::App* run = app.add_subcommand("bo-run", "Run BO methods on every test sub-dataset");
    run->add_option("--data", bo.data, "Super-dataset file")->required();
    run->add_option("--model", bo.models, "Pre-trained model file (repeatable)");
    run->add_option("--methods", bo.methods,
                    "mphd, mphd-non-nn, base-gp, hand-hgp, noninformative-hgp, truth-hgp, truth-gp, random")
        ->delimiter(',')
        ->capture_default_str();
    run->add_option("--acq", bo.acq, "pi, ei or ucb")->capture_default_str();
    run->add_option("--zeta", bo.zeta, "PI target offset")->capture_default_str();
    run->add_option("--beta", bo.beta, "UCB exploration weight")->capture_default_str();
    run->add_flag("--ucb-linear-beta", bo.ucb_linear_beta, "Use mu + beta sigma instead of mu + sqrt(beta) sigma");
    run->add_option("--setting", bo.setting, "default or ntot")->capture_default_str();
    run->add_option("--seeds", bo.seeds, "Comma-separated seeds")->delimiter(',')->capture_default_str();
    run->add_option("--budget", bo.budget, "BO iterations after the initial design")->capture_default_str();
    run->add_option("--n-init", bo.n_init, "Initial random observations")->capture_default_str();
    run->add_option("--nu", bo.nu, "3/2, 5/2 or auto")->capture_default_str();
    run->add_option("--map-iterations", bo.map_iterations, "L-BFGS iterations per MAP refit")->capture_default_str();
    run->add_option("--map-restarts", bo.map_restarts, "Seeded MAP restarts")->capture_default_str();
    run->add_option("--out", bo.out, "Output results file")->required();

    // consistency
    ConsistencyFlags cons;
    TrainingFlags cons_training;
    CLI::App* con = app.add_subcommand("consistency", "Estimator consistency experiments over M or N");
    con->add_option("--vary", cons.vary, "M or N")->required();
    con->add_option("--grid", cons.grid, "Comma-separated grid values")->delimiter(',')->required();
    con->add_option("--repeats", cons.repeats, "Repeats per grid point")->capture_default_str();
    con->add_option("--profile", cons.profile, "gp1d (vary M), S or L (vary N)")->capture_default_str();
    con->add_option("--scale", cons.scale, "full or desk")->capture_default_str();
    con->add_option("--seed", cons.seed, "Root seed")->capture_default_str();
    con->add_option("--phi", cons.phi, "Phi kinds for vary N")->delimiter(',')->capture_default_str();
    con->add_option("--train-fraction", cons.train_fraction, "Hold out datasets beyond this share (0: none)")
        ->capture_default_str();
    con->add_option("--out", cons.out, "Output report file")->required();
    cons_training.attach(con);

    // inspect
    std::string inspect_path;
    CLI::App* ins = app.add_subcommand("inspect", "Summarize a model, super-dataset or results file");
    ins->add_option("path", inspect_path, "File to inspect")->required();

    // export-curves
    std::string results_path;
    std::string delimiter = "csv";
    std::string curves_out;
    CLI::App* exp = app.add_subcommand("export-curves", "Write mean/std regret curves as delimited text");
    exp->add_option("--results", results_path, "Results file")->required();
    exp->add_option("--format", delimiter, "csv or tsv")->capture_default_str();
    exp->add_option("--out", curves_out, "Output file (stdout when omitted)");

    // normalize
    std::string granularity = "dataset";
    CLI::App* norm = app.add_subcommand("normalize", "Min-max normalize a raw super-dataset");
    norm->add_option("--data", data_path, "Raw super-dataset file")->required();
    norm->add_option("--granularity", granularity, "Output ranges per dataset or per subdataset")->capture_default_str();
    norm->add_option("--out", out_path, "Output super-dataset file")->required();

    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", e.what(), 1);
        return 1;
    }

    try {
        if (synth->parsed()) return cmd_synth_gen(profile, scale, seed, split, train_fraction, out_path, out);
        if (pre->parsed()) return cmd_pretrain(data_path, phi, seed, exclude, nu, training, out_path, out);
        if (run->parsed()) return cmd_bo_run(bo, out);
        if (con->parsed()) return cmd_consistency(cons, cons_training, out);
        if (ins->parsed()) return cmd_inspect(inspect_path, out);
        if (exp->parsed()) return cmd_export_curves(results_path, delimiter, curves_out, out);
        if (norm->parsed()) return cmd_normalize(data_path, granularity, out_path, out);
    } catch (const Error& e) {
        const int code = e.is_user_error() ? 1 : 2;
        print_error(err, to_string(e.code()), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        print_error(err, "internal", e.what(), 2);
        return 2;
    }
    print_error(err, "usage", "no subcommand given", 1);
    return 1;
}

}  // namespace mphd
