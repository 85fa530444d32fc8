#include "mphd/bo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mphd/error.hpp"
#include "mphd/optim.hpp"
#include "mphd/parallel.hpp"

namespace mphd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// Log prior and its gradient in unconstrained coordinates; -infinity outside the support.
double log_prior_with_grad(const GpPrior& prior, const GpParams& p, Eigen::VectorXd* grad) {
    const auto d = static_cast<Eigen::Index>(p.dim());
    double lp = log_pdf(prior.constant_mean, p.constant_mean);
    if (grad) (*grad)[0] = log_pdf_dx(prior.constant_mean, p.constant_mean);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double x = p.length_scales[j];
        lp += log_pdf(prior.length_scales[static_cast<std::size_t>(j)], x);
        if (grad) (*grad)[1 + j] = log_pdf_dx(prior.length_scales[static_cast<std::size_t>(j)], x) * x;
    }
    lp += log_pdf(prior.signal_variance, p.signal_variance);
    lp += log_pdf(prior.noise_variance, p.noise_variance);
    if (grad) {
        (*grad)[d + 1] = log_pdf_dx(prior.signal_variance, p.signal_variance) * p.signal_variance;
        (*grad)[d + 2] = log_pdf_dx(prior.noise_variance, p.noise_variance) * p.noise_variance;
    }
    return lp;
}

GpParams sample_prior_params(const GpPrior& prior, const ParameterBox& box, Rng& rng) {
    GpParams p;
    p.constant_mean = sample(prior.constant_mean, rng);
    p.length_scales.resize(static_cast<Eigen::Index>(prior.length_scales.size()));
    for (std::size_t j = 0; j < prior.length_scales.size(); ++j) {
        p.length_scales[static_cast<Eigen::Index>(j)] = sample(prior.length_scales[j], rng);
    }
    p.signal_variance = sample(prior.signal_variance, rng);
    p.noise_variance = sample(prior.noise_variance, rng);
    return box.clamp(p);
}

SubDataset as_subdataset(const std::vector<TraceObservation>& obs, std::size_t dim) {
    SubDataset sd;
    sd.inputs.resize(static_cast<Eigen::Index>(obs.size()), static_cast<Eigen::Index>(dim));
    sd.outputs.resize(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) {
        sd.inputs.row(static_cast<Eigen::Index>(i)) = obs[i].x.transpose();
        sd.outputs[static_cast<Eigen::Index>(i)] = obs[i].y;
    }
    return sd;
}

Eigen::VectorXd uniform_point(const DomainDescriptor& domain, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> level(0, 9);
    Eigen::VectorXd x(static_cast<Eigen::Index>(domain.dim()));
    for (std::size_t j = 0; j < domain.dim(); ++j) {
        x[static_cast<Eigen::Index>(j)] = domain.dims[j].kind == DimKind::kDiscrete ? level(rng) / 9.0 : unit(rng);
    }
    return x;
}

std::size_t pick_unobserved(const std::vector<bool>& observed, Rng& rng) {
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!observed[i]) free.push_back(i);
    }
    if (free.empty()) throw Error(ErrorCode::kExhaustedDomain, "every tabular candidate has been observed");
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    return free[pick(rng)];
}

}  // namespace

void AcquisitionSpec::validate() const {
    if (!(zeta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "PI zeta must be >= 0");
    if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "UCB beta must be > 0");
}

std::string to_string(AcquisitionKind kind) {
    switch (kind) {
        case AcquisitionKind::kPi: return "pi";
        case AcquisitionKind::kEi: return "ei";
        case AcquisitionKind::kUcb: return "ucb";
    }
    return "pi";
}

AcquisitionKind acquisition_kind_from_string(const std::string& s) {
    if (s == "pi") return AcquisitionKind::kPi;
    if (s == "ei") return AcquisitionKind::kEi;
    if (s == "ucb") return AcquisitionKind::kUcb;
    throw Error(ErrorCode::kInvalidArgument, "unknown acquisition '" + s + "' (expected pi, ei or ucb)");
}

double acquisition_value(const AcquisitionSpec& spec, double mu, double sigma, double y_best) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::kInvalidArgument, "acquisition needs a finite sigma >= 0");
    }
    switch (spec.kind) {
        case AcquisitionKind::kPi: {
            const double target = y_best + spec.zeta;
            if (sigma == 0.0) return mu > target ? 1.0 : (mu == target ? 0.5 : 0.0);
            return normal_cdf((mu - target) / sigma);
        }
        case AcquisitionKind::kEi: {
            const double gap = mu - y_best;
            if (sigma == 0.0) return std::max(gap, 0.0);
            const double z = gap / sigma;
            return gap * normal_cdf(z) + sigma * normal_pdf(z);
        }
        case AcquisitionKind::kUcb:
            return mu + (spec.ucb_sqrt_beta ? std::sqrt(spec.beta) : spec.beta) * sigma;
    }
    return 0.0;
}

ObjectiveOracle ObjectiveOracle::tabular(const SubDataset& table, DomainDescriptor domain) {
    ObjectiveOracle o;
    o.domain = std::move(domain);
    o.source = TabularOracle{table.inputs, table.outputs};
    return o;
}

ObjectiveOracle ObjectiveOracle::tabular_self_scaled(const SubDataset& table, DomainDescriptor domain) {
    ObjectiveOracle o = tabular(table, std::move(domain));
    if (table.size() > 0) {
        o.value_lo = table.outputs.minCoeff();
        o.value_hi = table.outputs.maxCoeff();
        if (!(o.value_hi > o.value_lo)) o.value_hi = o.value_lo + 1.0;
    }
    return o;
}

std::optional<double> ObjectiveOracle::y_max() const {
    if (const auto* t = std::get_if<TabularOracle>(&source)) return t->values.maxCoeff();
    return std::get<ContinuousOracle>(source).y_max;
}

void ObjectiveOracle::validate() const {
    if (domain.dims.empty()) throw Error(ErrorCode::kInvalidArgument, "oracle domain has no dimensions");
    if (!(value_hi > value_lo)) throw Error(ErrorCode::kInvalidArgument, "oracle value range is empty");
    if (const auto* t = std::get_if<TabularOracle>(&source)) {
        if (t->values.size() == 0) throw Error(ErrorCode::kInvalidArgument, "tabular oracle has no candidates");
        if (t->candidates.rows() != t->values.size() ||
            static_cast<std::size_t>(t->candidates.cols()) != domain.dim()) {
            throw Error(ErrorCode::kDimensionMismatch, "tabular oracle candidates do not match the domain");
        }
    } else if (!std::get<ContinuousOracle>(source).function) {
        throw Error(ErrorCode::kInvalidArgument, "continuous oracle has no function");
    }
}

std::string to_string(MethodKind kind) {
    switch (kind) {
        case MethodKind::kMphdStandard: return "mphd";
        case MethodKind::kMphdNonNn: return "mphd-non-nn";
        case MethodKind::kBaseGp: return "base-gp";
        case MethodKind::kHandSpecifiedHgp: return "hand-hgp";
        case MethodKind::kNonInformativeHgp: return "noninformative-hgp";
        case MethodKind::kGroundTruthHgp: return "truth-hgp";
        case MethodKind::kGroundTruthGp: return "truth-gp";
        case MethodKind::kRandom: return "random";
    }
    return "random";
}

MethodKind method_kind_from_string(const std::string& s) {
    for (MethodKind k : {MethodKind::kMphdStandard, MethodKind::kMphdNonNn, MethodKind::kBaseGp,
                         MethodKind::kHandSpecifiedHgp, MethodKind::kNonInformativeHgp, MethodKind::kGroundTruthHgp,
                         MethodKind::kGroundTruthGp, MethodKind::kRandom}) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown method '" + s + "'");
}

void MethodSpec::validate(std::size_t dim) const {
    const bool needs_prior = kind == MethodKind::kMphdStandard || kind == MethodKind::kMphdNonNn ||
                             kind == MethodKind::kHandSpecifiedHgp || kind == MethodKind::kNonInformativeHgp ||
                             kind == MethodKind::kGroundTruthHgp;
    const bool needs_params = kind == MethodKind::kBaseGp || kind == MethodKind::kGroundTruthGp;
    if (needs_prior && (!prior || prior->length_scales.size() != dim)) {
        throw Error(ErrorCode::kConfiguration, "method " + to_string(kind) + " needs a prior for a " +
                                                   std::to_string(dim) + "-d domain");
    }
    if (needs_params) {
        if (!params || params->dim() != dim) {
            throw Error(ErrorCode::kConfiguration, "method " + to_string(kind) + " needs fixed parameters for a " +
                                                       std::to_string(dim) + "-d domain");
        }
        params->validate();
    }
}

GpParams prior_mode_params(const GpPrior& prior, const ParameterBox& box) {
    GpParams p;
    p.constant_mean = mode(prior.constant_mean);
    p.length_scales.resize(static_cast<Eigen::Index>(prior.length_scales.size()));
    for (std::size_t j = 0; j < prior.length_scales.size(); ++j) {
        p.length_scales[static_cast<Eigen::Index>(j)] = mode(prior.length_scales[j]);
    }
    p.signal_variance = mode(prior.signal_variance);
    p.noise_variance = mode(prior.noise_variance);
    return box.clamp(p);
}

double map_objective(const SubDataset& observations, const GpPrior& prior, Smoothness nu, const GpParams& params) {
    const double lp = log_prior_with_grad(prior, params, nullptr);
    if (!std::isfinite(lp)) return kInf;
    const double nll = observations.size() == 0 ? 0.0 : gp_nll(std::span(&observations, 1), params, nu);
    return nll - lp;
}

GpParams map_refit(const SubDataset& observations, const GpPrior& prior, Smoothness nu, const MapRefitConfig& cfg,
                   Rng& rng) {
    const std::size_t d = prior.length_scales.size();
    if (d == 0) throw Error(ErrorCode::kInvalidArgument, "MAP refit needs a prior with at least one length-scale");
    if (observations.size() > 0 && observations.dim() != d) {
        throw Error(ErrorCode::kDimensionMismatch, "observations have " + std::to_string(observations.dim()) +
                                                       " dimensions but the prior has " + std::to_string(d));
    }
    const GpParams mode_start = prior_mode_params(prior, cfg.box);
    if (observations.size() == 0) return mode_start;

    std::vector<GpParams> starts{mode_start};
    for (int r = 0; r < cfg.restarts; ++r) starts.push_back(sample_prior_params(prior, cfg.box, rng));

    const ObjectiveFn objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
        const GpParams p = from_unconstrained(u);
        Eigen::VectorXd prior_grad(u.size());
        const double lp = log_prior_with_grad(prior, p, &prior_grad);
        if (!std::isfinite(lp)) return kInf;
        const NllWithGradient r = gp_nll_grad(std::span(&observations, 1), p, nu);
        grad = r.gradient - prior_grad;
        return r.value - lp;
    };

    OptimConfig opt;
    opt.method = OptimMethod::kLbfgs;
    opt.iterations = cfg.iterations;
    opt.lower = cfg.box.lower_unconstrained(d);
    opt.upper = cfg.box.upper_unconstrained(d);
    // Starts on the box face would begin at the barrier; pull them just inside.
    const Eigen::VectorXd inset = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d + 3), 1e-9);

    double best_value = kInf;
    GpParams best;
    for (const GpParams& s : starts) {
        Eigen::VectorXd u0 = to_unconstrained(s).cwiseMax(*opt.lower + inset).cwiseMin(*opt.upper - inset);
        try {
            const OptimResult res = lbfgs(objective, u0, opt);
            if (res.value < best_value) {
                best_value = res.value;
                best = from_unconstrained(res.x);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kNumericalFailure) throw;
        }
    }
    if (!std::isfinite(best_value)) throw Error(ErrorCode::kNumericalFailure, "MAP refit: every start failed");
    return best;
}

Proposal propose_next(const AcquisitionSpec& acq, const GpParams& params, Smoothness nu,
                      const SubDataset& observations, const ObjectiveOracle& oracle,
                      const std::vector<bool>& observed, Rng& rng) {
    acq.validate();
    if (observations.size() == 0) throw Error(ErrorCode::kInvalidArgument, "proposals need at least one observation");
    const double y_best = observations.outputs.maxCoeff();

    Eigen::MatrixXd query;
    std::vector<std::size_t> index;
    const auto* table = std::get_if<TabularOracle>(&oracle.source);
    if (table) {
        if (observed.size() != static_cast<std::size_t>(table->values.size())) {
            throw Error(ErrorCode::kDimensionMismatch, "observed mask does not match the candidate table");
        }
        for (std::size_t i = 0; i < observed.size(); ++i) {
            if (!observed[i]) index.push_back(i);
        }
        if (index.empty()) throw Error(ErrorCode::kExhaustedDomain, "every tabular candidate has been observed");
        query.resize(static_cast<Eigen::Index>(index.size()), table->candidates.cols());
        for (std::size_t k = 0; k < index.size(); ++k) {
            query.row(static_cast<Eigen::Index>(k)) = table->candidates.row(static_cast<Eigen::Index>(index[k]));
        }
    } else {
        constexpr int kDraws = 2000;
        query.resize(kDraws, static_cast<Eigen::Index>(oracle.dim()));
        for (int k = 0; k < kDraws; ++k) query.row(k) = uniform_point(oracle.domain, rng).transpose();
    }

    const PosteriorSummary post = gp_posterior(params, nu, observations, query);
    Eigen::Index best = 0;
    double best_value = -kInf;
    for (Eigen::Index k = 0; k < query.rows(); ++k) {
        const double a = acquisition_value(acq, post.mean[k], std::sqrt(post.variance[k]), y_best);
        if (a > best_value) {
            best_value = a;
            best = k;
        }
    }
    Proposal p;
    p.x = query.row(best).transpose();
    if (table) p.candidate = index[static_cast<std::size_t>(best)];
    return p;
}

void BoConfig::validate() const {
    if (budget < 0) throw Error(ErrorCode::kInvalidArgument, "budget must be >= 0");
    if (n_init < 1) throw Error(ErrorCode::kInvalidArgument, "n_init must be >= 1");
    if (map.iterations < 1 || map.restarts < 0) throw Error(ErrorCode::kInvalidArgument, "invalid MAP refit config");
}

BoTrace run_bo(const MethodSpec& method, const AcquisitionSpec& acq, const ObjectiveOracle& oracle,
               const BoConfig& cfg) {
    cfg.validate();
    acq.validate();
    oracle.validate();
    method.validate(oracle.dim());
    const auto* table = std::get_if<TabularOracle>(&oracle.source);
    const std::size_t n_candidates = table ? static_cast<std::size_t>(table->values.size()) : 0;
    if (table && n_candidates < static_cast<std::size_t>(cfg.n_init)) {
        throw Error(ErrorCode::kInvalidArgument, "tabular oracle has fewer candidates than initial observations");
    }

    BoTrace trace;
    trace.method = to_string(method.kind);
    trace.seed = cfg.seed;
    std::vector<bool> observed(n_candidates, false);

    auto observe = [&](std::optional<std::size_t> candidate, Eigen::VectorXd x, int iteration) {
        TraceObservation o;
        o.iteration = iteration;
        o.initial = iteration == 0;
        o.candidate = candidate;
        if (candidate) {
            observed[*candidate] = true;
            o.x = table->candidates.row(static_cast<Eigen::Index>(*candidate)).transpose();
            o.y = table->values[static_cast<Eigen::Index>(*candidate)];
        } else {
            o.y = std::get<ContinuousOracle>(oracle.source).function(x);
            o.x = std::move(x);
        }
        trace.observations.push_back(std::move(o));
    };

    // The initial design depends only on (seed, task), never on the method.
    Rng init_rng = derive_rng(cfg.seed, "bo-init", cfg.task_key);
    if (table) {
        std::vector<std::size_t> order(n_candidates);
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < cfg.n_init; ++i) {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), n_candidates - 1);
            std::swap(order[static_cast<std::size_t>(i)], order[pick(init_rng)]);
            observe(order[static_cast<std::size_t>(i)], {}, 0);
        }
    } else {
        for (int i = 0; i < cfg.n_init; ++i) observe(std::nullopt, uniform_point(oracle.domain, init_rng), 0);
    }

    Rng rng = derive_rng(cfg.seed, "bo-method/" + to_string(method.kind), cfg.task_key);
    for (int t = 1; t <= cfg.budget; ++t) {
        if (method.kind == MethodKind::kRandom) {
            if (table) {
                observe(pick_unobserved(observed, rng), {}, t);
            } else {
                observe(std::nullopt, uniform_point(oracle.domain, rng), t);
            }
            continue;
        }
        const SubDataset data = as_subdataset(trace.observations, oracle.dim());
        const GpParams params = method.refits() ? map_refit(data, *method.prior, method.nu, cfg.map, rng) : *method.params;
        Proposal p = propose_next(acq, params, method.nu, data, oracle, observed, rng);
        observe(p.candidate, std::move(p.x), t);
    }

    double best = -kInf;
    std::size_t k = 0;
    for (; k < static_cast<std::size_t>(cfg.n_init); ++k) best = std::max(best, trace.observations[k].y);
    trace.incumbent.push_back(best);
    for (; k < trace.observations.size(); ++k) {
        best = std::max(best, trace.observations[k].y);
        trace.incumbent.push_back(best);
    }
    if (oracle.y_max()) trace.regret = normalized_simple_regret(trace, oracle);
    return trace;
}

std::vector<double> normalized_simple_regret(const BoTrace& trace, const ObjectiveOracle& oracle) {
    const std::optional<double> y_max = oracle.y_max();
    if (!y_max) throw Error(ErrorCode::kConfiguration, "oracle has no recorded maximum; regret is undefined");
    const double range = oracle.value_hi - oracle.value_lo;
    std::vector<double> out;
    out.reserve(trace.incumbent.size());
    for (double inc : trace.incumbent) out.push_back((*y_max - inc) / range);
    return out;
}

std::vector<double> regret_per_observation(std::span<const double> ys, const ObjectiveOracle& oracle) {
    const std::optional<double> y_max = oracle.y_max();
    if (!y_max) throw Error(ErrorCode::kConfiguration, "oracle has no recorded maximum; regret is undefined");
    const double range = oracle.value_hi - oracle.value_lo;
    std::vector<double> out;
    double best = -kInf;
    for (double y : ys) {
        best = std::max(best, y);
        out.push_back((*y_max - best) / range);
    }
    return out;
}

std::string to_string(Setting s) { return s == Setting::kNtot ? "ntot" : "default"; }

Setting setting_from_string(const std::string& s) {
    if (s == "default") return Setting::kDefault;
    if (s == "ntot") return Setting::kNtot;
    throw Error(ErrorCode::kInvalidArgument, "unknown setting '" + s + "' (expected default or ntot)");
}

const PretrainedModel& select_model(std::span<const PretrainedModel> models, PhiKind kind, Setting setting,
                                    const std::string& dataset_id) {
    for (const PretrainedModel& m : models) {
        if (m.phi.kind() != kind) continue;
        const auto& ex = m.provenance.excluded_ids;
        const bool excludes_test = std::find(ex.begin(), ex.end(), dataset_id) != ex.end();
        if (setting == Setting::kDefault && ex.empty()) return m;
        if (setting == Setting::kNtot && excludes_test) return m;
    }
    throw Error(ErrorCode::kConfiguration,
                "no " + to_string(kind) + " model for dataset '" + dataset_id + "' in the " + to_string(setting) +
                    " setting" + (setting == Setting::kNtot ? " (pre-train with that dataset excluded)" : ""));
}

MethodSpec resolve_method(MethodKind kind, const Dataset& dataset, std::span<const PretrainedModel> models,
                          Setting setting, Smoothness nu) {
    MethodSpec spec;
    spec.kind = kind;
    spec.nu = nu;
    auto require_truth = [&]() -> const GroundTruth& {
        if (!dataset.ground_truth) {
            throw Error(ErrorCode::kConfiguration,
                        to_string(kind) + " needs ground truth, which dataset '" + dataset.id + "' lacks");
        }
        return *dataset.ground_truth;
    };
    switch (kind) {
        case MethodKind::kMphdStandard:
        case MethodKind::kMphdNonNn: {
            const PhiKind pk = kind == MethodKind::kMphdStandard ? PhiKind::kNn : PhiKind::kConstant;
            const PretrainedModel& m = select_model(models, pk, setting, dataset.id);
            spec.prior = gp_prior_for_domain(m.phi, dataset.domain);
            spec.nu = m.config.nu;
            break;
        }
        case MethodKind::kBaseGp: {
            if (setting == Setting::kNtot) {
                throw Error(ErrorCode::kConfiguration, "base-gp needs a fit on the test domain, unavailable under ntot");
            }
            for (const PretrainedModel& m : models) {
                if (const DatasetEstimate* e = m.find_estimate(dataset.id)) {
                    spec.params = e->params;
                    spec.nu = m.config.nu;
                    break;
                }
            }
            if (!spec.params) {
                throw Error(ErrorCode::kConfiguration, "base-gp: no model holds a fit for dataset '" + dataset.id + "'");
            }
            break;
        }
        case MethodKind::kHandSpecifiedHgp: spec.prior = hand_specified_prior(dataset.dim()); break;
        case MethodKind::kNonInformativeHgp: spec.prior = non_informative_prior(dataset.dim()); break;
        case MethodKind::kGroundTruthHgp: {
            const GroundTruth& t = require_truth();
            spec.prior = t.prior;
            spec.nu = t.nu;
            break;
        }
        case MethodKind::kGroundTruthGp: {
            const GroundTruth& t = require_truth();
            spec.params = t.params;
            spec.nu = t.nu;
            break;
        }
        case MethodKind::kRandom: break;
    }
    spec.validate(dataset.dim());
    return spec;
}

ExperimentResult run_experiment(const SuperDataset& superdataset, std::span<const PretrainedModel> models,
                                const ExperimentConfig& cfg) {
    if (cfg.methods.empty()) throw Error(ErrorCode::kConfiguration, "no methods requested");
    if (cfg.seeds.empty()) throw Error(ErrorCode::kConfiguration, "no seeds requested");
    cfg.acquisition.validate();

    struct Task {
        const Dataset* dataset;
        std::size_t spec_index;
        const LabeledSubDataset* sub;
        std::size_t method;
        std::uint64_t seed;
    };
    std::vector<std::vector<MethodSpec>> specs;  // per dataset, per method
    std::vector<Task> tasks;
    for (const Dataset& ds : superdataset.datasets) {
        const auto tests = ds.test_subdatasets();
        if (tests.empty()) continue;
        std::vector<MethodSpec> per_method;
        for (MethodKind k : cfg.methods) per_method.push_back(resolve_method(k, ds, models, cfg.setting, cfg.nu));
        specs.push_back(std::move(per_method));
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            for (const LabeledSubDataset* sub : tests) {
                for (std::uint64_t seed : cfg.seeds) tasks.push_back(Task{&ds, specs.size() - 1, sub, m, seed});
            }
        }
    }
    if (tasks.empty()) throw Error(ErrorCode::kConfiguration, "the super-dataset has no test sub-datasets");

    std::vector<RunRecord> records(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t t) {
        const Task& task = tasks[t];
        const ObjectiveOracle oracle = superdataset.normalized
                                           ? ObjectiveOracle::tabular(task.sub->data, task.dataset->domain)
                                           : ObjectiveOracle::tabular_self_scaled(task.sub->data, task.dataset->domain);
        BoConfig bc;
        bc.budget = cfg.budget;
        bc.n_init = cfg.n_init;
        bc.seed = task.seed;
        bc.task_key = fnv1a64(task.dataset->id + "/" + task.sub->id);
        bc.map = cfg.map;
        const BoTrace trace = run_bo(specs[task.spec_index][task.method], cfg.acquisition, oracle, bc);
        records[t] = RunRecord{task.dataset->id, task.sub->id, task.seed, trace.regret};
    });

    ExperimentResult result;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        MethodCurve curve;
        curve.method = cfg.methods[m];
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (tasks[t].method == m) curve.runs.push_back(records[t]);
        }
        const std::size_t len = static_cast<std::size_t>(cfg.budget) + 1;
        curve.mean.assign(len, 0.0);
        curve.stddev.assign(len, 0.0);
        const double n = static_cast<double>(curve.runs.size());
        for (const RunRecord& r : curve.runs) {
            for (std::size_t i = 0; i < len; ++i) curve.mean[i] += r.regret[i] / n;
        }
        for (const RunRecord& r : curve.runs) {
            for (std::size_t i = 0; i < len; ++i) curve.stddev[i] += (r.regret[i] - curve.mean[i]) * (r.regret[i] - curve.mean[i]) / n;
        }
        for (double& s : curve.stddev) s = std::sqrt(s);
        result.curves.push_back(std::move(curve));
    }
    return result;
}

}  // namespace mphd
