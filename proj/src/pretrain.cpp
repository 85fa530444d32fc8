#include "mphd/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "mphd/error.hpp"
#include "mphd/optim.hpp"
#include "mphd/parallel.hpp"

namespace mphd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double full_nll_or_inf(std::span<const SubDataset> subdatasets, const GpParams& params, Smoothness nu) {
    try {
        const double v = gp_nll(subdatasets, params, nu);
        return std::isfinite(v) ? v : kInf;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kNumericalFailure) throw;
        return kInf;
    }
}

GpParams random_start(const GpParams& base, const ParameterBox& box, Rng& rng) {
    std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(2.0));
    std::uniform_real_distribution<double> unit_log(-1.0, 1.0);
    std::uniform_real_distribution<double> noise_exp(-4.0, -1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    GpParams p = base;
    for (Eigen::Index j = 0; j < p.length_scales.size(); ++j) p.length_scales[j] = std::exp(log_scale(rng));
    p.signal_variance = base.signal_variance * std::exp(unit_log(rng));
    p.noise_variance = p.signal_variance * std::pow(10.0, noise_exp(rng));
    p.constant_mean = base.constant_mean + 0.5 * std::sqrt(base.signal_variance) * normal(rng);
    return box.clamp(p);
}

/// Draws a uniformly random subset of rows per sub-dataset, reusing one index permutation
/// per sub-dataset (a partial Fisher-Yates pass is uniform whatever the prior order).
class Subsampler {
public:
    Subsampler(std::span<const SubDataset> subdatasets, std::size_t per_subdataset)
        : subdatasets_(subdatasets), k_(per_subdataset) {
        for (const SubDataset& sd : subdatasets_) {
            std::vector<Eigen::Index> idx(sd.size());
            std::iota(idx.begin(), idx.end(), Eigen::Index{0});
            perms_.push_back(std::move(idx));
            if (sd.size() > k_) all_small_ = false;
        }
    }

    bool uses_full_data() const { return all_small_; }

    std::vector<SubDataset> draw(Rng& rng) {
        std::vector<SubDataset> batch;
        batch.reserve(subdatasets_.size());
        for (std::size_t s = 0; s < subdatasets_.size(); ++s) {
            const SubDataset& sd = subdatasets_[s];
            if (sd.size() <= k_) {
                batch.push_back(sd);
                continue;
            }
            auto& perm = perms_[s];
            for (std::size_t i = 0; i < k_; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, perm.size() - 1);
                std::swap(perm[i], perm[pick(rng)]);
            }
            SubDataset sub;
            sub.inputs.resize(static_cast<Eigen::Index>(k_), sd.inputs.cols());
            sub.outputs.resize(static_cast<Eigen::Index>(k_));
            for (std::size_t i = 0; i < k_; ++i) {
                sub.inputs.row(static_cast<Eigen::Index>(i)) = sd.inputs.row(perm[i]);
                sub.outputs[static_cast<Eigen::Index>(i)] = sd.outputs[perm[i]];
            }
            batch.push_back(std::move(sub));
        }
        return batch;
    }

private:
    std::span<const SubDataset> subdatasets_;
    std::size_t k_;
    std::vector<std::vector<Eigen::Index>> perms_;
    bool all_small_ = true;
};

void append_bytes(std::string& buf, const void* data, std::size_t n) {
    buf.append(static_cast<const char*>(data), n);
}

void append_double(std::string& buf, double v) { append_bytes(buf, &v, sizeof v); }

void append_string(std::string& buf, const std::string& s) {
    const std::uint64_t n = s.size();
    append_bytes(buf, &n, sizeof n);
    buf += s;
}

std::string training_data_hash(const SuperDataset& superdataset, const std::vector<std::string>& ids) {
    std::string buf;
    for (const std::string& id : ids) {
        const Dataset& ds = *superdataset.find(id);
        append_string(buf, ds.id);
        for (const DimSpec& dim : ds.domain.dims) append_string(buf, to_string(dim.kind));
        for (const SubDataset& sd : ds.training_subdatasets()) {
            const std::uint64_t rows = sd.size();
            append_bytes(buf, &rows, sizeof rows);
            for (Eigen::Index r = 0; r < sd.inputs.rows(); ++r) {
                for (Eigen::Index c = 0; c < sd.inputs.cols(); ++c) append_double(buf, sd.inputs(r, c));
                append_double(buf, sd.outputs[r]);
            }
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(buf)));
    return hex;
}

double sample_mean(std::span<const SubDataset> subdatasets) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const SubDataset& sd : subdatasets) {
        sum += sd.outputs.sum();
        n += sd.size();
    }
    return sum / static_cast<double>(n);
}

}  // namespace

void PretrainConfig::validate() const {
    if (step1.iterations < 1 || step2.iterations < 1) {
        throw Error(ErrorCode::kInvalidArgument, "pre-training iteration counts must be >= 1");
    }
    if (!(step1.learning_rate > 0.0) || !(step2.learning_rate > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "pre-training learning rates must be positive");
    }
    if (step1.subsample_per_subdataset < 2) {
        throw Error(ErrorCode::kInvalidArgument, "step-1 subsample size must be >= 2");
    }
    if (step1.restarts < 0) throw Error(ErrorCode::kInvalidArgument, "step-1 restarts must be >= 0");
}

Eigen::VectorXd ParameterBox::lower_unconstrained(std::size_t dim) const {
    Eigen::VectorXd lo(static_cast<Eigen::Index>(dim + 3));
    lo[0] = -mean_abs;
    lo.segment(1, static_cast<Eigen::Index>(dim)).setConstant(std::log(scale_lo));
    lo[static_cast<Eigen::Index>(dim) + 1] = std::log(scale_lo);
    lo[static_cast<Eigen::Index>(dim) + 2] = std::log(noise_lo);
    return lo;
}

Eigen::VectorXd ParameterBox::upper_unconstrained(std::size_t dim) const {
    Eigen::VectorXd hi(static_cast<Eigen::Index>(dim + 3));
    hi[0] = mean_abs;
    hi.segment(1, static_cast<Eigen::Index>(dim)).setConstant(std::log(scale_hi));
    hi[static_cast<Eigen::Index>(dim) + 1] = std::log(scale_hi);
    hi[static_cast<Eigen::Index>(dim) + 2] = std::log(noise_hi);
    return hi;
}

GpParams ParameterBox::clamp(GpParams p) const {
    p.constant_mean = std::clamp(p.constant_mean, -mean_abs, mean_abs);
    p.length_scales = p.length_scales.cwiseMax(scale_lo).cwiseMin(scale_hi);
    p.signal_variance = std::clamp(p.signal_variance, scale_lo, scale_hi);
    p.noise_variance = std::clamp(p.noise_variance, noise_lo, noise_hi);
    return p;
}

const DatasetEstimate* PretrainedModel::find_estimate(const std::string& dataset_id) const {
    for (const DatasetEstimate& e : estimates) {
        if (e.dataset_id == dataset_id) return &e;
    }
    return nullptr;
}

GpParams step1_initial_params(std::span<const SubDataset> subdatasets) {
    const std::size_t d = common_dimension(subdatasets);
    const double mu = sample_mean(subdatasets);
    double ss = 0.0;
    std::size_t n = 0;
    for (const SubDataset& sd : subdatasets) {
        ss += (sd.outputs.array() - mu).square().sum();
        n += sd.size();
    }
    GpParams p;
    p.constant_mean = mu;
    p.length_scales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), 0.5);
    p.signal_variance = std::max(ss / static_cast<double>(n), 1e-6);
    p.noise_variance = 1e-3 * p.signal_variance;
    return ParameterBox{}.clamp(p);
}

GpParams step1_fit_dataset(std::span<const SubDataset> subdatasets, const PretrainConfig& cfg, Rng& rng) {
    cfg.validate();
    if (subdatasets.empty()) throw Error(ErrorCode::kInvalidArgument, "step 1 needs at least one sub-dataset");
    for (const SubDataset& sd : subdatasets) {
        if (sd.size() < 2) throw Error(ErrorCode::kInvalidArgument, "step 1 needs >= 2 observations per sub-dataset");
    }
    const std::size_t d = common_dimension(subdatasets);
    const ParameterBox box;

    std::vector<GpParams> starts{step1_initial_params(subdatasets)};
    for (int r = 0; r < cfg.step1.restarts; ++r) starts.push_back(random_start(starts.front(), box, rng));
    std::vector<std::uint64_t> stream_seeds;
    for (std::size_t s = 0; s < starts.size(); ++s) stream_seeds.push_back(rng());

    OptimConfig opt;
    opt.method = OptimMethod::kAdam;
    opt.iterations = cfg.step1.iterations;
    opt.learning_rate = cfg.step1.learning_rate;
    opt.lower = box.lower_unconstrained(d);
    opt.upper = box.upper_unconstrained(d);

    GpParams best;
    double best_nll = kInf;
    auto consider = [&](const GpParams& p) {
        const double v = full_nll_or_inf(subdatasets, p, cfg.nu);
        if (v < best_nll) {
            best_nll = v;
            best = p;
        }
    };

    for (std::size_t s = 0; s < starts.size(); ++s) {
        consider(starts[s]);
        Rng stream(stream_seeds[s]);
        Subsampler sampler(subdatasets, cfg.step1.subsample_per_subdataset);
        const ObjectiveFn objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
            const GpParams p = from_unconstrained(u);
            NllWithGradient r = sampler.uses_full_data()
                                    ? gp_nll_grad(subdatasets, p, cfg.nu)
                                    : [&] {
                                          const std::vector<SubDataset> batch = sampler.draw(stream);
                                          return gp_nll_grad(batch, p, cfg.nu);
                                      }();
            grad = r.gradient;
            return r.value;
        };
        try {
            const OptimResult res = adam(objective, to_unconstrained(starts[s]), opt);
            consider(from_unconstrained(res.x));
            consider(box.clamp(from_unconstrained(res.x)));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kNumericalFailure) throw;
        }
    }
    if (!std::isfinite(best_nll)) {
        throw Error(ErrorCode::kNumericalFailure, "step 1: every start failed numerically");
    }
    return best;
}

std::vector<PhiPair> phi_training_pairs(std::span<const DatasetEstimate> estimates) {
    std::vector<PhiPair> pairs;
    for (const DatasetEstimate& e : estimates) {
        const std::vector<ContextVector> contexts = encode_contexts(e.domain);
        if (contexts.size() != e.params.dim()) {
            throw Error(ErrorCode::kDimensionMismatch, "estimate for '" + e.dataset_id + "' does not match its domain");
        }
        for (std::size_t j = 0; j < contexts.size(); ++j) {
            pairs.push_back(PhiPair{contexts[j], e.params.length_scales[static_cast<Eigen::Index>(j)]});
        }
    }
    return pairs;
}

PhiModel step2_fit(std::span<const DatasetEstimate> estimates, PhiKind kind, const PretrainConfig& cfg, Rng& rng) {
    cfg.validate();
    if (estimates.size() < 2) throw Error(ErrorCode::kInvalidArgument, "step 2 needs estimates from >= 2 datasets");

    std::vector<double> means;
    std::vector<double> signals;
    std::vector<double> noises;
    for (const DatasetEstimate& e : estimates) {
        e.params.validate();
        means.push_back(e.params.constant_mean);
        signals.push_back(e.params.signal_variance);
        noises.push_back(e.params.noise_variance);
    }
    PhiModel model;
    model.shared.constant_mean = normal_mle(means);
    model.shared.signal_variance = gamma_mle(signals);
    model.shared.noise_variance = gamma_mle(noises);

    const std::vector<PhiPair> pairs = phi_training_pairs(estimates);
    if (kind == PhiKind::kConstant) {
        std::vector<double> pooled;
        for (const PhiPair& p : pairs) pooled.push_back(p.value);
        model.length_scale = ConstantPhi{gamma_mle(pooled)};
        return model;
    }

    NnPhi net = NnPhi::initialize(rng);
    OptimConfig opt;
    opt.method = OptimMethod::kAdam;
    opt.iterations = cfg.step2.iterations;
    opt.learning_rate = cfg.step2.learning_rate;
    NnPhi scratch = net;
    const ObjectiveFn objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd& grad) {
        scratch.set_parameters(w);
        PhiObjective r = phi_objective_and_grad(scratch, pairs);
        grad = r.gradient;
        return r.value;
    };
    const OptimResult res = adam(objective, net.parameters(), opt);
    net.set_parameters(res.x);
    model.length_scale = std::move(net);
    return model;
}

std::vector<DatasetEstimate> step1_fit_all(const SuperDataset& superdataset, const PretrainConfig& cfg,
                                           std::uint64_t seed) {
    cfg.validate();
    std::vector<const Dataset*> included;
    for (const Dataset& ds : superdataset.datasets) {
        if (cfg.exclude_dataset_ids.count(ds.id) != 0) continue;
        if (ds.training_subdatasets().empty()) continue;
        included.push_back(&ds);
    }
    std::vector<DatasetEstimate> estimates(included.size());
    parallel_for(included.size(), [&](std::size_t i) {
        const Dataset& ds = *included[i];
        try {
            Rng rng = derive_rng(seed, "step1/" + ds.id);
            const std::vector<SubDataset> train = ds.training_subdatasets();
            DatasetEstimate e;
            e.dataset_id = ds.id;
            e.domain = ds.domain;
            e.params = step1_fit_dataset(train, cfg, rng);
            e.nll = gp_nll(train, e.params, cfg.nu);
            estimates[i] = std::move(e);
        } catch (const Error& err) {
            throw Error(err.code(), "dataset '" + ds.id + "': " + err.what());
        }
    });
    return estimates;
}

PretrainedModel pretrain_from_estimates(std::vector<DatasetEstimate> estimates, PhiKind kind,
                                        const PretrainConfig& cfg, Provenance provenance) {
    Rng rng = derive_rng(provenance.seed, "step2");
    PretrainedModel model;
    model.phi = step2_fit(estimates, kind, cfg, rng);
    model.estimates = std::move(estimates);
    model.config = cfg;
    model.provenance = std::move(provenance);
    return model;
}

PretrainedModel pretrain(const SuperDataset& superdataset, PhiKind kind, const PretrainConfig& cfg,
                         std::uint64_t seed) {
    cfg.validate();
    std::vector<DatasetEstimate> estimates = step1_fit_all(superdataset, cfg, seed);
    if (estimates.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument,
                    "pre-training needs >= 2 datasets with training data after exclusions, found " +
                        std::to_string(estimates.size()));
    }
    Provenance prov;
    prov.seed = seed;
    for (const DatasetEstimate& e : estimates) prov.dataset_ids.push_back(e.dataset_id);
    prov.excluded_ids.assign(cfg.exclude_dataset_ids.begin(), cfg.exclude_dataset_ids.end());
    prov.training_data_hash = training_data_hash(superdataset, prov.dataset_ids);
    return pretrain_from_estimates(std::move(estimates), kind, cfg, std::move(prov));
}

double prior_nll(const GpPrior& prior, const GpParams& params) {
    if (prior.length_scales.size() != params.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "prior and parameters have different dimensions");
    }
    double lp = log_pdf(prior.constant_mean, params.constant_mean);
    for (std::size_t j = 0; j < params.dim(); ++j) {
        lp += log_pdf(prior.length_scales[j], params.length_scales[static_cast<Eigen::Index>(j)]);
    }
    lp += log_pdf(prior.signal_variance, params.signal_variance);
    lp += log_pdf(prior.noise_variance, params.noise_variance);
    return -lp;
}

double heldout_prior_nll(const PhiModel& phi, std::span<const DatasetEstimate> estimates) {
    if (estimates.empty()) throw Error(ErrorCode::kInvalidArgument, "held-out NLL needs at least one estimate");
    double total = 0.0;
    for (const DatasetEstimate& e : estimates) total += prior_nll(gp_prior_for_domain(phi, e.domain), e.params);
    return total / static_cast<double>(estimates.size());
}

SubDataset build_pseudo_subdataset(std::span<const SubDataset> subdatasets, double q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorCode::kInvalidArgument, "pseudo sub-dataset needs q > 0");
    const std::size_t d = common_dimension(subdatasets);
    Eigen::Index total = 0;
    for (const SubDataset& sd : subdatasets) total += sd.inputs.rows();

    Eigen::MatrixXd all(total, static_cast<Eigen::Index>(d));
    Eigen::VectorXd outputs(total);
    Eigen::Index row = 0;
    for (const SubDataset& sd : subdatasets) {
        all.middleRows(row, sd.inputs.rows()) = sd.inputs;
        outputs.segment(row, sd.outputs.size()) = sd.outputs;
        row += sd.inputs.rows();
    }
    double diameter = 0.0;
    for (Eigen::Index i = 0; i < total; ++i) {
        for (Eigen::Index j = i + 1; j < total; ++j) diameter = std::max(diameter, (all.row(i) - all.row(j)).norm());
    }
    const double step = q + diameter + 1.0;

    row = 0;
    for (std::size_t b = 0; b < subdatasets.size(); ++b) {
        const Eigen::Index rows = subdatasets[b].inputs.rows();
        all.middleRows(row, rows).array() += step * static_cast<double>(b);
        row += rows;
    }
    return SubDataset{std::move(all), std::move(outputs)};
}

ParameterSummary summarize(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot summarize an empty sample");
    ParameterSummary s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

std::vector<VaryMPoint> consistency_vary_m(const VaryMSpec& spec) {
    spec.truth.validate();
    if (spec.grid.empty() || spec.repeats < 1) throw Error(ErrorCode::kInvalidArgument, "vary-M needs a grid and repeats");
    const std::size_t d = spec.truth.dim();
    const std::size_t n_tasks = spec.grid.size() * static_cast<std::size_t>(spec.repeats);
    std::vector<GpParams> fits(n_tasks);
    parallel_for(n_tasks, [&](std::size_t t) {
        const std::size_t m = spec.grid[t / static_cast<std::size_t>(spec.repeats)];
        const std::uint64_t rep = t % static_cast<std::size_t>(spec.repeats);
        Rng rng = derive_rng(spec.seed, "vary-m/" + std::to_string(m), rep);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<SubDataset> subs;
        for (std::size_t j = 0; j < m; ++j) {
            SubDataset sd;
            sd.inputs.resize(static_cast<Eigen::Index>(spec.observations_per_subdataset), static_cast<Eigen::Index>(d));
            for (Eigen::Index r = 0; r < sd.inputs.rows(); ++r) {
                for (Eigen::Index c = 0; c < sd.inputs.cols(); ++c) sd.inputs(r, c) = unit(rng);
            }
            sd.outputs = sample_gp_observations(sd.inputs, spec.truth, spec.nu, spec.truth.noise_variance, rng);
            subs.push_back(std::move(sd));
        }
        PretrainConfig cfg = spec.pretrain;
        cfg.nu = spec.nu;
        fits[t] = step1_fit_dataset(subs, cfg, rng);
    });

    std::vector<VaryMPoint> out;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        VaryMPoint point;
        point.m = spec.grid[g];
        std::vector<double> ls, sv, nv, cm;
        for (int r = 0; r < spec.repeats; ++r) {
            const GpParams& p = fits[g * static_cast<std::size_t>(spec.repeats) + static_cast<std::size_t>(r)];
            point.estimates.push_back(p);
            ls.push_back(p.length_scales[0]);
            sv.push_back(p.signal_variance);
            nv.push_back(p.noise_variance);
            cm.push_back(p.constant_mean);
        }
        point.length_scale = summarize(ls);
        point.signal_variance = summarize(sv);
        point.noise_variance = summarize(nv);
        point.constant_mean = summarize(cm);
        out.push_back(std::move(point));
    }
    return out;
}

std::vector<double> VaryNReport::values(std::size_t n, PhiKind kind, double VaryNRun::*field) const {
    std::vector<double> out;
    for (const VaryNRun& r : runs) {
        if (r.n == n && r.kind == kind) out.push_back(r.*field);
    }
    return out;
}

std::vector<double> VaryNReport::heldout(std::size_t n, PhiKind kind) const {
    std::vector<double> out;
    for (const VaryNRun& r : runs) {
        if (r.n == n && r.kind == kind && r.heldout_nll) out.push_back(*r.heldout_nll);
    }
    return out;
}

VaryNReport consistency_vary_n(const VaryNSpec& spec) {
    spec.generator.validate();
    if (spec.grid.empty() || spec.repeats < 1) throw Error(ErrorCode::kInvalidArgument, "vary-N needs a grid and repeats");
    VaryNReport report;
    for (int rep = 0; rep < spec.repeats; ++rep) {
        const std::uint64_t rep_seed = derive_seed(spec.seed, "vary-n", static_cast<std::uint64_t>(rep));
        SynthConfig gen = spec.generator;
        gen.seed = rep_seed;
        SuperDataset data = generate_superdataset(gen);
        for (Dataset& ds : data.datasets) {
            for (auto& sd : ds.subdatasets) sd.split = Split::kUnassigned;
        }

        PretrainConfig cfg = spec.pretrain;
        cfg.nu = gen.nu;
        cfg.exclude_dataset_ids.clear();
        const std::vector<DatasetEstimate> all = step1_fit_all(data, cfg, rep_seed);
        std::size_t n_train = all.size();
        if (spec.train_fraction) {
            n_train = static_cast<std::size_t>(std::lround(*spec.train_fraction * static_cast<double>(all.size())));
            n_train = std::clamp<std::size_t>(n_train, 1, all.size() - 1);
        }
        const std::span<const DatasetEstimate> train(all.data(), n_train);
        const std::span<const DatasetEstimate> heldout(all.data() + n_train, all.size() - n_train);

        for (std::size_t n : spec.grid) {
            if (n < 2 || n > n_train) {
                throw Error(ErrorCode::kInvalidArgument, "vary-N grid value " + std::to_string(n) +
                                                             " outside [2, " + std::to_string(n_train) + "]");
            }
            for (PhiKind kind : spec.phi_kinds) {
                Rng rng = derive_rng(rep_seed, "step2/" + to_string(kind), n);
                const PhiModel phi = step2_fit(train.first(n), kind, cfg, rng);
                VaryNRun run;
                run.n = n;
                run.kind = kind;
                run.repeat = rep;
                double kl = 0.0;
                for (std::size_t d = gen.dim_lo; d <= gen.dim_hi; ++d) {
                    const ContextVector ctx = encode_contexts(DomainDescriptor::all_continuous(d)).front();
                    const Gamma learned = phi_forward(phi, ctx);
                    if (d == gen.dim_lo) run.learned_length_scale_at_lo = learned;
                    kl += gamma_kl(gen.priors.length_scale.at(d), learned);
                }
                run.length_scale_kl = kl / static_cast<double>(gen.dim_hi - gen.dim_lo + 1);
                run.signal_variance_kl = gamma_kl(gen.priors.signal_variance, phi.shared.signal_variance);
                run.noise_variance_kl = gamma_kl(gen.priors.noise_variance, phi.shared.noise_variance);
                if (!heldout.empty()) run.heldout_nll = heldout_prior_nll(phi, heldout);
                report.runs.push_back(run);
            }
        }
    }
    return report;
}

}  // namespace mphd
