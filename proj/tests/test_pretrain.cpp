#include "doctest.h"

#include <algorithm>

#include "mphd/error.hpp"
#include "mphd/io.hpp"
#include "mphd/pretrain.hpp"
#include "oracles.hpp"

using namespace mphd;

namespace {

PretrainConfig quick_config() {
    PretrainConfig cfg;
    cfg.step1.iterations = 150;
    cfg.step1.learning_rate = 0.03;
    cfg.step1.restarts = 1;
    cfg.step2.iterations = 200;
    cfg.step2.learning_rate = 0.01;
    return cfg;
}

SuperDataset small_superdataset(std::uint64_t seed, std::size_t n = 4) {
    SynthConfig cfg = SynthConfig::profile_l(SynthScale::kDesk);
    cfg.n_datasets = n;
    cfg.subdatasets_per_dataset = 3;
    cfg.observations_per_subdataset = 15;
    cfg.dim_hi = 3;
    cfg.seed = seed;
    return generate_superdataset(cfg);
}

double min_cross_block_distance(const SubDataset& pseudo, std::size_t block_rows, std::size_t blocks) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < blocks; ++a) {
        for (std::size_t b = a + 1; b < blocks; ++b) {
            for (std::size_t i = 0; i < block_rows; ++i) {
                for (std::size_t j = 0; j < block_rows; ++j) {
                    const auto ia = static_cast<Eigen::Index>(a * block_rows + i);
                    const auto jb = static_cast<Eigen::Index>(b * block_rows + j);
                    best = std::min(best, (pseudo.inputs.row(ia) - pseudo.inputs.row(jb)).norm());
                }
            }
        }
    }
    return best;
}

}  // namespace

TEST_SUITE("pretrain") {

TEST_CASE("pseudo sub-dataset factorizes for two 1-d blocks at Q = 60") {
    std::mt19937_64 rng(1);
    const std::vector<SubDataset> blocks{oracle::random_subdataset(10, 1, rng), oracle::random_subdataset(10, 1, rng)};
    GpParams p;
    p.length_scales = Eigen::VectorXd::Ones(1);
    p.signal_variance = 1.0;
    p.noise_variance = 0.05;
    const SubDataset pseudo = build_pseudo_subdataset(blocks, 60.0);
    const double joint = oracle::dense_mvn_nll(pseudo, p, Smoothness::kNu52);
    const double split = oracle::dense_mvn_nll(blocks[0], p, Smoothness::kNu52) +
                         oracle::dense_mvn_nll(blocks[1], p, Smoothness::kNu52);
    CHECK(std::abs(joint - split) <= 1e-9);
    CHECK(std::abs(gp_nll(std::span(&pseudo, 1), p, Smoothness::kNu52) - gp_nll(blocks, p, Smoothness::kNu52)) <= 1e-9);
}

TEST_CASE("a single block is a pure translation") {
    std::mt19937_64 rng(2);
    const SubDataset one = oracle::random_subdataset(12, 3, rng);
    const GpParams p = oracle::random_params(3, rng);
    for (double q : {0.5, 10.0, 1e3}) {
        const SubDataset pseudo = build_pseudo_subdataset(std::span(&one, 1), q);
        CHECK(pseudo.inputs == one.inputs);
        CHECK(gp_nll(std::span(&pseudo, 1), p, Smoothness::kNu32) == gp_nll(std::span(&one, 1), p, Smoothness::kNu32));
    }
}

TEST_CASE("blocks are at least Q apart and outputs are untouched") {
    std::mt19937_64 rng(3);
    std::vector<SubDataset> blocks;
    for (int b = 0; b < 4; ++b) blocks.push_back(oracle::random_subdataset(6, 2, rng));
    const SubDataset pseudo = build_pseudo_subdataset(blocks, 7.5);
    CHECK(min_cross_block_distance(pseudo, 6, 4) >= 7.5);
    for (int b = 0; b < 4; ++b) CHECK(pseudo.outputs.segment(6 * b, 6) == blocks[static_cast<std::size_t>(b)].outputs);
}

TEST_CASE("step 1 recovers a constant output level") {
    std::vector<SubDataset> subs(3);
    Rng noise(5);
    std::normal_distribution<double> g(0.0, 1e-4);
    std::mt19937_64 rng(5);
    for (auto& s : subs) {
        s = oracle::random_subdataset(20, 2, rng);
        for (Eigen::Index i = 0; i < s.outputs.size(); ++i) s.outputs[i] = 0.7 + g(noise);
    }
    // The signal variance sits on its box floor here, so the mean is only pinned down once
    // the length-scales have grown; that takes more than the quick budget.
    PretrainConfig cfg = quick_config();
    cfg.step1.iterations = 1000;
    cfg.step1.learning_rate = 0.01;
    Rng fit_rng(9);
    const GpParams fit = step1_fit_dataset(subs, cfg, fit_rng);
    CHECK(std::abs(fit.constant_mean - 0.7) <= 1e-3);
}

TEST_CASE("step 1 is deterministic and never worse than its start") {
    const SuperDataset sd = small_superdataset(11);
    const std::vector<SubDataset> subs = sd.datasets[0].training_subdatasets();
    Rng a(42), b(42);
    const GpParams pa = step1_fit_dataset(subs, quick_config(), a);
    const GpParams pb = step1_fit_dataset(subs, quick_config(), b);
    CHECK(pa == pb);
    CHECK(gp_nll(subs, pa, Smoothness::kNu52) <= gp_nll(subs, step1_initial_params(subs), Smoothness::kNu52));
}

TEST_CASE("constant step 2 is the pooled Gamma MLE and ignores the rng") {
    Rng draw(8);
    std::vector<DatasetEstimate> est;
    std::vector<double> pooled, signals;
    for (int i = 0; i < 6; ++i) {
        DatasetEstimate e;
        e.dataset_id = "d" + std::to_string(i);
        e.domain = DomainDescriptor::all_continuous(2 + static_cast<std::size_t>(i % 3));
        e.params.length_scales.resize(static_cast<Eigen::Index>(e.domain.dim()));
        for (Eigen::Index j = 0; j < e.params.length_scales.size(); ++j) {
            e.params.length_scales[j] = sample(Gamma{10.0, 30.0}, draw);
            pooled.push_back(e.params.length_scales[j]);
        }
        e.params.constant_mean = sample(Normal{}, draw);
        e.params.signal_variance = sample(Gamma{2.0, 2.0}, draw);
        e.params.noise_variance = sample(Gamma{2.0, 1e3}, draw);
        signals.push_back(e.params.signal_variance);
        est.push_back(e);
    }
    Rng r1(1), r2(999);
    const PhiModel m1 = step2_fit(est, PhiKind::kConstant, quick_config(), r1);
    const PhiModel m2 = step2_fit(est, PhiKind::kConstant, quick_config(), r2);
    CHECK(std::get<ConstantPhi>(m1.length_scale).length_scale == gamma_mle(pooled));
    CHECK(m1.shared.signal_variance == gamma_mle(signals));
    CHECK(serialize_phi(m1) == serialize_phi(m2));
    CHECK(pooled.size() == phi_training_pairs(est).size());

    const std::vector<DatasetEstimate> one(est.begin(), est.begin() + 1);
    CHECK_THROWS_AS(step2_fit(one, PhiKind::kConstant, quick_config(), r1), Error);
}

TEST_CASE("excluding a dataset equals removing it") {
    const SuperDataset full = small_superdataset(13);
    SuperDataset filtered = full;
    filtered.datasets.erase(filtered.datasets.begin() + 1);
    PretrainConfig cfg = quick_config();
    cfg.exclude_dataset_ids = {"d1"};
    const PretrainedModel a = pretrain(full, PhiKind::kNn, cfg, 7);
    const PretrainedModel b = pretrain(filtered, PhiKind::kNn, cfg, 7);
    CHECK(encode_model(a) == encode_model(b));
    CHECK(a.provenance.excluded_ids == std::vector<std::string>{"d1"});
    CHECK(a.estimates.size() == 3);
}

TEST_CASE("exclusions leaving two datasets train on exactly those two") {
    PretrainConfig cfg = quick_config();
    cfg.exclude_dataset_ids = {"d0", "d2"};
    const PretrainedModel m = pretrain(small_superdataset(17), PhiKind::kConstant, cfg, 3);
    CHECK(m.provenance.dataset_ids == std::vector<std::string>{"d1", "d3"});
    cfg.exclude_dataset_ids.insert("d3");
    CHECK_THROWS_AS(pretrain(small_superdataset(17), PhiKind::kConstant, cfg, 3), Error);
}

TEST_CASE("nn phi outputs depend on the context after training") {
    const PretrainedModel m = pretrain(small_superdataset(19, 5), PhiKind::kNn, quick_config(), 4);
    const Gamma g2 = phi_forward(m.phi, ContextVector{0, 1, 0, 2});
    const Gamma g6 = phi_forward(m.phi, ContextVector{0, 1, 0, 6});
    CHECK((g2.shape != g6.shape || g2.rate != g6.rate));
    for (const auto& e : m.estimates) CHECK_NOTHROW(e.params.validate());
}

TEST_CASE("parameter box clamps into range") {
    ParameterBox box;
    GpParams p;
    p.length_scales = Eigen::Vector2d(1e-9, 1e9);
    p.signal_variance = 1e6;
    p.noise_variance = 1e-12;
    p.constant_mean = -1e5;
    const GpParams c = box.clamp(p);
    CHECK(c.length_scales[0] == 1e-4);
    CHECK(c.length_scales[1] == 1e4);
    CHECK(c.signal_variance == 1e4);
    CHECK(c.noise_variance == 1e-8);
    CHECK(c.constant_mean == -1e4);
}

TEST_CASE("summaries") {
    const ParameterSummary s = summarize({1.0, 2.0, 3.0, 10.0});
    CHECK(s.mean == 4.0);
    CHECK(s.median == 2.5);
    CHECK(s.stddev == doctest::Approx(std::sqrt(50.0 / 3.0)));
}

TEST_CASE("prior negative log density sums the components") {
    GpPrior prior = ground_truth_priors(SynthProfile::kS, 2);
    GpParams p;
    p.constant_mean = 0.4;
    p.length_scales = Eigen::Vector2d(0.3, 0.2);
    p.signal_variance = 0.8;
    p.noise_variance = 1e-4;
    const double ref = -(log_pdf(Normal{1, 1}, 0.4) + log_pdf(Gamma{10, 30}, 0.3) + log_pdf(Gamma{10, 30}, 0.2) +
                         log_pdf(Gamma{1, 1}, 0.8) + log_pdf(Gamma{10, 1e5}, 1e-4));
    CHECK(prior_nll(prior, p) == doctest::Approx(ref).epsilon(1e-14));
}

}  // TEST_SUITE
