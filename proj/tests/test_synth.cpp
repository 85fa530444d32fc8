#include "doctest.h"

#include <set>

#include "mphd/error.hpp"
#include "mphd/io.hpp"
#include "mphd/synth.hpp"

using namespace mphd;

namespace {

SynthConfig tiny_config(std::uint64_t seed) {
    SynthConfig cfg = SynthConfig::profile_l(SynthScale::kDesk);
    cfg.n_datasets = 5;
    cfg.subdatasets_per_dataset = 10;
    cfg.observations_per_subdataset = 20;
    cfg.seed = seed;
    return cfg;
}

std::set<std::string> ids_with(const SuperDataset& sd, Split split) {
    std::set<std::string> out;
    for (const auto& d : sd.datasets) {
        for (const auto& s : d.subdatasets) {
            if (s.split == split) out.insert(d.id + "/" + s.id);
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("profile L length-scale rule") {
    const Gamma g2 = std::get<Gamma>(ground_truth_priors(SynthProfile::kL, 2).length_scales[0]);
    // 0.07692 * 2 + 0.8462 = 1.00004 (the rate side gives -0.7078 + 5.7077 = 4.9999).
    CHECK(g2.shape == doctest::Approx(1.00004).epsilon(1e-10));
    CHECK(g2.rate == doctest::Approx(4.9999).epsilon(1e-10));
    const Gamma g14 = std::get<Gamma>(ground_truth_priors(SynthProfile::kL, 14).length_scales[13]);
    CHECK(g14.shape == doctest::Approx(1.92308).epsilon(1e-10));
    CHECK(g14.rate == doctest::Approx(0.7531).epsilon(1e-10));
    try {
        ground_truth_priors(SynthProfile::kL, 17);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kDomain);
    }
}

TEST_CASE("profile S priors are fixed") {
    for (std::size_t d : {1u, 3u, 9u}) {
        const GpPrior p = ground_truth_priors(SynthProfile::kS, d);
        CHECK(p.length_scales.size() == d);
        CHECK(std::get<Gamma>(p.length_scales.back()) == Gamma{10.0, 30.0});
        CHECK(std::get<Normal>(p.constant_mean) == Normal{1.0, 1.0});
        CHECK(std::get<Gamma>(p.signal_variance) == Gamma{1.0, 1.0});
        CHECK(std::get<Gamma>(p.noise_variance) == Gamma{10.0, 1e5});
    }
    const GpPrior l = ground_truth_priors(SynthProfile::kL, 4);
    CHECK(std::get<Normal>(l.constant_mean) == Normal{0.5, 0.2});
    CHECK(std::get<Gamma>(l.signal_variance) == Gamma{15.0, 100.0});
    CHECK(std::get<Gamma>(l.noise_variance) == Gamma{1.0, 1e4});
}

TEST_CASE("profile defaults") {
    const SynthConfig s = SynthConfig::profile_s();
    CHECK(s.n_datasets == 20);
    CHECK(s.subdatasets_per_dataset == 10);
    CHECK(s.observations_per_subdataset == 300);
    CHECK(s.dim_lo == 2);
    CHECK(s.dim_hi == 5);
    const SynthConfig l = SynthConfig::profile_l(SynthScale::kDesk);
    CHECK(l.n_datasets == 8);
    CHECK(l.subdatasets_per_dataset == 6);
    CHECK(l.observations_per_subdataset == 300);
    CHECK(l.dim_hi == 8);
    SynthConfig bad = l;
    bad.dim_hi = 40;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("noiseless duplicate queries share one function value") {
    Eigen::MatrixXd x(4, 2);
    x << 0.1, 0.2, 0.5, 0.5, 0.1, 0.2, 0.9, 0.0;
    GpParams p;
    p.length_scales = Eigen::Vector2d(0.3, 0.3);
    Rng rng(3);
    const Eigen::VectorXd y = sample_gp_observations(x, p, Smoothness::kNu52, 0.0, rng);
    CHECK(y[0] == y[2]);
    CHECK(y[0] != y[1]);
}

TEST_CASE("sampled values have the stationary variance") {
    GpParams p;
    p.constant_mean = 0.0;
    p.length_scales = Eigen::VectorXd::Constant(1, 0.2);
    p.signal_variance = 1.0;
    p.noise_variance = 0.01;
    Rng rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 400; ++rep) {
        Eigen::MatrixXd x(25, 1);
        for (Eigen::Index i = 0; i < 25; ++i) x(i, 0) = u(rng);
        const Eigen::VectorXd y = sample_gp_observations(x, p, Smoothness::kNu52, p.noise_variance, rng);
        sum_sq += y.squaredNorm();
        count += 25;
    }
    CHECK(sum_sq / static_cast<double>(count) == doctest::Approx(1.01).epsilon(0.1));
}

TEST_CASE("generated superdataset respects its configuration") {
    const SynthConfig cfg = tiny_config(5);
    const SuperDataset sd = generate_superdataset(cfg);
    CHECK(sd.datasets.size() == 5);
    for (const auto& d : sd.datasets) {
        REQUIRE(d.ground_truth.has_value());
        CHECK(d.dim() >= cfg.dim_lo);
        CHECK(d.dim() <= cfg.dim_hi);
        CHECK(d.subdatasets.size() == 10);
        CHECK_NOTHROW(d.ground_truth->params.validate());
        for (const auto& s : d.subdatasets) {
            CHECK(s.data.size() == 20);
            CHECK(s.data.inputs.minCoeff() >= 0.0);
            CHECK(s.data.inputs.maxCoeff() <= 1.0);
        }
    }
    CHECK_NOTHROW(sd.validate());
}

TEST_CASE("generation is byte-reproducible and seed-sensitive") {
    const std::string a = encode_superdataset(generate_superdataset(tiny_config(9)));
    const std::string b = encode_superdataset(generate_superdataset(tiny_config(9)));
    const std::string c = encode_superdataset(generate_superdataset(tiny_config(10)));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("custom profile draws discrete dimensions on ten levels") {
    SynthConfig cfg = tiny_config(2);
    cfg.profile = SynthProfile::kCustom;
    cfg.discrete_probability = 1.0;
    const SuperDataset sd = generate_superdataset(cfg);
    for (const auto& d : sd.datasets) {
        for (const auto& dim : d.domain.dims) CHECK(dim.kind == DimKind::kDiscrete);
        const Eigen::MatrixXd& x = d.subdatasets[0].data.inputs;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double level = x.data()[i] * 9.0;
            CHECK(std::abs(level - std::round(level)) <= 1e-12);
        }
    }
}

TEST_CASE("per-dataset sub-split is 8/2, exact and disjoint") {
    SuperDataset sd = generate_superdataset(tiny_config(4));
    assign_splits(sd, SplitMode::kPerDatasetSubsplit, 0.8, 77);
    for (const auto& d : sd.datasets) {
        int train = 0, test = 0;
        for (const auto& s : d.subdatasets) (s.split == Split::kTrain ? train : test)++;
        CHECK(train == 8);
        CHECK(test == 2);
    }
    SuperDataset again = generate_superdataset(tiny_config(4));
    assign_splits(again, SplitMode::kPerDatasetSubsplit, 0.8, 77);
    CHECK(ids_with(sd, Split::kTrain) == ids_with(again, Split::kTrain));

    const auto [train, test] = split_superdataset(generate_superdataset(tiny_config(4)), SplitMode::kPerDatasetSubsplit,
                                                  0.8, 77);
    std::size_t total = 0;
    std::set<std::string> seen;
    for (const SuperDataset* part : {&train, &test}) {
        for (const auto& d : part->datasets) {
            for (const auto& s : d.subdatasets) {
                CHECK(seen.insert(d.id + "/" + s.id).second);
                ++total;
            }
        }
    }
    CHECK(total == 50);
}

TEST_CASE("per-super split takes the first 16 of 20 datasets") {
    SynthConfig cfg = SynthConfig::profile_s(SynthScale::kDesk);
    cfg.observations_per_subdataset = 3;
    cfg.subdatasets_per_dataset = 2;
    const auto [train, test] = split_superdataset(generate_superdataset(cfg), SplitMode::kPerSuperSplit, 0.8, 1);
    REQUIRE(train.datasets.size() == 16);
    REQUIRE(test.datasets.size() == 4);
    CHECK(train.datasets.front().id == "d0");
    CHECK(train.datasets.back().id == "d15");
    CHECK(test.datasets.front().id == "d16");
}

TEST_CASE("a split with an empty side is an error") {
    SuperDataset sd = generate_superdataset(tiny_config(4));
    CHECK_THROWS_AS(assign_splits(sd, SplitMode::kPerSuperSplit, 0.05, 1), Error);
    CHECK_THROWS_AS(assign_splits(sd, SplitMode::kPerSuperSplit, 1.0, 1), Error);
}

}  // TEST_SUITE
