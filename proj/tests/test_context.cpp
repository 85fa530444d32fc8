#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "mphd/context.hpp"
#include "mphd/error.hpp"
#include "oracles.hpp"

using namespace mphd;

namespace {

DomainDescriptor mixed_domain() {
    DomainDescriptor d;
    d.dims = {{DimKind::kDiscrete, {}}, {DimKind::kContinuous, {}}, {DimKind::kDiscrete, {}}};
    return d;
}

std::vector<PhiPair> random_pairs(std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> u(0.05, 3.0);
    std::uniform_int_distribution<int> cnt(0, 12);
    std::vector<PhiPair> pairs(n);
    for (auto& p : pairs) {
        const double nd = cnt(rng), nc = 1 + cnt(rng);
        p.context = rng() % 2 ? ContextVector{1, 0, nd + 1, nc} : ContextVector{0, 1, nd, nc};
        p.value = u(rng);
    }
    return pairs;
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

}  // namespace

TEST_SUITE("context") {

TEST_CASE("context encoding") {
    const auto c = encode_contexts(mixed_domain());
    REQUIRE(c.size() == 3);
    CHECK(c[0] == ContextVector{1, 0, 2, 1});
    CHECK(c[1] == ContextVector{0, 1, 2, 1});
    CHECK(c[2] == ContextVector{1, 0, 2, 1});
    for (const auto& v : encode_contexts(DomainDescriptor::all_continuous(3))) CHECK(v == ContextVector{0, 1, 0, 3});
    CHECK_THROWS_AS(encode_contexts(DomainDescriptor{}), Error);
    for (std::size_t d = 1; d <= 20; ++d) {
        for (const auto& v : encode_contexts(DomainDescriptor::all_continuous(d))) CHECK(v[2] + v[3] == double(d));
    }
}

TEST_CASE("network shape and zero network output") {
    const NnPhi z = NnPhi::zeros();
    CHECK(z.num_parameters() == 386);  // 4*16+16 + 16*16+16 + 16*2+2
    const Gamma g = phi_forward(z, ContextVector{0, 1, 0, 5});
    CHECK(g.shape == doctest::Approx(std::log(2.0) + 1e-4).epsilon(1e-15));
    CHECK(g.rate == doctest::Approx(std::log(2.0) + 1e-4).epsilon(1e-15));
}

TEST_CASE("constant phi ignores the context") {
    PhiModel m{ConstantPhi{Gamma{10.0, 30.0}}, SharedPriors{}};
    CHECK(phi_forward(m, ContextVector{1, 0, 3, 4}) == Gamma{10.0, 30.0});
    CHECK(phi_forward(m, ContextVector{0, 1, 0, 1}) == Gamma{10.0, 30.0});
    const GpPrior p = gp_prior_for_domain(m, mixed_domain());
    CHECK(p.length_scales.size() == 3);
    CHECK(std::get<Gamma>(p.length_scales[1]) == Gamma{10.0, 30.0});
}

TEST_CASE("initialized network outputs stay positive for huge counts") {
    Rng rng(4);
    const NnPhi phi = NnPhi::initialize(rng);
    for (double n : {0.0, 1.0, 20.0, 1e3, 1e6}) {
        for (const ContextVector c : {ContextVector{1, 0, n + 1, n}, ContextVector{0, 1, n, n + 1}}) {
            const Gamma g = phi_forward(phi, c);
            CHECK(std::isfinite(g.shape));
            CHECK(g.shape > 0.0);
            CHECK(std::isfinite(g.rate));
            CHECK(g.rate > 0.0);
        }
    }
}

TEST_CASE("parameter flattening round trips") {
    Rng rng(8);
    NnPhi phi = NnPhi::initialize(rng);
    const Eigen::VectorXd w = phi.parameters();
    NnPhi other = NnPhi::zeros();
    other.set_parameters(w);
    CHECK(other.parameters() == w);
    CHECK_THROWS_AS(other.set_parameters(Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("backpropagated gradient matches finite differences") {
    Rng rng(12);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        NnPhi phi = NnPhi::initialize(rng);
        const auto pairs = random_pairs(25, rng);
        const PhiObjective obj = phi_objective_and_grad(phi, pairs);
        const Eigen::VectorXd fd = oracle::central_difference(
            [&](const Eigen::VectorXd& w) {
                NnPhi q = phi;
                q.set_parameters(w);
                return phi_objective_and_grad(q, pairs).value;
            },
            phi.parameters(), 1e-6);
        worst = std::max(worst, oracle::relative_error(obj.gradient, fd));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("objective equals the summed Gamma negative log density") {
    Rng rng(13);
    const NnPhi phi = NnPhi::initialize(rng);
    const auto pairs = random_pairs(7, rng);
    double ref = 0.0;
    for (const auto& p : pairs) {
        const Gamma g = phi_forward(phi, p.context);
        ref -= oracle::gamma_log_density(p.value, g.shape, g.rate);
    }
    CHECK(phi_objective_and_grad(phi, pairs).value == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("a pair at the output mode has zero density slope") {
    Rng rng(14);
    const NnPhi phi = NnPhi::initialize(rng);
    const ContextVector c{0, 1, 0, 2};
    const Gamma g = phi_forward(phi, c);
    if (g.shape > 1.0) {
        CHECK(std::abs(log_pdf_dx(g, mode(g))) <= 1e-12);
    } else {
        const Gamma shifted{g.shape + 2.0, g.rate};
        CHECK(std::abs(log_pdf_dx(shifted, mode(shifted))) <= 1e-12);
    }
}

TEST_CASE("duplicating pairs doubles the objective; order does not matter") {
    Rng rng(15);
    const NnPhi phi = NnPhi::initialize(rng);
    auto pairs = random_pairs(10, rng);
    const PhiObjective once = phi_objective_and_grad(phi, pairs);
    std::vector<PhiPair> twice(pairs);
    twice.insert(twice.end(), pairs.begin(), pairs.end());
    const PhiObjective doubled = phi_objective_and_grad(phi, twice);
    CHECK(doubled.value == doctest::Approx(2.0 * once.value).epsilon(1e-13));
    CHECK(doubled.gradient.isApprox(2.0 * once.gradient, 1e-12));

    std::reverse(pairs.begin(), pairs.end());
    const PhiObjective reversed = phi_objective_and_grad(phi, pairs);
    CHECK(reversed.value == doctest::Approx(once.value).epsilon(1e-13));
    CHECK(reversed.gradient.isApprox(once.gradient, 1e-12));
}

TEST_CASE("objective rejects non-positive values") {
    Rng rng(16);
    const NnPhi phi = NnPhi::initialize(rng);
    const std::vector<PhiPair> bad{{ContextVector{0, 1, 0, 1}, -0.5}};
    CHECK_THROWS_AS(phi_objective_and_grad(phi, bad), Error);
}

TEST_CASE("serialization round trip and error paths") {
    Rng rng(17);
    const PhiModel nn{NnPhi::initialize(rng), SharedPriors{Normal{0.1, 0.3}, Gamma{2.0, 3.0}, Gamma{1.5, 1e4}}};
    const PhiModel back = deserialize_phi(serialize_phi(nn));
    REQUIRE(back.kind() == PhiKind::kNn);
    CHECK(std::get<NnPhi>(back.length_scale).parameters() == std::get<NnPhi>(nn.length_scale).parameters());
    CHECK(back.shared == nn.shared);

    const PhiModel constant{ConstantPhi{Gamma{0.123456789012345, 9.87654321e-3}}, nn.shared};
    const PhiModel cback = deserialize_phi(serialize_phi(constant));
    CHECK(std::get<ConstantPhi>(cback.length_scale).length_scale ==
          std::get<ConstantPhi>(constant.length_scale).length_scale);

    const std::string bytes = serialize_phi(nn);
    CHECK(code_of([&] { deserialize_phi(bytes.substr(0, bytes.size() / 2)); }) == ErrorCode::kMalformed);
    std::string future = bytes;
    const auto pos = future.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    future.replace(pos, 12, "\"version\": 99");
    CHECK(code_of([&] { deserialize_phi(future); }) == ErrorCode::kVersion);
}

}  // TEST_SUITE
