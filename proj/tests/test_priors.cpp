#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mphd/error.hpp"
#include "mphd/priors.hpp"
#include "oracles.hpp"

using namespace mphd;

namespace {

std::vector<double> draws(const PriorFamily& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& x : out) x = sample(p, rng);
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
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

TEST_SUITE("priors") {

TEST_CASE("log_pdf closed-form examples") {
    CHECK(log_pdf(Gamma{1.0, 2.0}, 1.0) == doctest::Approx(std::log(2.0) - 2.0).epsilon(1e-15));
    CHECK(log_pdf(Normal{0.3, 0.7}, 0.3) ==
          doctest::Approx(-std::log(0.7) - 0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
    CHECK(log_pdf(Uniform{0.0, 1.0}, 2.0) == -std::numeric_limits<double>::infinity());
    CHECK(log_pdf(Gamma{2.0, 1.0}, -1.0) == -std::numeric_limits<double>::infinity());
    CHECK(log_pdf(Uniform{0.0, 4.0}, 1.0) == doctest::Approx(-std::log(4.0)));
    CHECK_THROWS_AS(log_pdf(Normal{}, std::numeric_limits<double>::quiet_NaN()), Error);
}

TEST_CASE("log_pdf derivative matches central differences") {
    for (const PriorFamily& p : {PriorFamily{Gamma{3.5, 2.0}}, PriorFamily{Normal{0.2, 0.4}}}) {
        for (double x : {0.3, 1.1, 2.7}) {
            const double h = 1e-6;
            const double fd = (log_pdf(p, x + h) - log_pdf(p, x - h)) / (2 * h);
            CHECK(log_pdf_dx(p, x) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
    CHECK(log_pdf_dx(Uniform{0.0, 1.0}, 0.5) == 0.0);
}

TEST_CASE("densities integrate to one") {
    Rng rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    for (int trial = 0; trial < 50; ++trial) {
        const Gamma g{0.5 + 20.0 * u(rng), 0.1 + 20.0 * u(rng)};
        const double m = g.shape / g.rate;
        auto f = [&](double x) { return x <= 0.0 ? 0.0 : std::exp(log_pdf(g, x)); };
        const double total = ts.integrate(f, 0.0, m) + es.integrate([&](double t) { return f(m + t); });
        CHECK(std::abs(total - 1.0) <= 1e-6);

        const Normal n{4.0 * u(rng) - 2.0, 0.05 + 3.0 * u(rng)};
        const double nt = ts.integrate([&](double x) { return std::exp(log_pdf(n, x)); }, n.mean - 40 * n.stddev,
                                       n.mean + 40 * n.stddev);
        CHECK(std::abs(nt - 1.0) <= 1e-6);

        const double lo = 3.0 * u(rng);
        const Uniform un{lo, lo + 0.1 + 5.0 * u(rng)};
        const double ut = ts.integrate([&](double x) { return std::exp(log_pdf(un, x)); }, un.lo, un.hi);
        CHECK(std::abs(ut - 1.0) <= 1e-6);
    }
}

TEST_CASE("sampling moments") {
    CHECK(std::abs(mean_of(draws(Uniform{0.0, 1.0}, 100000, 1)) - 0.5) <= 0.01);
    CHECK(mean_of(draws(Gamma{10.0, 30.0}, 100000, 2)) == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    CHECK(std_of(draws(Normal{0.5, 0.2}, 100000, 3)) == doctest::Approx(0.2).epsilon(0.02));
    CHECK(draws(Gamma{2.0, 1.0}, 5, 7) == draws(Gamma{2.0, 1.0}, 5, 7));
}

TEST_CASE("modes and means") {
    CHECK(mode(Gamma{3.0, 2.0}) == 1.0);
    CHECK(mode(Gamma{0.5, 2.0}) == 0.0);
    CHECK(mode(Normal{0.7, 2.0}) == 0.7);
    CHECK(mode(Uniform{1.0, 3.0}) == 2.0);
    CHECK(mean(Gamma{3.0, 2.0}) == 1.5);
}

TEST_CASE("gamma_mle recovers the generating parameters") {
    const std::vector<double> x = draws(Gamma{10.0, 30.0}, 100000, 11);
    const Gamma g = gamma_mle(x);
    CHECK(g.shape == doctest::Approx(10.0).epsilon(0.03));
    CHECK(g.rate == doctest::Approx(30.0).epsilon(0.03));
}

TEST_CASE("gamma_mle refinement never lowers the likelihood") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::vector<double> x = draws(Gamma{0.3 + static_cast<double>(seed), 2.0}, 8 + seed, seed + 100);
        CHECK(gamma_log_likelihood(gamma_mle(x), x) >= gamma_log_likelihood(gamma_mle_closed_form(x), x));
    }
}

TEST_CASE("gamma_mle closed form matches the Ye-Chen expression") {
    const std::vector<double> x{0.5, 1.0, 2.0, 4.0};
    double sx = 0, sl = 0, sxl = 0;
    for (double v : x) {
        sx += v;
        sl += std::log(v);
        sxl += v * std::log(v);
    }
    const double a = 4.0 * sx / (4.0 * sxl - sl * sx);
    const Gamma g = gamma_mle_closed_form(x);
    CHECK(g.shape == doctest::Approx(a).epsilon(1e-14));
    CHECK(g.rate == doctest::Approx(a * 4.0 / sx).epsilon(1e-14));
}

TEST_CASE("gamma_mle errors") {
    const std::vector<double> same{2.0, 2.0, 2.0};
    CHECK(code_of([&] { gamma_mle(same); }) == ErrorCode::kDegenerateData);
    const std::vector<double> negative{1.0, -2.0, 3.0};
    CHECK(code_of([&] { gamma_mle(negative); }) == ErrorCode::kDomain);
}

TEST_CASE("normal_mle examples and errors") {
    const std::vector<double> two{0.0, 2.0};
    const Normal n = normal_mle(two);
    CHECK(n.mean == 1.0);
    CHECK(n.stddev == 1.0);
    const std::vector<double> same{5.0, 5.0, 5.0};
    CHECK(code_of([&] { normal_mle(same); }) == ErrorCode::kDegenerateData);
    const Normal fit = normal_mle(draws(Normal{0.5, 0.2}, 100000, 4));
    CHECK(std::abs(fit.mean - 0.5) <= 0.01);
    CHECK(fit.stddev == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("MLEs are scale equivariant") {
    const std::vector<double> x = draws(Gamma{2.5, 1.5}, 200, 5);
    for (double s : {0.01, 3.0, 250.0}) {
        std::vector<double> y(x);
        for (double& v : y) v *= s;
        const Gamma c0 = gamma_mle_closed_form(x), c1 = gamma_mle_closed_form(y);
        CHECK(c1.shape == doctest::Approx(c0.shape).epsilon(1e-12));
        CHECK(c1.rate == doctest::Approx(c0.rate / s).epsilon(1e-12));
        const Gamma r0 = gamma_mle(x), r1 = gamma_mle(y);
        CHECK(std::abs(r1.shape - r0.shape) <= 1e-8 * r0.shape);
        CHECK(std::abs(r1.rate - r0.rate / s) <= 1e-8 * r0.rate / s);
        const Normal n0 = normal_mle(x), n1 = normal_mle(y);
        CHECK(n1.mean == doctest::Approx(s * n0.mean).epsilon(1e-12));
        CHECK(n1.stddev == doctest::Approx(s * n0.stddev).epsilon(1e-12));
    }
}

TEST_CASE("gamma_kl: identity, quadrature agreement and non-negativity") {
    CHECK(gamma_kl(Gamma{2.0, 3.0}, Gamma{2.0, 3.0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(gamma_kl(Gamma{1.0, 1.0}, Gamma{2.0, 1.0}) - oracle::gamma_kl_quadrature(1.0, 1.0, 2.0, 1.0)) <= 1e-6);

    Rng rng(5);
    std::uniform_real_distribution<double> u(0.1, 50.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Gamma p{u(rng), u(rng)}, q{u(rng), u(rng)};
        const double ref = oracle::gamma_kl_quadrature(p.shape, p.rate, q.shape, q.rate);
        CHECK(std::abs(gamma_kl(p, q) - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
    }
    for (int trial = 0; trial < 1000; ++trial) CHECK(gamma_kl(Gamma{u(rng), u(rng)}, Gamma{u(rng), u(rng)}) >= 0.0);
}

TEST_CASE("baseline priors are valid over every dimension") {
    for (std::size_t d = 1; d <= 10; ++d) {
        for (const GpPrior& p : {hand_specified_prior(d), non_informative_prior(d)}) {
            CHECK(p.length_scales.size() == d);
            for (const auto& ls : p.length_scales) CHECK_NOTHROW(validate(ls));
        }
    }
    CHECK_THROWS_AS(validate(Gamma{-1.0, 1.0}), Error);
    CHECK_THROWS_AS(validate(Uniform{2.0, 1.0}), Error);
}

}  // TEST_SUITE
