#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "grw/collapse_dynamics.hpp"
#include "grw/rng.hpp"
#include "support/oracles.hpp"

using grw::GaussianWavepacket;
using grw::GrwParams;
using grw::RandomStream;
using grw::TrajectoryMode;

namespace {

// Independently computed reference values for the default parameter set
// (m = 1 g, lambda = 1e7 s^-1, alpha = 1e10 cm^-2, hbar = 1.0546e-27 erg s).
constexpr double kRegimeTime = 38847.777917856327;       // s
constexpr double kEquilibriumWidth = 1.6044157211387927e-11;  // cm
constexpr double kSpreadRateAt1s = 4.3907156676893901e-36;    // cm^2/s, a = 1e10

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

GrwParams desk_params() {
    // Dimensionless desk-scale set: same rate-balance structure, ~400 hits
    // per regime time.
    GrwParams p;
    p.alpha_loc = 1.0;
    p.lambda_micro = 1.0;
    p.n_nucleons = 100.0;
    p.mass = 1.0;
    p.hbar = 1e-4;
    return p;
}

}  // namespace

TEST_CASE("amplified rate") {
    GrwParams p;
    CHECK(rel_err(grw::amplified_rate(p), 1e7) < 1e-12);
    p.n_nucleons = 1.0;
    CHECK(grw::amplified_rate(p) == p.lambda_micro);
    p.n_nucleons = 6.022e23;
    p.lambda_micro = 1e-16;
    CHECK(rel_err(grw::amplified_rate(p), 6.022e7) < 1e-12);
}

TEST_CASE("apply_hit closed form") {
    GaussianWavepacket s;
    s.mean = 0.0;
    s.precision = 3.0;
    const auto hit_origin = grw::apply_hit(s, 0.0, 2.0);
    CHECK(hit_origin.mean == 0.0);
    CHECK(hit_origin.precision == 5.0);

    // mu = 0: mean becomes alpha x0 / (a + alpha) exactly.
    const double x0 = 1.7;
    const auto off = grw::apply_hit(s, x0, 2.0);
    CHECK(off.mean == 2.0 * x0 / 5.0);
}

TEST_CASE("apply_hit matches the grid-integration oracle") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> prec(0.3, 30.0);
    std::uniform_real_distribution<double> pos(0.5, 3.0);
    for (int i = 0; i < 100; ++i) {
        GaussianWavepacket s;
        s.mean = pos(rng);
        s.precision = prec(rng);
        const double x0 = pos(rng);
        const double alpha = prec(rng);
        const auto post = grw::apply_hit(s, x0, alpha);
        const auto grid = oracle::gaussian_product_grid(s.mean, s.precision, x0, alpha);
        CHECK(rel_err(post.mean, grid.mean) < 1e-8);
        CHECK(rel_err(post.precision, grid.precision) < 1e-8);
    }
}

TEST_CASE("two equal hits compose like one double-strength hit") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int i = 0; i < 200; ++i) {
        GaussianWavepacket s;
        s.mean = u(rng) - 2.5;
        s.precision = u(rng);
        const double x0 = u(rng) - 2.5;
        const double alpha = u(rng);
        const auto twice = grw::apply_hit(grw::apply_hit(s, x0, alpha), x0, alpha);
        const auto once = grw::apply_hit(s, x0, 2.0 * alpha);
        CHECK(rel_err(twice.precision, once.precision) < 1e-12);
        CHECK(std::abs(twice.mean - once.mean) < 1e-12 * (std::abs(once.mean) + 1.0));
    }
}

TEST_CASE("apply_hit accumulates the hit weight") {
    GaussianWavepacket s;
    s.mean = 0.5;
    s.precision = 4.0;
    const double x0 = -0.25;
    const double alpha = 9.0;
    const auto post = grw::apply_hit(s, x0, alpha);
    const double d = s.mean - x0;
    const double want = 0.5 * std::log(alpha * s.precision /
                                       (std::numbers::pi * (alpha + s.precision))) -
                        alpha * s.precision * d * d / (alpha + s.precision);
    CHECK(rel_err(post.log_norm.log_mag, want) < 1e-12);
}

TEST_CASE("hit-center law") {
    // b -> infinity: the sampling variance tends to 1/(2 alpha).
    CHECK(rel_err(grw::hit_center_stddev(1e30, 2.0), std::sqrt(0.25)) < 1e-10);

    // Statistical: sample mean within 4 standard errors of the state mean.
    GaussianWavepacket s;
    s.mean = 1.25;
    s.precision = 5.0;
    const double alpha = 3.0;
    RandomStream rng(1234);
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += grw::sample_hit_center(s, alpha, rng);
    const double mean = acc / n;
    const double se = grw::hit_center_stddev(s.precision, alpha) / std::sqrt(double(n));
    CHECK(std::abs(mean - s.mean) < 4.0 * se);
}

TEST_CASE("Poisson hit times") {
    RandomStream rng(5);
    CHECK(grw::sample_hit_times(0.0, 10.0, rng).empty());
    CHECK_THROWS_AS(grw::sample_hit_times(-1.0, 1.0, rng), std::domain_error);

    // <n(t)> = lambda t: mean count over trials within 3 sigma.
    const double rate = 100.0;
    const int trials = 10000;
    double total = 0.0;
    for (int i = 0; i < trials; ++i) {
        RandomStream r = RandomStream::substream(42, i);
        total += static_cast<double>(grw::sample_hit_times(rate, 1.0, r).size());
    }
    const double mean = total / trials;
    const double sigma = std::sqrt(rate / trials);
    CHECK(std::abs(mean - rate) < 3.0 * sigma);

    // Ordered, all within the window.
    RandomStream r2(9);
    const auto times = grw::sample_hit_times(50.0, 2.0, r2);
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
    CHECK(times.front() > 0.0);
    CHECK(times.back() <= 2.0);
}

TEST_CASE("variance after hits") {
    CHECK(grw::variance_after_hits(4.0, 0, 1e10) == 0.25);
    CHECK(rel_err(grw::variance_after_hits(1e10, 9, 1e10), 1e-11) < 1e-15);
}

TEST_CASE("spread rate and regime analytics") {
    GrwParams p;
    CHECK(grw::schrodinger_spread_rate(1e10, 0.0, p) == 0.0);
    CHECK(rel_err(grw::schrodinger_spread_rate(1e10, 1.0, p), kSpreadRateAt1s) < 1e-12);

    CHECK(rel_err(grw::regime_time(p), kRegimeTime) < 1e-12);
    // Physical scale: within a factor 10 of 1e5 s.
    CHECK(grw::regime_time(p) > 1e4);
    CHECK(grw::regime_time(p) < 1e6);

    // Quadrupling the mass doubles the regime time.
    GrwParams heavy = p;
    heavy.mass *= 4.0;
    CHECK(rel_err(grw::regime_time(heavy), 2.0 * grw::regime_time(p)) < 1e-12);

    // Independent route: rate-balance crossing within 1%.
    const double root = grw::regime_time_balance_root(p, 1e10);
    CHECK(rel_err(root, grw::regime_time(p)) < 0.01);
}

TEST_CASE("equilibrium width") {
    GrwParams p;
    CHECK(rel_err(grw::equilibrium_width(p), kEquilibriumWidth) < 1e-12);
    // Factor 3 of 1e-11 cm, implied precision within factor 10 of 1e22.
    CHECK(grw::equilibrium_width(p) > 1e-11 / 3.0);
    CHECK(grw::equilibrium_width(p) < 3e-11);
    const double prec = 1.0 / std::pow(grw::equilibrium_width(p), 2);
    CHECK(prec > 1e21);
    CHECK(prec < 1e23);

    // width ~ (m lambda alpha)^{-1/4}: a factor 16 halves it.
    GrwParams scaled = p;
    scaled.alpha_loc *= 16.0;
    CHECK(rel_err(grw::equilibrium_width(scaled), 0.5 * grw::equilibrium_width(p)) < 1e-12);
}

TEST_CASE("forced displacement") {
    GrwParams p;
    const auto day = grw::forced_displacement(0.0, 1e22, 10.0, 86400.0, p);
    CHECK(rel_err(day.shift_factor, 0.864) < 1e-12);
    CHECK(rel_err(day.expected_hits, 8.64e11) < 1e-12);
    CHECK(rel_err(day.shifted_mean, 8.64) < 1e-12);
    CHECK(day.narrow_state);

    const auto still = grw::forced_displacement(2.0, 1e22, 10.0, 0.0, p);
    CHECK(still.shifted_mean == 2.0);

    // Single faraway hit: 1e14 cm offset moves the mean by ~100 cm.
    GaussianWavepacket s;
    s.mean = 0.0;
    s.precision = 1e22;
    const auto post = grw::apply_hit(s, 1e14, p.alpha_loc);
    CHECK(rel_err(post.mean, 100.0) < 0.01);

    const auto wide = grw::forced_displacement(0.0, 50.0 * p.alpha_loc, 1.0, 1.0, p);
    CHECK(!wide.narrow_state);
}

TEST_CASE("tail hit probabilities") {
    const auto at_zero = grw::tail_hit_log_probability(0.0, 1e22);
    CHECK(at_zero.log_mag == 0.0);

    // One light-day at the equilibrium precision: ~e^{-1e50}.
    const auto far = grw::tail_hit_log_probability(1e14, 1e22);
    CHECK(std::abs(far.log_mag + 1e50) < 0.01e50);

    // 10 cm: the computed exponent is ~1e24.
    const auto ten = grw::tail_hit_log_probability(10.0, 1e22);
    CHECK(std::abs(ten.log_mag + 1e24) < 0.01e24);

    CHECK_THROWS_AS(grw::tail_hit_log_probability(-1.0, 1e22), std::domain_error);
}

TEST_CASE("one-day displacement probability bound") {
    // ~8.64e11 hits, each with tail exponent ~-1e24: the composed log-space
    // bound sits near -8.6e35, far below e^{-1e34}.
    GrwParams p;
    const auto bound = grw::displacement_probability_bound(10.0, 1e22, 86400.0, p);
    CHECK(bound.sign == 1);
    CHECK(bound.log_mag < -1e34);
    CHECK(rel_err(bound.log_mag, -8.64e35) < 0.01);

    GrwParams quiet = p;
    quiet.lambda_micro = 0.0;
    CHECK(grw::displacement_probability_bound(10.0, 1e22, 86400.0, quiet).log_mag == 0.0);
}

TEST_CASE("zero-rate analytics are rejected") {
    GrwParams quiet;
    quiet.lambda_micro = 0.0;
    CHECK_THROWS_AS(grw::regime_time(quiet), std::domain_error);
    CHECK_THROWS_AS(grw::equilibrium_width(quiet), std::domain_error);
    quiet.lambda_micro = -1.0;
    CHECK_THROWS_AS(quiet.validate(), std::domain_error);
}

TEST_CASE("spread quadrature matches the exact sigma^4 law") {
    // dv/dt = C t / v integrates to v(t)^2 = v0^2 + C (t^2 - t0^2).
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 4.0);
    for (int i = 0; i < 50; ++i) {
        const double v0 = u(rng);
        const double t0 = u(rng);
        const double t1 = t0 + u(rng);
        const double c = u(rng);
        const double got = grw::integrate_spread_variance(v0, t0, t1, c);
        const double want = std::sqrt(v0 * v0 + c * (t1 * t1 - t0 * t0));
        CHECK(rel_err(got, want) < 1e-8);
    }
}

TEST_CASE("trajectory, hits-only") {
    GrwParams p = desk_params();
    GaussianWavepacket initial;
    initial.precision = 1.0;

    // Zero-rate: variance stays flat.
    GrwParams quiet = p;
    quiet.lambda_micro = 0.0;
    const auto flat =
        grw::simulate_trajectory(initial, quiet, 1.0, TrajectoryMode::HitsOnly, 1, 0.1);
    for (const auto& s : flat.samples) CHECK(s.variance == 1.0);
    CHECK(flat.total_hits == 0);

    // End variance equals the closed form exactly.
    const auto rec =
        grw::simulate_trajectory(initial, p, 2.0, TrajectoryMode::HitsOnly, 7, 0.25);
    CHECK(rec.final_state.variance() ==
          grw::variance_after_hits(initial.precision, rec.total_hits, p.alpha_loc));

    // Monotone precision, nondecreasing hit counts, strictly increasing times.
    for (std::size_t i = 1; i < rec.samples.size(); ++i) {
        CHECK(rec.samples[i].t > rec.samples[i - 1].t);
        CHECK(rec.samples[i].hits >= rec.samples[i - 1].hits);
        CHECK(rec.samples[i].variance <= rec.samples[i - 1].variance);
    }
}

TEST_CASE("trajectory determinism") {
    GrwParams p = desk_params();
    GaussianWavepacket initial;
    initial.precision = 10.0;
    const auto a =
        grw::simulate_trajectory(initial, p, 3.0, TrajectoryMode::HitsAndSpread, 99, 0.1);
    const auto b =
        grw::simulate_trajectory(initial, p, 3.0, TrajectoryMode::HitsAndSpread, 99, 0.1);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].t == b.samples[i].t);
        CHECK(a.samples[i].hits == b.samples[i].hits);
        CHECK(a.samples[i].mean == b.samples[i].mean);
        CHECK(a.samples[i].variance == b.samples[i].variance);
    }
    CHECK(a.total_hits == b.total_hits);

    // Hit-weight bookkeeping accumulates to something finite.
    CHECK(a.total_hits > 0);
    CHECK(std::isfinite(a.final_state.log_norm.log_mag));
    CHECK(a.final_state.log_norm.sign == 1);

    CHECK_THROWS_AS(
        grw::simulate_trajectory(initial, p, 1.0, TrajectoryMode::HitsOnly, 1, 1e-12),
        std::domain_error);
}

TEST_CASE("trajectory spread-only evolution follows the closed form") {
    GrwParams p = desk_params();
    GrwParams quiet = p;
    quiet.lambda_micro = 0.0;
    GaussianWavepacket initial;
    initial.precision = 25.0;
    const auto rec =
        grw::simulate_trajectory(initial, quiet, 2.0, TrajectoryMode::HitsAndSpread, 3, 0.5);
    const double c = quiet.spread_prefactor() * quiet.hbar * quiet.hbar /
                     (quiet.mass * quiet.mass);
    const double want = std::sqrt(std::pow(initial.variance(), 2) + c * 4.0);
    CHECK(rel_err(rec.final_state.variance(), want) < 1e-6);
}

TEST_CASE("long-run variance stays in the equilibrium band") {
    const GrwParams p = desk_params();
    const double width = grw::equilibrium_width(p);  // ~0.05 cm
    const double v_eq = width * width;
    const double t_reg = grw::regime_time(p);  // ~3.99 s

    GaussianWavepacket initial;
    initial.precision = 1.0 / v_eq;
    const auto rec = grw::simulate_trajectory(initial, p, 3.0 * t_reg,
                                              TrajectoryMode::HitsAndSpread, 2024,
                                              t_reg / 40.0);
    int checked = 0;
    for (const auto& s : rec.samples) {
        if (s.t < 0.5 * t_reg) continue;
        ++checked;
        CHECK(s.variance > v_eq / 3.0);
        CHECK(s.variance < 3.0 * v_eq);
    }
    CHECK(checked > 80);
}

TEST_CASE("ensemble is independent of the thread count") {
    GrwParams p = desk_params();
    GaussianWavepacket initial;
    initial.precision = 1.0;
    const auto one =
        grw::simulate_ensemble(initial, p, 1.0, TrajectoryMode::HitsOnly, 11, 64, 0.5, 1);
    const auto four =
        grw::simulate_ensemble(initial, p, 1.0, TrajectoryMode::HitsOnly, 11, 64, 0.5, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].total_hits == four[i].total_hits);
        CHECK(one[i].final_state.mean == four[i].final_state.mean);
        CHECK(one[i].final_state.precision == four[i].final_state.precision);
    }
}
