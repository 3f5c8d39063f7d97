#include "grw/collapse_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace grw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// b >> alpha is taken as satisfied from this ratio up.
constexpr double kNarrowStateRatio = 100.0;

double spread_coefficient(const GrwParams& p) {
    return p.spread_prefactor() * p.hbar * p.hbar / (p.mass * p.mass);
}

}  // namespace

void GrwParams::validate() const {
    // Zero rate (hit-free evolution) is allowed; everything else must be
    // strictly positive.
    if (!(alpha_loc > 0.0) || !(mass > 0.0) || !(hbar > 0.0) || lambda_micro < 0.0 ||
        n_nucleons < 0.0) {
        throw std::domain_error("GrwParams: parameters out of range");
    }
}

double GrwParams::spread_prefactor() const {
    return spread_convention == SpreadConvention::PlanckH
               ? 4.0 * std::numbers::pi * std::numbers::pi
               : 4.0;
}

double amplified_rate(const GrwParams& params) {
    return params.n_nucleons * params.lambda_micro;
}

GaussianWavepacket apply_hit(const GaussianWavepacket& state, double x0, double alpha_loc) {
    if (!(state.precision > 0.0) || !(alpha_loc > 0.0)) {
        throw std::domain_error("apply_hit: precision and alpha must be positive");
    }
    const double b = state.precision;
    GaussianWavepacket next;
    next.precision = b + alpha_loc;
    next.mean = (b * state.mean + alpha_loc * x0) / (b + alpha_loc);
    // Hit weight: ||L Phi||^2 = sqrt(ab/(pi(a+b))) exp(-ab (mu-x0)^2/(a+b)).
    const double d = state.mean - x0;
    const double w = 0.5 * std::log(alpha_loc * b / (std::numbers::pi * (alpha_loc + b))) -
                     alpha_loc * b * d * d / (alpha_loc + b);
    next.log_norm = log_mul(state.log_norm, LogValue::from_log(w));
    return next;
}

double hit_center_stddev(double precision, double alpha_loc) {
    return std::sqrt((alpha_loc + precision) / (2.0 * alpha_loc * precision));
}

double sample_hit_center(const GaussianWavepacket& state, double alpha_loc,
                         RandomStream& rng) {
    return rng.normal(state.mean, hit_center_stddev(state.precision, alpha_loc));
}

std::vector<double> sample_hit_times(double rate, double duration, RandomStream& rng) {
    if (rate < 0.0 || duration < 0.0) {
        throw std::domain_error("sample_hit_times: rate and duration must be >= 0");
    }
    std::vector<double> times;
    if (rate == 0.0) return times;
    double t = rng.exponential(rate);
    while (t <= duration) {
        times.push_back(t);
        t += rng.exponential(rate);
    }
    return times;
}

double variance_after_hits(double a, std::uint64_t hit_count, double alpha_loc) {
    if (!(a > 0.0)) throw std::domain_error("variance_after_hits: a must be positive");
    return 1.0 / (a + static_cast<double>(hit_count) * alpha_loc);
}

double schrodinger_spread_rate(double a, double t, const GrwParams& params) {
    if (t < 0.0) throw std::domain_error("schrodinger_spread_rate: t must be >= 0");
    const double lambda = amplified_rate(params);
    return spread_coefficient(params) * (a + lambda * params.alpha_loc * t) * t;
}

double localization_shrink_rate(double a, double t, const GrwParams& params) {
    const double lambda = amplified_rate(params);
    const double denom = a + params.alpha_loc * lambda * t;
    return params.alpha_loc * lambda / (denom * denom);
}

double regime_time(const GrwParams& params) {
    params.validate();
    if (!(amplified_rate(params) > 0.0)) {
        throw std::domain_error("regime_time: requires a positive hit rate");
    }
    return std::sqrt(params.mass / (2.0 * std::numbers::pi * params.hbar *
                                    amplified_rate(params) * params.alpha_loc));
}

double regime_time_balance_root(const GrwParams& params, double a) {
    params.validate();
    if (!(a > 0.0)) throw std::domain_error("regime_time_balance_root: a must be positive");
    auto imbalance = [&](double t) {
        return schrodinger_spread_rate(a, t, params) - localization_shrink_rate(a, t, params);
    };
    // Bracket the crossing: the spread rate vanishes at t = 0 and grows,
    // the shrink rate decays, so the sign change is unique.
    double lo = regime_time(params) * 1e-6;
    double hi = regime_time(params) * 1e6;
    while (imbalance(lo) > 0.0 && lo > 1e-300) lo *= 0.5;
    while (imbalance(hi) < 0.0 && hi < 1e300) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (imbalance(mid) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double equilibrium_width(const GrwParams& params) {
    params.validate();
    if (!(amplified_rate(params) > 0.0)) {
        throw std::domain_error("equilibrium_width: requires a positive hit rate");
    }
    return std::pow(2.0 * std::numbers::pi * params.hbar /
                        (params.mass * amplified_rate(params) * params.alpha_loc),
                    0.25);
}

ForcedDisplacement forced_displacement(double mean, double b, double x0, double t,
                                       const GrwParams& params) {
    params.validate();
    if (!(b > 0.0) || t < 0.0) {
        throw std::domain_error("forced_displacement: b must be positive, t >= 0");
    }
    const double lambda = amplified_rate(params);
    ForcedDisplacement r;
    r.shift_factor = params.alpha_loc * lambda * t / b;
    r.expected_hits = lambda * t;
    r.narrow_state = b >= kNarrowStateRatio * params.alpha_loc;
    r.shifted_mean = mean + r.shift_factor * (x0 - mean);
    return r;
}

LogValue tail_hit_log_probability(double offset, double precision) {
    if (offset < 0.0 || !(precision > 0.0)) {
        throw std::domain_error("tail_hit_log_probability: offset >= 0, precision > 0");
    }
    return log_erfc(offset * std::sqrt(precision));
}

LogValue displacement_probability_bound(double offset, double precision, double t,
                                        const GrwParams& params) {
    params.validate();
    if (t < 0.0) throw std::domain_error("displacement_probability_bound: t >= 0");
    const double hits = amplified_rate(params) * t;
    const LogValue tail = tail_hit_log_probability(offset, precision);
    if (hits == 0.0 || tail.sign == 0) {
        return hits == 0.0 ? LogValue::one() : LogValue::zero();
    }
    return LogValue::from_log(hits * tail.log_mag);
}

double integrate_spread_variance(double v0, double t0, double t1, double dv_coeff) {
    if (t1 <= t0 || dv_coeff == 0.0) return v0;
    auto rk4 = [&](int steps) {
        double v = v0;
        const double h = (t1 - t0) / steps;
        for (int i = 0; i < steps; ++i) {
            const double t = t0 + i * h;
            const double k1 = dv_coeff * t / v;
            const double k2 = dv_coeff * (t + 0.5 * h) / (v + 0.5 * h * k1);
            const double k3 = dv_coeff * (t + 0.5 * h) / (v + 0.5 * h * k2);
            const double k4 = dv_coeff * (t + h) / (v + h * k3);
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return v;
    };
    int steps = 4;
    double prev = rk4(steps);
    for (int iter = 0; iter < 16; ++iter) {
        steps *= 2;
        const double cur = rk4(steps);
        if (std::abs(cur - prev) <= 1e-9 * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

TrajectoryRecord simulate_trajectory(const GaussianWavepacket& initial,
                                     const GrwParams& params, double duration,
                                     TrajectoryMode mode, std::uint64_t seed,
                                     double sample_dt) {
    params.validate();
    if (duration < 0.0) throw std::domain_error("simulate_trajectory: duration >= 0");
    if (!(sample_dt > 0.0)) throw std::domain_error("simulate_trajectory: sample_dt > 0");
    if (duration / sample_dt > 5e7) {
        throw std::domain_error("simulate_trajectory: sampling cadence too fine");
    }
    if (!(initial.precision > 0.0)) {
        throw std::domain_error("simulate_trajectory: initial precision > 0");
    }

    RandomStream rng(seed);
    const double rate = amplified_rate(params);
    const double spread_c = spread_coefficient(params);
    const double a0 = initial.precision;

    TrajectoryRecord rec;
    rec.seed = seed;
    rec.mode = mode;

    GaussianWavepacket state = initial;
    double t = 0.0;
    std::uint64_t hits = 0;
    rec.samples.push_back({0.0, 0, state.mean, state.variance()});

    double next_hit = (rate > 0.0) ? rng.exponential(rate) : kInf;
    std::uint64_t sample_index = 1;
    double next_sample = sample_dt;

    while (t < duration) {
        const double t_next = std::min({next_hit, next_sample, duration});
        if (mode == TrajectoryMode::HitsAndSpread && t_next > t) {
            const double v = integrate_spread_variance(state.variance(), t, t_next, spread_c);
            state.precision = 1.0 / v;
        }
        t = t_next;
        if (t == next_hit) {
            const double x0 = sample_hit_center(state, params.alpha_loc, rng);
            state = apply_hit(state, x0, params.alpha_loc);
            ++hits;
            if (mode == TrajectoryMode::HitsOnly) {
                // Recomputing from the count keeps the closed-form variance
                // identity bit-exact over any number of hits.
                state.precision = a0 + static_cast<double>(hits) * params.alpha_loc;
            }
            next_hit = t + rng.exponential(rate);
        }
        if (t == next_sample) {
            rec.samples.push_back({t, hits, state.mean, state.variance()});
            ++sample_index;
            next_sample = sample_dt * static_cast<double>(sample_index);
        }
    }
    if (rec.samples.back().t < duration) {
        rec.samples.push_back({duration, hits, state.mean, state.variance()});
    }
    rec.final_state = state;
    rec.total_hits = hits;
    return rec;
}

std::vector<TrajectoryRecord> simulate_ensemble(const GaussianWavepacket& initial,
                                                const GrwParams& params, double duration,
                                                TrajectoryMode mode,
                                                std::uint64_t master_seed,
                                                std::uint64_t count, double sample_dt,
                                                unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<TrajectoryRecord> records(count);
    auto worker = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            records[i] = simulate_trajectory(initial, params, duration, mode,
                                             substream_seed(master_seed, i), sample_dt);
        }
    };
    if (threads == 1 || count < 2) {
        worker(0, count);
        return records;
    }
    std::vector<std::thread> pool;
    const std::uint64_t per = (count + threads - 1) / threads;
    for (unsigned j = 0; j < threads; ++j) {
        const std::uint64_t begin = j * per;
        const std::uint64_t end = std::min<std::uint64_t>(begin + per, count);
        if (begin >= end) break;
        pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
    return records;
}

}  // namespace grw
