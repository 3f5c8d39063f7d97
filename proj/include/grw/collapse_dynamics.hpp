#pragma once

#include <cstdint>
#include <vector>

#include "grw/logprob.hpp"
#include "grw/rng.hpp"

namespace grw {

/// Prefactor convention for the free-spread rate. The default carries the
/// 4 pi^2 hbar^2 ( = h^2) factor of the implemented rate law verbatim; the
/// alternative 4 hbar^2 form is provided for sensitivity checks only.
enum class SpreadConvention { PlanckH, ReducedHbar };

/// Model parameters, CGS units throughout.
struct GrwParams {
    double alpha_loc = 1e10;      // cm^-2, localization accuracy
    double lambda_micro = 1e-16;  // s^-1, per-nucleon hit rate
    double n_nucleons = 1e23;     // constituent nucleon count
    double mass = 1.0;            // g
    double hbar = 1.0546e-27;     // erg s
    SpreadConvention spread_convention = SpreadConvention::PlanckH;

    void validate() const;  // throws std::domain_error unless all positive
    double spread_prefactor() const;
};

/// 1D centre-of-mass Gaussian, phi(x) ~ exp(-precision (x - mean)^2 / 2).
/// variance() is 1/precision. log_norm accumulates the log-weights of the
/// hits applied so far (conditioned-probability bookkeeping).
struct GaussianWavepacket {
    double mean = 0.0;
    double precision = 1.0;  // cm^-2
    LogValue log_norm = LogValue::one();

    double variance() const { return 1.0 / precision; }
};

/// Amplified macroscopic rate lambda = N lambda_micro.
double amplified_rate(const GrwParams& params);

/// One localization at x0 with accuracy alpha: precision b -> b + alpha,
/// mean -> (b mu + alpha x0) / (b + alpha), log_norm += log hit weight.
GaussianWavepacket apply_hit(const GaussianWavepacket& state, double x0, double alpha_loc);

/// Standard deviation of the hit-center law for a Gaussian state:
/// sqrt((alpha + b) / (2 alpha b)).
double hit_center_stddev(double precision, double alpha_loc);

/// Hit center drawn from N(mean, (alpha + b)/(2 alpha b)); this is the
/// normalized hit-center density for a Gaussian state.
double sample_hit_center(const GaussianWavepacket& state, double alpha_loc, RandomStream& rng);

/// Poisson hit times on [0, duration] via exponential inter-arrivals.
std::vector<double> sample_hit_times(double rate, double duration, RandomStream& rng);

/// Variance after n hits: 1 / (a + n alpha).
double variance_after_hits(double a, std::uint64_t hit_count, double alpha_loc);

/// Free-spread rate, printed form: prefactor * hbar^2 (a + lambda alpha t) t / m^2.
double schrodinger_spread_rate(double a, double t, const GrwParams& params);

/// Localization narrowing rate magnitude: alpha lambda / (a + alpha lambda t)^2.
double localization_shrink_rate(double a, double t, const GrwParams& params);

/// Regime time, closed form: sqrt(m / (2 pi hbar lambda alpha)).
double regime_time(const GrwParams& params);

/// Numeric crossing of the spread and shrink rates (bisection); independent
/// route to the closed-form regime time.
double regime_time_balance_root(const GrwParams& params, double a);

/// Equilibrium position spread: (2 pi hbar / (m lambda alpha))^{1/4}.
double equilibrium_width(const GrwParams& params);

/// Mean after lambda*t hits all forced at x0, linearized for b >> alpha:
/// mean + (alpha lambda t / b) * (x0 - mean).
struct ForcedDisplacement {
    double shifted_mean = 0.0;
    double shift_factor = 0.0;   // alpha lambda t / b
    double expected_hits = 0.0;  // lambda t
    bool narrow_state = true;    // false flags b >> alpha violated
};
ForcedDisplacement forced_displacement(double mean, double b, double x0, double t,
                                       const GrwParams& params);

/// ln P(hit farther than `offset` from the mean) for a state of the given
/// precision: log_erfc(offset * sqrt(precision)). At precision 1e22 this is
/// erfc(1e11 * offset).
LogValue tail_hit_log_probability(double offset, double precision);

/// Log-space upper bound on the probability of a displacement by `offset`
/// within time t, from composing lambda*t independent tail-hit
/// probabilities. A bound, not an exact construction.
LogValue displacement_probability_bound(double offset, double precision, double t,
                                        const GrwParams& params);

/// Integrate dv/dt = dv_coeff * t / v from (t0, v0) to t1 by stepwise RK4
/// quadrature, doubling steps until halving changes the result by < 1e-9.
double integrate_spread_variance(double v0, double t0, double t1, double dv_coeff);

enum class TrajectoryMode { HitsOnly, HitsAndSpread };

struct TrajectorySample {
    double t = 0.0;
    std::uint64_t hits = 0;
    double mean = 0.0;
    double variance = 0.0;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    TrajectoryMode mode = TrajectoryMode::HitsOnly;
    std::vector<TrajectorySample> samples;
    GaussianWavepacket final_state;
    std::uint64_t total_hits = 0;
};

/// Event-driven single-trajectory simulation, fully determined by
/// (seed, params, duration, mode, sample_dt). In HitsOnly mode the precision
/// is recomputed from the hit count so the end state satisfies
/// variance_after_hits exactly; in HitsAndSpread mode the printed spread
/// rate (with the current precision) is integrated between hits.
TrajectoryRecord simulate_trajectory(const GaussianWavepacket& initial,
                                     const GrwParams& params, double duration,
                                     TrajectoryMode mode, std::uint64_t seed,
                                     double sample_dt);

/// Independent trajectories with per-index substreams of `master_seed`;
/// results do not depend on thread count or scheduling.
std::vector<TrajectoryRecord> simulate_ensemble(const GaussianWavepacket& initial,
                                                const GrwParams& params, double duration,
                                                TrajectoryMode mode,
                                                std::uint64_t master_seed,
                                                std::uint64_t count, double sample_dt,
                                                unsigned threads);

}  // namespace grw
