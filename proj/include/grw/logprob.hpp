#pragma once

#include <cstdint>

namespace grw {

/// A signed real magnitude stored as (sign, ln|value|). This is the only
/// representation in the project for probabilities and amplitudes, which
/// range from 1 down to e^{-1e50} and beyond any floating-point range.
struct LogValue {
    int sign = 0;          // -1, 0, +1; sign == 0 means the value is exactly zero
    double log_mag = 0.0;  // natural log of |value|; irrelevant when sign == 0
    bool lossy = false;    // set when catastrophic cancellation degraded the result

    static LogValue zero() { return {}; }
    static LogValue one() { return {+1, 0.0, false}; }
    static LogValue from_log(double lm, int s = +1) { return {s, lm, false}; }
    static LogValue from_real(double v);

    /// Underflows to 0 / overflows to +-inf outside the double range.
    double to_real() const;
    double log10_mag() const;
    bool is_zero() const { return sign == 0; }
};

/// Exact-as-possible a+b without underflow. Commutative; exact when one
/// operand is zero. Opposite-sign operands that cancel more than half the
/// mantissa mark the result lossy instead of silently returning noise.
LogValue log_add(LogValue a, LogValue b);
LogValue log_sub(LogValue a, LogValue b);
LogValue log_mul(LogValue a, LogValue b);
LogValue log_div(LogValue a, LogValue b);
LogValue log_pow_uint(LogValue a, std::uint64_t e);
LogValue negated(LogValue a);

/// Total order on the represented real values: -1, 0, +1.
int compare(LogValue a, LogValue b);
bool log_less(LogValue a, LogValue b);
bool log_leq(LogValue a, LogValue b);

/// ln C(n,k) via exact integer arithmetic for n <= 62, log-gamma above.
/// log_binomial(n,k) == log_binomial(n,n-k) exactly by construction.
/// Throws std::domain_error when k > n.
LogValue log_binomial(std::uint64_t n, std::uint64_t k);

/// ln erfc(z) for any z. Below the crossover the value comes from the
/// library erfc; above it from the large-z asymptotic expansion
///   ln erfc(z) = -z^2 - ln(z sqrt(pi)) + ln(1 - 1/(2z^2) + 3/(2z^2)^2 - ...).
/// Negative z is folded through erfc(-z) = 2 - erfc(z).
LogValue log_erfc(double z);

// Branches exposed separately so the crossover agreement can be checked.
double log_erfc_direct(double z);
double log_erfc_asymptotic(double z);

/// Crossover between the branches; double-precision erfc underflows to 0
/// slightly above this point (erfc(26.5) ~ 2e-307).
inline constexpr double kErfcAsymptoticCrossover = 26.5;

}  // namespace grw
