#include "grw/logprob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace grw {

namespace {

// Cancellation deeper than this (in ln units) wipes out more than half of
// the 53-bit mantissa; such results carry the lossy flag.
constexpr double kCancellationDepthLimit = 18.0;

constexpr double kLn2 = 0.6931471805599453;

}  // namespace

LogValue LogValue::from_real(double v) {
    if (v == 0.0) return zero();
    return {v > 0.0 ? +1 : -1, std::log(std::abs(v)), false};
}

double LogValue::to_real() const {
    if (sign == 0) return 0.0;
    return static_cast<double>(sign) * std::exp(log_mag);
}

double LogValue::log10_mag() const {
    return log_mag / std::numbers::ln10;
}

LogValue log_add(LogValue a, LogValue b) {
    const bool lossy = a.lossy || b.lossy;
    if (a.sign == 0) {
        b.lossy = lossy;
        return b;
    }
    if (b.sign == 0) {
        a.lossy = lossy;
        return a;
    }
    const LogValue& hi = (a.log_mag >= b.log_mag) ? a : b;
    const LogValue& lo = (a.log_mag >= b.log_mag) ? b : a;
    if (a.sign == b.sign) {
        const double r = hi.log_mag + std::log1p(std::exp(lo.log_mag - hi.log_mag));
        return {a.sign, r, lossy};
    }
    // Opposite signs: |hi| - |lo|.
    if (a.log_mag == b.log_mag) return {0, 0.0, true};
    const double d = lo.log_mag - hi.log_mag;  // < 0
    // 1 - e^d via expm1 when e^d is close to 1, log1p otherwise.
    const double r = hi.log_mag +
                     (d > -kLn2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
    const bool cancel = (hi.log_mag - r) > kCancellationDepthLimit;
    return {hi.sign, r, lossy || cancel};
}

LogValue log_sub(LogValue a, LogValue b) {
    return log_add(a, negated(b));
}

LogValue log_mul(LogValue a, LogValue b) {
    if (a.sign == 0 || b.sign == 0) return {0, 0.0, a.lossy || b.lossy};
    return {a.sign * b.sign, a.log_mag + b.log_mag, a.lossy || b.lossy};
}

LogValue log_div(LogValue a, LogValue b) {
    if (b.sign == 0) throw std::domain_error("log_div: division by zero");
    if (a.sign == 0) return {0, 0.0, a.lossy || b.lossy};
    return {a.sign * b.sign, a.log_mag - b.log_mag, a.lossy || b.lossy};
}

LogValue log_pow_uint(LogValue a, std::uint64_t e) {
    if (e == 0) return LogValue::one();
    if (a.sign == 0) return LogValue::zero();
    const int s = (a.sign < 0 && (e & 1u)) ? -1 : +1;
    return {s, a.log_mag * static_cast<double>(e), a.lossy};
}

LogValue negated(LogValue a) {
    a.sign = -a.sign;
    return a;
}

int compare(LogValue a, LogValue b) {
    if (a.sign != b.sign) return a.sign < b.sign ? -1 : +1;
    if (a.sign == 0) return 0;
    if (a.log_mag == b.log_mag) return 0;
    const bool bigger_mag = a.log_mag > b.log_mag;
    return (bigger_mag == (a.sign > 0)) ? +1 : -1;
}

bool log_less(LogValue a, LogValue b) { return compare(a, b) < 0; }
bool log_leq(LogValue a, LogValue b) { return compare(a, b) <= 0; }

LogValue log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw std::domain_error("log_binomial: k > n");
    const std::uint64_t m = std::min(k, n - k);  // canonical: makes symmetry exact
    if (m == 0) return LogValue::one();
    if (n <= 62) {
        // C(62,31) ~ 4.5e17 still fits; intermediates need 128 bits.
        unsigned __int128 c = 1;
        for (std::uint64_t i = 0; i < m; ++i) {
            c = c * (n - i) / (i + 1);
        }
        return LogValue::from_real(static_cast<double>(c));
    }
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return LogValue::from_log(std::lgamma(dn + 1.0) - std::lgamma(dm + 1.0) -
                              std::lgamma(dn - dm + 1.0));
}

double log_erfc_direct(double z) {
    return std::log(std::erfc(z));
}

double log_erfc_asymptotic(double z) {
    // erfc(z) ~ e^{-z^2} / (z sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2z^2)^k.
    // The series is asymptotic; at z >= 26.5 the truncated tail is < 1e-20.
    const double inv_2z2 = 1.0 / (2.0 * z * z);
    double term = 1.0;
    double tail = 0.0;
    for (int k = 1; k <= 30; ++k) {
        term *= -static_cast<double>(2 * k - 1) * inv_2z2;
        tail += term;
        if (std::abs(term) < 1e-20) break;
    }
    return -z * z - std::log(z) - 0.5 * std::log(std::numbers::pi) + std::log1p(tail);
}

LogValue log_erfc(double z) {
    if (z < 0.0) {
        // erfc(-z) = 2 - erfc(z); the result lies in (1, 2).
        return LogValue::from_log(std::log(2.0 - std::erfc(-z)));
    }
    if (z <= kErfcAsymptoticCrossover) {
        return LogValue::from_log(log_erfc_direct(z));
    }
    return LogValue::from_log(log_erfc_asymptotic(z));
}

}  // namespace grw
