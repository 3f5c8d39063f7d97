#include "grw/criteria.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace grw {

namespace {

void check_posr_p(double p) {
    if (!(p > 0.0) || !(p < 0.5)) {
        throw std::domain_error("criterion parameter p must lie in (0, 0.5)");
    }
}

std::string region_name(Region r) {
    return r == Region::In ? "in the box" : "out of the box";
}

std::string pattern_claim(const TermPattern& pattern) {
    const std::uint64_t n = pattern.size();
    const std::uint64_t k = pattern.in_count();
    if (k == n) return "all " + std::to_string(n) + " marbles in the box";
    if (k == 0) return "all " + std::to_string(n) + " marbles out of the box";
    return std::to_string(k) + " of " + std::to_string(n) + " marbles in the box";
}

}  // namespace

LogValue scalar_product_proximity(const ProductState& state) {
    LogValue r = LogValue::one();
    for (const auto& g : state.groups()) {
        r = log_mul(r, log_pow_uint(g.marble.in_weight(), g.count));
    }
    return r;
}

CriterionVerdict posr_verdict(const MarbleState& marble, Region region, double p) {
    check_posr_p(p);
    CriterionVerdict v;
    v.criterion = CriterionKind::PosRFuzzyLink;
    v.claim = "marble " + region_name(region);
    v.score = marble.region_weight(region);
    v.threshold = LogValue::from_log(std::log1p(-p));
    v.holds = !log_less(v.score, v.threshold);
    return v;
}

FuzzyLinkVerdict fuzzy_link_verdict(const ProductState& state, const TermPattern& pattern,
                                    double p) {
    check_posr_p(p);
    FuzzyLinkVerdict v;
    v.claim = pattern_claim(pattern);
    v.score = term_log_coefficient(state, pattern);
    v.assert_threshold = LogValue::from_log(std::log1p(-p));
    v.refute_threshold = LogValue::from_real(p);
    v.holds = !log_less(v.score, v.assert_threshold);
    v.refuted = log_leq(v.score, v.refute_threshold);
    return v;
}

std::optional<std::uint64_t> anomaly_threshold(LogValue alpha_sq, double p) {
    if (alpha_sq.sign != +1 || alpha_sq.log_mag > 0.0) {
        throw std::domain_error("anomaly_threshold: alpha_sq must lie in (0, 1]");
    }
    if (!(p > 0.0) || p > 0.5) {
        throw std::domain_error("anomaly_threshold: p must lie in (0, 0.5]");
    }
    if (alpha_sq.log_mag == 0.0) return std::nullopt;  // alpha_sq == 1: never refuted
    const double big_l = alpha_sq.log_mag;  // < 0
    const double lp = std::log(p);
    const double raw = lp / big_l;
    if (!(raw < 9e18)) {
        throw std::overflow_error("anomaly_threshold: threshold exceeds 64-bit range");
    }
    // Same comparison the fuzzy-link refutation uses, so the boundary is
    // exact: smallest n with n * ln(alpha_sq) <= ln p.
    auto refutes = [&](std::uint64_t n) {
        return static_cast<double>(n) * big_l <= lp;
    };
    std::uint64_t n = 1;
    if (raw > 3.0) n = static_cast<std::uint64_t>(std::ceil(raw)) - 2;
    while (!refutes(n)) ++n;
    return n;
}

std::optional<std::uint64_t> anomaly_threshold(double alpha_sq, double p) {
    if (!(alpha_sq > 0.0) || alpha_sq > 1.0) {
        throw std::domain_error("anomaly_threshold: alpha_sq must lie in (0, 1]");
    }
    return anomaly_threshold(LogValue::from_real(alpha_sq), p);
}

AccessibilityReport mass_accessibility(const ProductState& state, Region region,
                                       double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::domain_error("mass_accessibility: epsilon must be positive");
    }
    AccessibilityReport rep;
    rep.region = region;
    rep.epsilon = epsilon;

    const auto gs = state.groups();
    if (gs.size() == 1) {
        // Homogeneous closed form: mean = n w, variance = n w w', R^2 = w'/(n w).
        const LogValue w = gs[0].marble.region_weight(region);
        const LogValue comp = gs[0].marble.region_weight(opposite(region));
        const double dn = static_cast<double>(gs[0].count);
        if (w.sign == 0) {
            rep.mean_mass = LogValue::zero();
            rep.variance = LogValue::zero();
            rep.ratio_sq = LogValue::zero();
            rep.vacuous = true;
            rep.accessible = false;
            return rep;
        }
        rep.mean_mass = LogValue::from_log(std::log(dn) + w.log_mag);
        rep.variance = log_mul(rep.mean_mass, comp);
        rep.ratio_sq = comp.sign == 0
                           ? LogValue::zero()
                           : LogValue::from_log(comp.log_mag - std::log(dn) - w.log_mag);
    } else {
        LogValue mean = LogValue::zero();
        LogValue var = LogValue::zero();
        for (const auto& g : gs) {
            const LogValue w = g.marble.region_weight(region);
            const LogValue comp = g.marble.region_weight(opposite(region));
            const LogValue c = LogValue::from_real(static_cast<double>(g.count));
            mean = log_add(mean, log_mul(c, w));
            var = log_add(var, log_mul(c, log_mul(w, comp)));
        }
        rep.mean_mass = mean;
        rep.variance = var;
        if (mean.sign == 0) {
            rep.ratio_sq = LogValue::zero();
            rep.vacuous = true;
            rep.accessible = false;
            return rep;
        }
        rep.ratio_sq = var.sign == 0 ? LogValue::zero() : log_div(var, log_mul(mean, mean));
    }
    rep.vacuous = false;
    rep.accessible = log_less(rep.ratio_sq, LogValue::from_real(epsilon));
    return rep;
}

EnumerationReport enumeration_report(const ProductState& state, double p, double epsilon) {
    check_posr_p(p);
    EnumerationReport rep;
    rep.p = p;
    rep.epsilon = epsilon;

    rep.per_marble_all_hold = true;
    for (const auto& g : state.groups()) {
        EnumerationReport::PerMarbleGroup pg;
        pg.count = g.count;
        pg.verdict = posr_verdict(g.marble, Region::In, p);
        rep.per_marble_all_hold = rep.per_marble_all_hold && pg.verdict.holds;
        rep.per_marble.push_back(std::move(pg));
    }

    rep.all_in_fuzzy = fuzzy_link_verdict(state, TermPattern::all_in(state.size()), p);
    if (state.homogeneous()) {
        rep.anomaly_threshold = anomaly_threshold(state.marble(0).in_weight(), p);
    }
    rep.scalar_product = scalar_product_proximity(state);
    rep.accessibility_in = mass_accessibility(state, Region::In, epsilon);
    rep.accessibility_out = mass_accessibility(state, Region::Out, epsilon);
    rep.anomaly_exhibited = rep.per_marble_all_hold && rep.all_in_fuzzy.refuted;
    return rep;
}

}  // namespace grw
