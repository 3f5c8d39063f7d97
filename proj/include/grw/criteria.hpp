#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grw/logprob.hpp"
#include "grw/state_algebra.hpp"

namespace grw {

enum class CriterionKind { ScalarProduct, PosRFuzzyLink, MassAccessibility };

/// Outcome of testing one structured location claim against a criterion.
struct CriterionVerdict {
    CriterionKind criterion = CriterionKind::PosRFuzzyLink;
    std::string claim;
    bool holds = false;     // score >= threshold
    LogValue score;
    LogValue threshold;
};

/// Fuzzy-link evaluation of a product-region claim. `holds` asserts the
/// claim (proportion >= 1 - p); `refuted` asserts its negation (proportion
/// <= p). Between the two thresholds neither is assertible.
struct FuzzyLinkVerdict {
    std::string claim;
    bool holds = false;
    bool refuted = false;
    LogValue score;
    LogValue assert_threshold;  // 1 - p
    LogValue refute_threshold;  // p
};

/// Coarse-grained two-region mass statistics over collapse outcomes: each
/// marble lands IN with its in-weight, carrying unit mass. accessible means
/// ratio_sq = variance / mean^2 < epsilon; zero expected mass is reported
/// vacuous instead of dividing by zero.
struct AccessibilityReport {
    Region region = Region::In;
    LogValue mean_mass;   // marble masses
    LogValue variance;    // marble masses squared
    LogValue ratio_sq;    // R^2; sign 0 and vacuous when mean is zero
    bool accessible = false;
    bool vacuous = false;
    double epsilon = 0.0;
};

/// Squared overlap with the everything-in-its-dominant-slot eigenstate:
/// sum_i ln(in-weight_i), = n ln|alpha|^2 for homogeneous states.
LogValue scalar_product_proximity(const ProductState& state);

/// PosR: "the marble is in `region`" iff its squared-amplitude proportion
/// there is >= 1 - p, with 0 < p < 0.5.
CriterionVerdict posr_verdict(const MarbleState& marble, Region region, double p);

/// Fuzzy-link on a full region assignment; reduces to posr_verdict at n = 1.
FuzzyLinkVerdict fuzzy_link_verdict(const ProductState& state, const TermPattern& pattern,
                                    double p);

/// Smallest n with |alpha|^{2n} <= p, i.e. the first marble count at which
/// the all-in claim is refuted. No finite threshold when alpha_sq == 1
/// (nullopt). Accepts p in (0, 0.5].
std::optional<std::uint64_t> anomaly_threshold(LogValue alpha_sq, double p);
std::optional<std::uint64_t> anomaly_threshold(double alpha_sq, double p);

/// Mass-density accessibility of a region, default epsilon 1e-6.
AccessibilityReport mass_accessibility(const ProductState& state, Region region,
                                       double epsilon = 1e-6);

/// The side-by-side enumeration view: per-marble verdicts (grouped by
/// identical marbles), the all-in fuzzy-link verdict, the anomaly threshold,
/// scalar-product proximity, and both accessibility reports.
/// anomaly_exhibited = every marble individually passes PosR for IN while
/// the joint all-in claim is refuted.
struct EnumerationReport {
    struct PerMarbleGroup {
        std::uint64_t count = 0;
        CriterionVerdict verdict;
    };
    std::vector<PerMarbleGroup> per_marble;
    bool per_marble_all_hold = false;
    FuzzyLinkVerdict all_in_fuzzy;
    std::optional<std::uint64_t> anomaly_threshold;  // homogeneous states only
    LogValue scalar_product;
    AccessibilityReport accessibility_in;
    AccessibilityReport accessibility_out;
    bool anomaly_exhibited = false;
    double p = 0.0;
    double epsilon = 0.0;
};

EnumerationReport enumeration_report(const ProductState& state, double p, double epsilon);

}  // namespace grw
