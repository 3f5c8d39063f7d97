#pragma once

#include <string>

#include "json.hpp"

#include "grw/collapse_dynamics.hpp"
#include "grw/config.hpp"
#include "grw/criteria.hpp"
#include "grw/logprob.hpp"
#include "grw/measurement_chain.hpp"

namespace grw {

using Json = nlohmann::ordered_json;

/// Log-domain quantities render as {"sign": s, "log10_mag": m} throughout;
/// values such as e^{-1e50} have no float form.
Json log_to_json(const LogValue& v);

/// %.17g — round-trip exact decimal text for doubles.
std::string format_g17(double v);

Json to_json(const CriterionVerdict& v);
Json to_json(const FuzzyLinkVerdict& v);
Json to_json(const AccessibilityReport& r);
Json to_json(const EnumerationReport& r);
Json to_json(const ChainSummary& s);

std::string trajectory_csv(const TrajectoryRecord& rec);

/// Write in one shot; reports must be byte-identical across re-runs.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace grw
