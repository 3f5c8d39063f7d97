#include "grw/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace grw {

namespace {

const char* region_tag(Region r) { return r == Region::In ? "in" : "out"; }

}  // namespace

Json log_to_json(const LogValue& v) {
    Json j;
    j["sign"] = v.sign;
    j["log10_mag"] = v.sign == 0 ? 0.0 : v.log10_mag();
    if (v.lossy) j["lossy"] = true;
    return j;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json to_json(const CriterionVerdict& v) {
    Json j;
    j["claim"] = v.claim;
    j["holds"] = v.holds;
    j["score"] = log_to_json(v.score);
    j["threshold"] = log_to_json(v.threshold);
    return j;
}

Json to_json(const FuzzyLinkVerdict& v) {
    Json j;
    j["claim"] = v.claim;
    j["holds"] = v.holds;
    j["refuted"] = v.refuted;
    j["score"] = log_to_json(v.score);
    j["assert_threshold"] = log_to_json(v.assert_threshold);
    j["refute_threshold"] = log_to_json(v.refute_threshold);
    return j;
}

Json to_json(const AccessibilityReport& r) {
    Json j;
    j["region"] = region_tag(r.region);
    j["mean_mass"] = log_to_json(r.mean_mass);
    j["variance"] = log_to_json(r.variance);
    j["ratio_sq"] = log_to_json(r.ratio_sq);
    j["accessible"] = r.accessible;
    j["vacuous"] = r.vacuous;
    j["epsilon"] = r.epsilon;
    return j;
}

Json to_json(const EnumerationReport& r) {
    Json j;
    Json groups = Json::array();
    for (const auto& g : r.per_marble) {
        Json gj = to_json(g.verdict);
        gj["count"] = g.count;
        groups.push_back(std::move(gj));
    }
    j["per_marble"] = std::move(groups);
    j["per_marble_all_hold"] = r.per_marble_all_hold;
    j["all_in_fuzzy"] = to_json(r.all_in_fuzzy);
    if (r.anomaly_threshold) {
        j["anomaly_threshold"] = *r.anomaly_threshold;
    } else {
        j["anomaly_threshold"] = nullptr;
    }
    j["scalar_product_log"] = log_to_json(r.scalar_product);
    j["accessibility_in"] = to_json(r.accessibility_in);
    j["accessibility_out"] = to_json(r.accessibility_out);
    j["anomaly_exhibited"] = r.anomaly_exhibited;
    j["p"] = r.p;
    j["epsilon"] = r.epsilon;
    return j;
}

Json to_json(const ChainSummary& s) {
    Json j;
    j["k_histogram"] = s.k_histogram;
    j["consistency_rate"] = s.consistency_rate;
    j["mismatch_log10"] = log_to_json(s.mismatch);
    Json params;
    params["n"] = s.params.n;
    params["alpha_sq"] = s.params.alpha_sq;
    params["gamma_sq"] = s.params.gamma_sq;
    params["seed"] = s.params.seed;
    j["params"] = std::move(params);
    j["trials"] = s.trials;
    j["flip_model"] =
        s.flip_model == PointerFlipModel::UniformOther ? "uniform" : "adjacent";
    j["ordering"] =
        s.ordering == CollapseOrdering::CountThenCascade ? "ordered" : "simultaneous";
    return j;
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
    std::string out = "t_s,hits,mean_cm,variance_cm2\n";
    for (const auto& s : rec.samples) {
        out += format_g17(s.t);
        out += ',';
        out += std::to_string(s.hits);
        out += ',';
        out += format_g17(s.mean);
        out += ',';
        out += format_g17(s.variance);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace grw
