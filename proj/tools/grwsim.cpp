// Command-line front end: trajectory / equilibrium / anomaly-sweep /
// accessibility / chain runs from flat key=value config files with CLI
// overrides. Every command is a pure function of (config, seed): identical
// inputs reproduce reports byte for byte.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "grw/collapse_dynamics.hpp"
#include "grw/config.hpp"
#include "grw/criteria.hpp"
#include "grw/measurement_chain.hpp"
#include "grw/report.hpp"
#include "grw/state_algebra.hpp"

namespace {

using grw::ConfigError;
using grw::Json;
using grw::KeyValues;
using grw::ResolvedConfig;

// Registers string-typed options tied to config keys so that precedence is
// uniformly CLI flag > config file > default.
class KeyedOptions {
public:
    explicit KeyedOptions(CLI::App* cmd) : cmd_(cmd) {}

    void add(const std::string& key, const std::string& flag,
             const std::string& default_value, const std::string& help) {
        defaults_[key] = default_value;
        auto [it, inserted] = slots_.emplace(key, std::string{});
        (void)inserted;
        options_[key] = cmd_->add_option(flag, it->second, help);
    }

    KeyValues defaults() const { return defaults_; }

    KeyValues cli_values() const {
        KeyValues kv;
        for (const auto& [key, opt] : options_) {
            if (opt->count() > 0) kv[key] = slots_.at(key);
        }
        return kv;
    }

private:
    CLI::App* cmd_;
    KeyValues defaults_;
    std::map<std::string, std::string> slots_;
    std::map<std::string, CLI::Option*> options_;
};

struct IoArgs {
    std::string config_path;
    std::string out_path;
    std::uint64_t threads = 1;  // execution topology; never part of the run identity
};

void add_common(KeyedOptions& opts) {
    opts.add("seed", "--seed", "1", "master RNG seed (64-bit)");
    opts.add("format", "--format", "json", "output format: json|csv");
}

ResolvedConfig resolve(const KeyedOptions& opts, const IoArgs& io) {
    KeyValues file_kv;
    if (!io.config_path.empty()) file_kv = grw::load_config_source(io.config_path);
    return ResolvedConfig(opts.defaults(), file_kv, opts.cli_values());
}

std::string get_format(const ResolvedConfig& c) {
    const std::string f = c.get_string("format");
    if (f != "json" && f != "csv") throw ConfigError("format must be json or csv");
    return f;
}

void emit(const IoArgs& io, const std::string& content) {
    if (io.out_path.empty()) {
        std::cout << content;
    } else {
        grw::write_text_file(io.out_path, content);
    }
}

Json envelope(const std::string& command, const ResolvedConfig& c) {
    Json j;
    j["command"] = command;
    Json cfg;
    for (const auto& [key, value] : c.values()) cfg[key] = value;
    j["config"] = std::move(cfg);
    return j;
}

void add_grw_keys(KeyedOptions& opts) {
    opts.add("alpha_loc", "--alpha-loc", "1e10", "localization accuracy (cm^-2)");
    opts.add("lambda_micro", "--lambda-micro", "1e-16", "per-nucleon hit rate (s^-1)");
    opts.add("n_nucleons", "--n-nucleons", "1e23", "constituent nucleon count");
    opts.add("mass", "--mass", "1", "mass (g)");
    opts.add("hbar", "--hbar", "1.0546e-27", "reduced Planck constant (erg s)");
    opts.add("spread_convention", "--spread-convention", "planck",
             "free-spread prefactor: planck (4 pi^2 hbar^2) | reduced (4 hbar^2)");
}

grw::GrwParams grw_params_from(const ResolvedConfig& c) {
    grw::GrwParams p;
    p.alpha_loc = c.get_positive("alpha_loc");
    p.lambda_micro = c.get_double("lambda_micro");  // 0 = hit-free evolution
    p.n_nucleons = c.get_double("n_nucleons");
    p.mass = c.get_positive("mass");
    p.hbar = c.get_positive("hbar");
    const std::string conv = c.get_string("spread_convention");
    if (conv == "planck") {
        p.spread_convention = grw::SpreadConvention::PlanckH;
    } else if (conv == "reduced") {
        p.spread_convention = grw::SpreadConvention::ReducedHbar;
    } else {
        throw ConfigError("spread_convention must be planck or reduced");
    }
    p.validate();
    return p;
}

void add_marble_keys(KeyedOptions& opts) {
    opts.add("alpha_sq", "--alpha-sq", "",
             "per-marble in-box weight |alpha|^2; empty = use beta_epsilon");
    opts.add("beta_epsilon", "--beta-epsilon", "1e-9",
             "per-marble out-box weight |beta|^2 = eps, i.e. |alpha|^2 = 1 - eps");
}

grw::MarbleState marble_from(const ResolvedConfig& c) {
    if (!c.get_string("alpha_sq").empty()) {
        return grw::MarbleState::from_alpha_sq(c.get_double("alpha_sq"));
    }
    return grw::MarbleState::from_beta_sq_epsilon(c.get_positive("beta_epsilon"));
}

Json analytics_json(const grw::GrwParams& params, double balance_a) {
    Json a;
    a["amplified_rate_hz"] = grw::amplified_rate(params);
    if (grw::amplified_rate(params) > 0.0) {
        a["regime_time_s"] = grw::regime_time(params);
        a["balance_root_s"] = grw::regime_time_balance_root(params, balance_a);
        const double width = grw::equilibrium_width(params);
        a["equilibrium_width_cm"] = width;
        a["equilibrium_precision_cm2"] = 1.0 / (width * width);
    } else {
        a["regime_time_s"] = nullptr;
        a["balance_root_s"] = nullptr;
        a["equilibrium_width_cm"] = nullptr;
        a["equilibrium_precision_cm2"] = nullptr;
    }
    return a;
}

void echo_analytics(const Json& a) {
    if (!a["regime_time_s"].is_number()) return;
    std::cout << "regime_time_s = " << grw::format_g17(a["regime_time_s"].get<double>())
              << "\n"
              << "equilibrium_width_cm = "
              << grw::format_g17(a["equilibrium_width_cm"].get<double>()) << "\n";
}

// ---------------------------------------------------------------- trajectory

int cmd_trajectory(const KeyedOptions& opts, const IoArgs& io) {
    const ResolvedConfig c = resolve(opts, io);
    const std::string format = get_format(c);
    const grw::GrwParams params = grw_params_from(c);

    const double duration = c.get_double("duration");
    if (duration < 0.0) throw ConfigError("duration must be >= 0");
    double sample_dt = c.get_double("sample_dt");
    if (sample_dt == 0.0) sample_dt = duration > 0.0 ? duration / 100.0 : 1.0;
    if (!(sample_dt > 0.0)) throw ConfigError("sample_dt must be positive");

    const std::string mode_str = c.get_string("mode");
    grw::TrajectoryMode mode;
    if (mode_str == "hits") {
        mode = grw::TrajectoryMode::HitsOnly;
    } else if (mode_str == "spread") {
        mode = grw::TrajectoryMode::HitsAndSpread;
    } else {
        throw ConfigError("mode must be hits or spread");
    }

    grw::GaussianWavepacket initial;
    initial.mean = c.get_double("initial_mean");
    initial.precision = c.get_positive("initial_precision");

    const auto rec = grw::simulate_trajectory(initial, params, duration, mode,
                                              c.get_u64("seed"), sample_dt);
    const Json analytics = analytics_json(params, initial.precision);

    if (format == "csv") {
        emit(io, grw::trajectory_csv(rec));
    } else {
        Json j = envelope("trajectory", c);
        j["analytics"] = analytics;
        j["total_hits"] = rec.total_hits;
        Json samples = Json::array();
        for (const auto& s : rec.samples) {
            Json row;
            row["t_s"] = s.t;
            row["hits"] = s.hits;
            row["mean_cm"] = s.mean;
            row["variance_cm2"] = s.variance;
            samples.push_back(std::move(row));
        }
        j["samples"] = std::move(samples);
        emit(io, j.dump(2) + "\n");
    }
    if (!io.out_path.empty()) echo_analytics(analytics);
    return 0;
}

// --------------------------------------------------------------- equilibrium

int cmd_equilibrium(const KeyedOptions& opts, const IoArgs& io) {
    const ResolvedConfig c = resolve(opts, io);
    const std::string format = get_format(c);
    const grw::GrwParams params = grw_params_from(c);
    if (!(grw::amplified_rate(params) > 0.0)) {
        throw ConfigError("equilibrium analytics need a positive hit rate");
    }
    const double balance_a = c.get_positive("balance_a");
    const Json analytics = analytics_json(params, balance_a);

    // Log-space bound on a forced displacement: lambda t independent tail
    // hits composed in log space. A bound, not an exact probability.
    const double d_offset = c.get_positive("displacement_offset");
    const double d_time = c.get_positive("displacement_time");
    const double d_precision = c.get_positive("displacement_precision");
    const grw::LogValue bound =
        grw::displacement_probability_bound(d_offset, d_precision, d_time, params);

    if (format == "csv") {
        std::string out =
            "amplified_rate_hz,regime_time_s,balance_root_s,equilibrium_width_cm,"
            "equilibrium_precision_cm2,displacement_bound_sign,"
            "displacement_bound_log10\n";
        out += grw::format_g17(analytics["amplified_rate_hz"].get<double>()) + ",";
        out += grw::format_g17(analytics["regime_time_s"].get<double>()) + ",";
        out += grw::format_g17(analytics["balance_root_s"].get<double>()) + ",";
        out += grw::format_g17(analytics["equilibrium_width_cm"].get<double>()) + ",";
        out += grw::format_g17(analytics["equilibrium_precision_cm2"].get<double>()) + ",";
        out += std::to_string(bound.sign) + ",";
        out += grw::format_g17(bound.sign == 0 ? 0.0 : bound.log10_mag()) + "\n";
        emit(io, out);
    } else {
        Json j = envelope("equilibrium", c);
        j.update(analytics);
        j["displacement_log10_bound"] = grw::log_to_json(bound);
        emit(io, j.dump(2) + "\n");
    }
    return 0;
}

// ------------------------------------------------------------- anomaly sweep

std::vector<std::uint64_t> sweep_grid(const ResolvedConfig& c) {
    std::vector<std::uint64_t> ns;
    const std::string list = c.get_string("n_list");
    if (!list.empty()) {
        std::size_t pos = 0;
        while (pos < list.size()) {
            const std::size_t comma = list.find(',', pos);
            const std::string tok = list.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            try {
                std::size_t used = 0;
                ns.push_back(std::stoull(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ConfigError("n_list: '" + tok + "' is not an integer");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    } else {
        const std::uint64_t n_min = c.get_u64("n_min");
        const std::uint64_t n_max = c.get_u64("n_max");
        const std::uint64_t points = c.get_u64("n_points");
        if (n_min == 0 || n_max < n_min || points == 0) {
            throw ConfigError("need 1 <= n_min <= n_max and n_points >= 1");
        }
        // Geometric grid, deduplicated after rounding.
        const double lo = std::log(static_cast<double>(n_min));
        const double hi = std::log(static_cast<double>(n_max));
        for (std::uint64_t i = 0; i < points; ++i) {
            const double f =
                points == 1 ? 0.0
                            : static_cast<double>(i) / static_cast<double>(points - 1);
            const double v = std::exp(lo + f * (hi - lo));
            ns.push_back(static_cast<std::uint64_t>(std::llround(v)));
        }
    }
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (ns.empty() || ns.front() == 0) throw ConfigError("n grid must start at n >= 1");
    return ns;
}

int cmd_anomaly_sweep(const KeyedOptions& opts, const IoArgs& io) {
    const ResolvedConfig c = resolve(opts, io);
    const std::string format = get_format(c);
    const grw::MarbleState marble = marble_from(c);
    const double p = c.get_double("p");
    const double epsilon = c.get_positive("epsilon");
    const std::vector<std::uint64_t> ns = sweep_grid(c);

    const auto n_star = grw::anomaly_threshold(marble.in_weight(), p);

    struct Row {
        std::uint64_t n;
        grw::EnumerationReport rep;
    };
    std::vector<Row> rows;
    rows.reserve(ns.size());
    for (const std::uint64_t n : ns) {
        rows.push_back(
            {n, grw::enumeration_report(grw::ProductState::uniform(marble, n), p, epsilon)});
    }

    if (format == "csv") {
        std::string out =
            "n,per_marble_holds,all_in_holds,all_in_refuted,anomaly_exhibited,"
            "is_threshold,scalar_product_sign,scalar_product_log10,r2_in_sign,"
            "r2_in_log10\n";
        for (const auto& row : rows) {
            const auto& r = row.rep;
            out += std::to_string(row.n) + ",";
            out += std::string(r.per_marble_all_hold ? "1" : "0") + ",";
            out += std::string(r.all_in_fuzzy.holds ? "1" : "0") + ",";
            out += std::string(r.all_in_fuzzy.refuted ? "1" : "0") + ",";
            out += std::string(r.anomaly_exhibited ? "1" : "0") + ",";
            out += std::string(n_star && *n_star == row.n ? "1" : "0") + ",";
            out += std::to_string(r.scalar_product.sign) + ",";
            out += grw::format_g17(r.scalar_product.log10_mag()) + ",";
            out += std::to_string(r.accessibility_in.ratio_sq.sign) + ",";
            out += grw::format_g17(r.accessibility_in.ratio_sq.sign == 0
                                       ? 0.0
                                       : r.accessibility_in.ratio_sq.log10_mag()) +
                   "\n";
        }
        emit(io, out);
    } else {
        Json j = envelope("anomaly-sweep", c);
        if (n_star) {
            j["anomaly_threshold"] = *n_star;
        } else {
            j["anomaly_threshold"] = nullptr;
        }
        Json jrows = Json::array();
        for (const auto& row : rows) {
            const auto& r = row.rep;
            Json jr;
            jr["n"] = row.n;
            jr["per_marble_holds"] = r.per_marble_all_hold;
            jr["all_in_holds"] = r.all_in_fuzzy.holds;
            jr["all_in_refuted"] = r.all_in_fuzzy.refuted;
            jr["anomaly_exhibited"] = r.anomaly_exhibited;
            jr["is_threshold"] = n_star && *n_star == row.n;
            jr["scalar_product_log"] = grw::log_to_json(r.scalar_product);
            jr["r2_in"] = grw::log_to_json(r.accessibility_in.ratio_sq);
            jrows.push_back(std::move(jr));
        }
        j["rows"] = std::move(jrows);
        emit(io, j.dump(2) + "\n");
    }
    return 0;
}

// ------------------------------------------------------------- accessibility

int cmd_accessibility(const KeyedOptions& opts, const IoArgs& io) {
    const ResolvedConfig c = resolve(opts, io);
    const std::string format = get_format(c);
    const grw::MarbleState marble = marble_from(c);
    const std::uint64_t n = c.get_u64("n");
    if (n == 0) throw ConfigError("n must be >= 1");
    const double p = c.get_double("p");
    const double epsilon = c.get_positive("epsilon");

    const auto rep =
        grw::enumeration_report(grw::ProductState::uniform(marble, n), p, epsilon);

    if (format == "csv") {
        std::string out =
            "region,mean_sign,mean_log10,variance_sign,variance_log10,ratio_sq_sign,"
            "ratio_sq_log10,accessible,vacuous\n";
        for (const auto* r : {&rep.accessibility_in, &rep.accessibility_out}) {
            out += (r->region == grw::Region::In ? "in," : "out,");
            out += std::to_string(r->mean_mass.sign) + ",";
            out +=
                grw::format_g17(r->mean_mass.sign == 0 ? 0.0 : r->mean_mass.log10_mag()) +
                ",";
            out += std::to_string(r->variance.sign) + ",";
            out +=
                grw::format_g17(r->variance.sign == 0 ? 0.0 : r->variance.log10_mag()) +
                ",";
            out += std::to_string(r->ratio_sq.sign) + ",";
            out +=
                grw::format_g17(r->ratio_sq.sign == 0 ? 0.0 : r->ratio_sq.log10_mag()) +
                ",";
            out += std::string(r->accessible ? "1" : "0") + ",";
            out += std::string(r->vacuous ? "1" : "0") + "\n";
        }
        emit(io, out);
    } else {
        Json j = envelope("accessibility", c);
        const Json payload = grw::to_json(rep);
        j.update(payload);
        emit(io, j.dump(2) + "\n");
    }
    return 0;
}

// --------------------------------------------------------------------- chain

int cmd_chain(const KeyedOptions& opts, const IoArgs& io) {
    const ResolvedConfig c = resolve(opts, io);
    const std::string format = get_format(c);

    grw::ChainParams params;
    params.n = c.get_u64("n");
    params.alpha_sq = c.get_double("alpha_sq");
    params.gamma_sq = c.get_double("gamma_sq");
    params.seed = c.get_u64("seed");
    params.validate();

    const std::uint64_t trials = c.get_u64("trials");
    if (trials == 0) throw ConfigError("trials must be >= 1");

    grw::ChainRunOptions options;
    const std::string flip = c.get_string("flip_model");
    if (flip == "uniform") {
        options.flip_model = grw::PointerFlipModel::UniformOther;
    } else if (flip == "adjacent") {
        options.flip_model = grw::PointerFlipModel::AdjacentReading;
    } else {
        throw ConfigError("flip_model must be uniform or adjacent");
    }
    const std::string ordering = c.get_string("ordering");
    if (ordering == "ordered") {
        options.ordering = grw::CollapseOrdering::CountThenCascade;
    } else if (ordering == "simultaneous") {
        options.ordering = grw::CollapseOrdering::Simultaneous;
    } else {
        throw ConfigError("ordering must be ordered or simultaneous");
    }
    options.threads = static_cast<unsigned>(io.threads);

    const grw::ChainSummary summary = grw::run_chain(params, trials, options);

    if (format == "csv") {
        std::string out = "k,count,consistency_rate,mismatch_sign,mismatch_log10,trials\n";
        for (std::size_t k = 0; k < summary.k_histogram.size(); ++k) {
            out += std::to_string(k) + "," + std::to_string(summary.k_histogram[k]) + ",";
            out += grw::format_g17(summary.consistency_rate) + ",";
            out += std::to_string(summary.mismatch.sign) + ",";
            out += grw::format_g17(summary.mismatch.sign == 0
                                       ? 0.0
                                       : summary.mismatch.log10_mag()) +
                   ",";
            out += std::to_string(summary.trials) + "\n";
        }
        emit(io, out);
    } else {
        Json j = envelope("chain", c);
        const Json payload = grw::to_json(summary);
        j.update(payload);
        emit(io, j.dump(2) + "\n");
    }
    return 0;
}

void print_error(const std::string& kind, const std::string& message) {
    Json j;
    Json e;
    e["kind"] = kind;
    e["message"] = message;
    j["error"] = std::move(e);
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GRW spontaneous-localization marble simulator"};
    app.require_subcommand(1);

    IoArgs io;
    app.add_option("--config", io.config_path,
                   "key=value config file or emitted JSON report")
        ->expected(1);
    app.add_option("--out", io.out_path, "output path (default: stdout)")->expected(1);
    app.add_option("--threads", io.threads,
                   "worker threads for ensemble commands; 0 = hardware")
        ->expected(1);

    auto* traj = app.add_subcommand("trajectory", "single-marble collapse trajectory");
    traj->fallthrough();
    KeyedOptions traj_opts(traj);
    add_common(traj_opts);
    add_grw_keys(traj_opts);
    traj_opts.add("initial_mean", "--initial-mean", "0", "initial mean position (cm)");
    traj_opts.add("initial_precision", "--initial-precision", "1e10",
                  "initial wavepacket precision a (cm^-2)");
    traj_opts.add("duration", "--duration", "1e-5", "simulated time (s)");
    traj_opts.add("sample_dt", "--sample-dt", "0", "sampling cadence (s); 0 = duration/100");
    traj_opts.add("mode", "--mode", "hits", "hits | spread");

    auto* equi = app.add_subcommand("equilibrium", "regime time and equilibrium width");
    equi->fallthrough();
    KeyedOptions equi_opts(equi);
    add_common(equi_opts);
    add_grw_keys(equi_opts);
    equi_opts.add("balance_a", "--balance-a", "1e10",
                  "initial precision for the rate-balance root (cm^-2)");
    equi_opts.add("displacement_offset", "--displacement-offset", "10",
                  "offset for the displacement probability bound (cm)");
    equi_opts.add("displacement_time", "--displacement-time", "86400",
                  "time window for the displacement bound (s)");
    equi_opts.add("displacement_precision", "--displacement-precision", "1e22",
                  "wavepacket precision for the displacement bound (cm^-2)");

    auto* sweep =
        app.add_subcommand("anomaly-sweep", "criteria comparison across marble counts");
    sweep->fallthrough();
    KeyedOptions sweep_opts(sweep);
    add_common(sweep_opts);
    add_marble_keys(sweep_opts);
    sweep_opts.add("p", "--p", "0.25", "fuzzy-link tolerance p in (0, 0.5)");
    sweep_opts.add("epsilon", "--epsilon", "1e-6", "accessibility cutoff for R^2");
    sweep_opts.add("n_min", "--n-min", "1", "grid start");
    sweep_opts.add("n_max", "--n-max", "1e10", "grid end");
    sweep_opts.add("n_points", "--n-points", "25", "geometric grid points");
    sweep_opts.add("n_list", "--n-list", "", "explicit comma-separated n values");

    auto* acc = app.add_subcommand("accessibility", "mass-density accessibility report");
    acc->fallthrough();
    KeyedOptions acc_opts(acc);
    add_common(acc_opts);
    add_marble_keys(acc_opts);
    acc_opts.add("n", "--n", "10", "marble count");
    acc_opts.add("p", "--p", "0.25", "fuzzy-link tolerance p in (0, 0.5)");
    acc_opts.add("epsilon", "--epsilon", "1e-6", "accessibility cutoff for R^2");

    auto* chain = app.add_subcommand("chain", "operationalized counting protocol");
    chain->fallthrough();
    KeyedOptions chain_opts(chain);
    add_common(chain_opts);
    chain_opts.add("n", "--n", "10", "marble count");
    chain_opts.add("alpha_sq", "--alpha-sq", "0.9", "per-marble in-box weight");
    chain_opts.add("gamma_sq", "--gamma-sq", "0.99", "pointer fidelity |gamma|^2");
    chain_opts.add("trials", "--trials", "100000", "Monte Carlo trials");
    chain_opts.add("flip_model", "--flip-model", "uniform", "uniform | adjacent");
    chain_opts.add("ordering", "--ordering", "ordered", "ordered | simultaneous");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("config", e.what());
        return 2;
    }

    try {
        if (traj->parsed()) return cmd_trajectory(traj_opts, io);
        if (equi->parsed()) return cmd_equilibrium(equi_opts, io);
        if (sweep->parsed()) return cmd_anomaly_sweep(sweep_opts, io);
        if (acc->parsed()) return cmd_accessibility(acc_opts, io);
        if (chain->parsed()) return cmd_chain(chain_opts, io);
        print_error("config", "no subcommand given");
        return 2;
    } catch (const ConfigError& e) {
        print_error("config", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        print_error("config", e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 3;
    }
}
