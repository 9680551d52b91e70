// Command-line surface for the CV-QKD key-rate engine: single-point key
// rates, Fig.-2-style sweeps, protocol simulation batches, and Monte Carlo
// verification of the concentration bounds.
//
// Exit codes: 0 success, 1 bound/acceptance failure, 2 usage/config error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvqkd/bounds_oracle.hpp"
#include "cvqkd/finite_size.hpp"
#include "cvqkd/gaussian_channel.hpp"
#include "cvqkd/parallel.hpp"
#include "cvqkd/parameter_estimation.hpp"
#include "cvqkd/protocol_sim.hpp"
#include "cvqkd/report_io.hpp"

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliConfig {
    double distance_km = 25.0;
    double loss_db_per_km = 0.2;
    std::optional<double> transmittance;
    double excess_noise = 0.01;

    std::optional<double> variance;

    std::optional<double> n;
    int d = 5;
    double beta = 0.95;

    cvqkd::SecurityBudget budget{};
    double eps_rob = 0.01;
    double threshold_sigmas = 3.0;
    cvqkd::ModulationGrid grid{};

    std::vector<double> sweep_distances = {1.0, 10.0, 50.0, 100.0};
    std::vector<double> sweep_n = {1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12};

    std::uint64_t trials = 1000;

    std::vector<std::string> suite = {"chi2", "projection_norm", "inner_product",
                                      "half_vs_half", "expectation"};
    std::uint64_t bound_trials = 100000;
    std::vector<double> eps_values = {0.01, 0.05, 0.2};
    double bound_scale = 1.0;

    std::uint64_t seed = 1;

    cvqkd::ChannelModel channel() const {
        cvqkd::ChannelModel ch;
        ch.transmittance = transmittance ? *transmittance
                                         : cvqkd::transmittance_from_km(distance_km, loss_db_per_km);
        ch.excess_noise = excess_noise;
        ch.validate();
        return ch;
    }
};

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in config section '" + section + "'");
        }
    }
}

double require_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError("field '" + where + "' must be a number");
    return j.get<double>();
}

CliConfig parse_config(const json& root) {
    CliConfig cfg;
    check_keys(root, "<top>", {"channel", "modulation", "protocol", "budget", "eps_rob_target",
                               "threshold_sigmas", "v_grid", "sweep", "simulate", "bounds",
                               "seed"});
    if (root.contains("channel")) {
        const json& ch = root["channel"];
        check_keys(ch, "channel", {"distance_km", "loss_db_per_km", "transmittance",
                                   "excess_noise"});
        if (ch.contains("distance_km")) cfg.distance_km = require_number(ch["distance_km"], "channel.distance_km");
        if (ch.contains("loss_db_per_km")) cfg.loss_db_per_km = require_number(ch["loss_db_per_km"], "channel.loss_db_per_km");
        if (ch.contains("transmittance")) cfg.transmittance = require_number(ch["transmittance"], "channel.transmittance");
        if (ch.contains("excess_noise")) cfg.excess_noise = require_number(ch["excess_noise"], "channel.excess_noise");
    }
    if (root.contains("modulation")) {
        const json& m = root["modulation"];
        check_keys(m, "modulation", {"variance"});
        if (m.contains("variance")) cfg.variance = require_number(m["variance"], "modulation.variance");
    }
    if (root.contains("protocol")) {
        const json& p = root["protocol"];
        check_keys(p, "protocol", {"n", "d", "beta"});
        if (p.contains("n")) cfg.n = require_number(p["n"], "protocol.n");
        if (p.contains("d")) cfg.d = static_cast<int>(require_number(p["d"], "protocol.d"));
        if (p.contains("beta")) cfg.beta = require_number(p["beta"], "protocol.beta");
    }
    if (root.contains("budget")) {
        const json& b = root["budget"];
        check_keys(b, "budget", {"eps_sm", "eps_bar", "eps_pe", "eps_cor", "eps_ent", "eps"});
        if (b.contains("eps_sm")) cfg.budget.eps_sm = require_number(b["eps_sm"], "budget.eps_sm");
        if (b.contains("eps_bar")) cfg.budget.eps_bar = require_number(b["eps_bar"], "budget.eps_bar");
        if (b.contains("eps_pe")) cfg.budget.eps_pe = require_number(b["eps_pe"], "budget.eps_pe");
        if (b.contains("eps_cor")) cfg.budget.eps_cor = require_number(b["eps_cor"], "budget.eps_cor");
        if (b.contains("eps_ent")) cfg.budget.eps_ent = require_number(b["eps_ent"], "budget.eps_ent");
        if (b.contains("eps")) cfg.budget.eps = require_number(b["eps"], "budget.eps");
    }
    if (root.contains("eps_rob_target")) cfg.eps_rob = require_number(root["eps_rob_target"], "eps_rob_target");
    if (root.contains("threshold_sigmas")) cfg.threshold_sigmas = require_number(root["threshold_sigmas"], "threshold_sigmas");
    if (root.contains("v_grid")) {
        const json& g = root["v_grid"];
        check_keys(g, "v_grid", {"points", "v_minus_one_min", "v_minus_one_max"});
        if (g.contains("points")) cfg.grid.points = static_cast<int>(require_number(g["points"], "v_grid.points"));
        if (g.contains("v_minus_one_min")) cfg.grid.v_minus_one_min = require_number(g["v_minus_one_min"], "v_grid.v_minus_one_min");
        if (g.contains("v_minus_one_max")) cfg.grid.v_minus_one_max = require_number(g["v_minus_one_max"], "v_grid.v_minus_one_max");
    }
    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        check_keys(s, "sweep", {"distances_km", "n_values"});
        if (s.contains("distances_km")) {
            if (!s["distances_km"].is_array()) throw ConfigError("sweep.distances_km must be an array");
            cfg.sweep_distances = s["distances_km"].get<std::vector<double>>();
        }
        if (s.contains("n_values")) {
            if (!s["n_values"].is_array()) throw ConfigError("sweep.n_values must be an array");
            cfg.sweep_n = s["n_values"].get<std::vector<double>>();
        }
    }
    if (root.contains("simulate")) {
        const json& s = root["simulate"];
        check_keys(s, "simulate", {"trials"});
        if (s.contains("trials")) cfg.trials = static_cast<std::uint64_t>(require_number(s["trials"], "simulate.trials"));
    }
    if (root.contains("bounds")) {
        const json& b = root["bounds"];
        check_keys(b, "bounds", {"suite", "trials", "eps_values", "bound_scale"});
        if (b.contains("suite")) {
            if (!b["suite"].is_array()) throw ConfigError("bounds.suite must be an array of names");
            cfg.suite = b["suite"].get<std::vector<std::string>>();
        }
        if (b.contains("trials")) cfg.bound_trials = static_cast<std::uint64_t>(require_number(b["trials"], "bounds.trials"));
        if (b.contains("eps_values")) {
            if (!b["eps_values"].is_array()) throw ConfigError("bounds.eps_values must be an array");
            cfg.eps_values = b["eps_values"].get<std::vector<double>>();
        }
        if (b.contains("bound_scale")) cfg.bound_scale = require_number(b["bound_scale"], "bounds.bound_scale");
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) throw ConfigError("seed must be an unsigned integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    return cfg;
}

CliConfig load_config(const std::string& explicit_path) {
    std::string path = explicit_path;
    if (path.empty()) {
        if (const char* env = std::getenv("CVQKD_CONFIG")) path = env;
    }
    if (path.empty()) return CliConfig{};
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    return parse_config(root);
}

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + out_path);
    out << content;
}

struct RateRow {
    double distance_km;
    double n;
    double v;
    cvqkd::KeyRateReport report;
    double asymptotic_rate;
};

json row_to_json(const RateRow& row) {
    json j = row.report;
    j["distance_km"] = row.distance_km;
    j["n"] = row.n;
    j["v"] = row.v;
    j["asymptotic_rate"] = row.asymptotic_rate;
    return j;
}

const char* kCsvHeader =
    "distance_km,n,v,rate,key_length,entropy_term,holevo_term,leak_ec,delta_aep,delta_ent,"
    "pa_term,asymptotic_rate,abort_reason\n";

std::string row_to_csv(const RateRow& row) {
    const auto& r = row.report;
    std::string line;
    for (double v : {row.distance_km, row.n, row.v, r.rate, r.key_length,
                     r.breakdown.entropy_term, r.breakdown.holevo_term, r.breakdown.leak_ec,
                     r.breakdown.delta_aep, r.breakdown.delta_ent, r.breakdown.pa_term,
                     row.asymptotic_rate}) {
        line += fmt(v);
        line += ',';
    }
    line += r.abort_reason.empty() ? "ok" : r.abort_reason;
    line += '\n';
    return line;
}

RateRow evaluate_point(const CliConfig& cfg, double distance_km, double n) {
    cvqkd::ChannelModel ch;
    ch.transmittance = cvqkd::transmittance_from_km(distance_km, cfg.loss_db_per_km);
    ch.excess_noise = cfg.excess_noise;
    RateRow row{};
    row.distance_km = distance_km;
    row.n = n;
    if (cfg.variance) {
        row.v = *cfg.variance;
        row.report = cvqkd::expected_key_rate(ch, cvqkd::Modulation{row.v}, n, cfg.d, cfg.beta,
                                              cfg.budget, cfg.eps_rob, cfg.threshold_sigmas);
        row.asymptotic_rate =
            cvqkd::asymptotic_key_rate(ch, cvqkd::Modulation{row.v}, cfg.beta, cfg.eps_rob);
    } else {
        auto [v, report] = cvqkd::optimize_modulation(ch, n, cfg.d, cfg.beta, cfg.budget,
                                                      cfg.eps_rob, cfg.grid, cfg.threshold_sigmas);
        row.v = v;
        row.report = report;
        row.asymptotic_rate =
            cvqkd::optimize_asymptotic_rate(ch, cfg.beta, cfg.eps_rob, cfg.grid).second;
    }
    return row;
}

int cmd_keyrate(const CliConfig& cfg, const std::string& out_path, const std::string& format) {
    if (!cfg.n) throw ConfigError("keyrate requires protocol.n");
    cfg.budget.validate();
    // Single-point evaluation: the channel comes from transmittance when
    // explicitly configured, else from the distance.
    cvqkd::ChannelModel ch = cfg.channel();
    RateRow row{};
    row.distance_km = cfg.distance_km;
    row.n = *cfg.n;
    if (cfg.variance) {
        row.v = *cfg.variance;
        row.report = cvqkd::expected_key_rate(ch, cvqkd::Modulation{row.v}, row.n, cfg.d,
                                              cfg.beta, cfg.budget, cfg.eps_rob,
                                              cfg.threshold_sigmas);
        row.asymptotic_rate =
            cvqkd::asymptotic_key_rate(ch, cvqkd::Modulation{row.v}, cfg.beta, cfg.eps_rob);
    } else {
        auto [v, report] = cvqkd::optimize_modulation(ch, row.n, cfg.d, cfg.beta, cfg.budget,
                                                      cfg.eps_rob, cfg.grid,
                                                      cfg.threshold_sigmas);
        row.v = v;
        row.report = report;
        row.asymptotic_rate =
            cvqkd::optimize_asymptotic_rate(ch, cfg.beta, cfg.eps_rob, cfg.grid).second;
    }
    std::cout << row_to_json(row).dump(2) << "\n";
    if (!out_path.empty()) {
        if (format == "csv") {
            write_output(out_path, std::string(kCsvHeader) + row_to_csv(row));
        } else {
            write_output(out_path, row_to_json(row).dump(2) + "\n");
        }
    }
    return 0;
}

int cmd_sweep(const CliConfig& cfg, const std::string& out_path, const std::string& format) {
    if (cfg.sweep_distances.empty() || cfg.sweep_n.empty()) {
        throw ConfigError("sweep requires nonempty sweep.distances_km and sweep.n_values");
    }
    cfg.budget.validate();
    std::vector<std::pair<double, double>> cells;
    for (double km : cfg.sweep_distances)
        for (double n : cfg.sweep_n) cells.emplace_back(km, n);
    std::sort(cells.begin(), cells.end());
    std::vector<RateRow> rows(cells.size());
    cvqkd::parallel_fill(rows, [&](std::size_t i) {
        return evaluate_point(cfg, cells[i].first, cells[i].second);
    });
    if (format == "json") {
        json arr = json::array();
        for (const auto& row : rows) arr.push_back(row_to_json(row));
        write_output(out_path, arr.dump(2) + "\n");
    } else {
        std::string csv = kCsvHeader;
        for (const auto& row : rows) csv += row_to_csv(row);
        write_output(out_path, csv);
    }
    return 0;
}

int cmd_simulate(const CliConfig& cfg, const std::string& out_path) {
    if (!cfg.n) throw ConfigError("simulate requires protocol.n");
    if (!cfg.variance) throw ConfigError("simulate requires modulation.variance");
    if (cfg.trials < 1) throw ConfigError("simulate requires simulate.trials >= 1");
    cvqkd::TrialConfig trial;
    trial.seed = cfg.seed;
    trial.n = static_cast<std::size_t>(*cfg.n);
    trial.d = cfg.d;
    trial.channel = cfg.channel();
    trial.modulation = cvqkd::Modulation{*cfg.variance};
    trial.beta = cfg.beta;
    trial.budget = cfg.budget;
    trial.thresholds = cvqkd::pe_thresholds(trial.channel, trial.modulation,
                                            static_cast<double>(trial.n), cfg.budget.eps_pe,
                                            cfg.threshold_sigmas);
    trial.validate();

    std::vector<cvqkd::TrialOutcome> outcomes(cfg.trials);
    cvqkd::parallel_fill(outcomes, [&](std::size_t i) {
        cvqkd::TrialConfig t = trial;
        t.seed = cvqkd::derive_seed(cfg.seed, i);
        return cvqkd::run_trial(t);
    });

    std::string records;
    std::uint64_t aborts = 0;
    double sum_entropy = 0.0, sum_length = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& out = outcomes[i];
        records += cvqkd::trial_record(cvqkd::derive_seed(cfg.seed, i), out).dump();
        records += '\n';
        if (out.aborted()) ++aborts;
        sum_entropy += out.empirical_entropy;
        sum_length += static_cast<double>(out.key_length);
    }
    const double freq = static_cast<double>(aborts) / static_cast<double>(cfg.trials);
    json summary = {
        {"trials", cfg.trials},
        {"robustness",
         {{"abort_frequency", freq},
          {"standard_error", cvqkd::binomial_stderr(freq, cfg.trials)}}},
        {"mean_empirical_entropy", sum_entropy / static_cast<double>(cfg.trials)},
        {"mean_key_length", sum_length / static_cast<double>(cfg.trials)},
        {"thresholds",
         {{"sigma_a_max", trial.thresholds.sigma_a_max},
          {"sigma_b_max", trial.thresholds.sigma_b_max},
          {"sigma_c_min", trial.thresholds.sigma_c_min}}}};
    if (out_path.empty()) {
        std::cout << records << summary.dump(2) << "\n";
    } else {
        write_output(out_path, records);
        std::cout << summary.dump(2) << "\n";
    }
    return 0;
}

int cmd_verify_bounds(const CliConfig& cfg, const std::string& out_path) {
    std::vector<cvqkd::BoundCheckReport> reports;
    try {
        reports = cvqkd::run_suite(cfg.suite, cfg.bound_trials, cfg.seed, cfg.eps_values,
                                   cfg.bound_scale);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    json arr = json::array();
    bool any_violated = false;
    for (const auto& r : reports) {
        arr.push_back(r);
        any_violated = any_violated || r.violated;
    }
    write_output(out_path, arr.dump(2) + "\n");
    return any_violated ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Composable finite-size key rates and protocol simulation for "
                 "coherent-state CV-QKD over a Gaussian channel"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format;
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--config", config_path, "JSON configuration file (env CVQKD_CONFIG)");
    app.add_option("--seed", seed_flag, "Master seed (overrides config)");
    app.add_option("--out", out_path, "Output file path (default stdout)");
    app.add_option("--format", format, "Output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* keyrate = app.add_subcommand("keyrate", "Single-point expected key rate");
    auto* sweep = app.add_subcommand("sweep", "Key-rate sweep over distance and block size");
    auto* simulate = app.add_subcommand("simulate", "Seeded Monte Carlo protocol batch");
    auto* verify = app.add_subcommand("verify-bounds", "Concentration-bound verification suite");
    for (CLI::App* sub : {keyrate, sweep, simulate, verify}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        CliConfig cfg = load_config(config_path);
        if (seed_flag) cfg.seed = *seed_flag;
        if (keyrate->parsed()) return cmd_keyrate(cfg, out_path, format.empty() ? "json" : format);
        if (sweep->parsed()) return cmd_sweep(cfg, out_path, format.empty() ? "csv" : format);
        if (simulate->parsed()) return cmd_simulate(cfg, out_path);
        if (verify->parsed()) return cmd_verify_bounds(cfg, out_path);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
