// Batch front end: load a scenario file, run analytic / asymptotic / Monte
// Carlo sweeps over the optical mean SNR, and emit curve data as CSV or JSON.
//
// Conventions shared by every subcommand:
//   - sweep axes are in dB, all internal math is linear;
//   - one output row per grid point, columns (gamma_h_db, exact, asymptotic,
//     mc_estimate, mc_stderr, status), empty cell = evaluator not requested;
//   - a row-level evaluator failure is recorded in the status column and the
//     sweep continues (long sweeps must survive isolated failures);
//   - exit 0 on success, 1 for configuration/usage problems, 2 when any row
//     recorded an evaluator failure (or mc-validate found a disagreement);
//   - numbers are printed with enough digits to round-trip exactly;
//   - fixed seed => bitwise identical output, whatever the worker count.
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <linkperf/config_io.hpp>
#include <linkperf/e2e_metrics.hpp>
#include <linkperf/monte_carlo.hpp>

namespace {

using namespace linkperf;

// ---------------------------------------------------------------------------
// Shared options and small parsers
// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string config_path = "examples/table2.json";
    std::string user = "R";
    std::string detection;  // empty = take detection_r from the config file
    std::string grid = "20:60:2";
    std::string evaluators = "exact";
    std::string output;  // empty = stdout
    std::string format = "csv";
    std::uint64_t seed = 1;
    std::size_t samples = 1'000'000;
    unsigned workers = 0;  // 0 = LINKPERF_THREADS env var, then hardware
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_grid = true)
{
    cmd->add_option("-c,--config", o.config_path,
                    "Scenario file (JSON, see examples/config.schema.json)")
        ->capture_default_str();
    cmd->add_option("-u,--user", o.user, "Served side: T or R")
        ->capture_default_str();
    cmd->add_option("-d,--detection", o.detection,
                    "Detection override: heterodyne or imdd (default: config)");
    if (with_grid)
        cmd->add_option("-g,--grid", o.grid, "Mean optical SNR grid, dB: start:stop:step")
            ->capture_default_str();
    cmd->add_option("-o,--output", o.output, "Output file (default: stdout)");
    cmd->add_option("-f,--format", o.format, "Output format: csv or json")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Monte Carlo seed")->capture_default_str();
    cmd->add_option("--samples", o.samples, "Monte Carlo samples per grid point")
        ->capture_default_str();
    cmd->add_option("--workers", o.workers,
                    "Worker threads (0 = LINKPERF_THREADS env var, then hardware)");
}

unsigned resolve_workers(unsigned flag)
{
    if (flag > 0) return flag;
    if (const char* env = std::getenv("LINKPERF_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::vector<double> parse_grid(const std::string& spec)
{
    double start = 0.0, stop = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3)
        throw ConfigError({"grid: expected start:stop:step, got '" + spec + "'"});
    if (!(step > 0.0)) throw ConfigError({"grid: step must be positive"});
    if (stop < start)
        throw ConfigError({"grid is empty: stop " + std::to_string(stop) +
                           " dB lies below start " + std::to_string(start) + " dB"});
    std::vector<double> db;
    const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) db.push_back(start + step * i);
    return db;
}

struct EvaluatorSet {
    bool exact = false, asymptotic = false, mc = false;
};

EvaluatorSet parse_evaluators(const std::string& spec)
{
    EvaluatorSet s;
    std::string item;
    std::stringstream ss(spec);
    while (std::getline(ss, item, ',')) {
        if (item == "exact") s.exact = true;
        else if (item == "asymptotic") s.asymptotic = true;
        else if (item == "mc") s.mc = true;
        else if (!item.empty())
            throw ConfigError({"unknown evaluator '" + item +
                               "' (choose from exact, asymptotic, mc)"});
    }
    if (!s.exact && !s.asymptotic && !s.mc)
        throw ConfigError({"at least one evaluator is required"});
    return s;
}

UserSide parse_user(const std::string& u)
{
    if (u == "T" || u == "t") return UserSide::Transmission;
    if (u == "R" || u == "r") return UserSide::Reflection;
    throw ConfigError({"user must be T or R, got '" + u + "'"});
}

ScenarioConfig load_config(const CommonOpts& o)
{
    ScenarioConfig cfg = load_scenario_file(o.config_path);
    if (!o.detection.empty()) {
        if (o.detection == "heterodyne") cfg.detection_r = 1;
        else if (o.detection == "imdd") cfg.detection_r = 2;
        else
            throw ConfigError({"detection must be heterodyne or imdd, got '" +
                               o.detection + "'"});
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Output writers
// ---------------------------------------------------------------------------

struct Row {
    double gamma_h_db = 0.0;
    std::optional<double> exact, asymptotic, mc_estimate, mc_stderr;
    std::string status = "ok";
};

std::string full(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? full(*v) : ""; }

void write_rows(const CommonOpts& o, const std::string& metric, int detection_r,
                const std::vector<Row>& rows)
{
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!o.output.empty()) {
        file.open(o.output);
        if (!file) throw ConfigError({"cannot write output file: " + o.output});
        out = &file;
    }
    if (o.format == "csv") {
        *out << "gamma_h_db,exact,asymptotic,mc_estimate,mc_stderr,status\n";
        for (const auto& r : rows)
            *out << full(r.gamma_h_db) << ',' << cell(r.exact) << ','
                 << cell(r.asymptotic) << ',' << cell(r.mc_estimate) << ','
                 << cell(r.mc_stderr) << ',' << r.status << '\n';
    } else if (o.format == "json") {
        nlohmann::ordered_json doc;
        doc["schema_version"] = 1;
        doc["metric"] = metric;
        doc["user"] = o.user;
        doc["detection_r"] = detection_r;
        doc["config"] = o.config_path;
        doc["seed"] = o.seed;
        doc["samples"] = o.samples;
        doc["rows"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json jr;
            jr["gamma_h_db"] = r.gamma_h_db;
            jr["exact"] = r.exact ? nlohmann::ordered_json(*r.exact) : nullptr;
            jr["asymptotic"] =
                r.asymptotic ? nlohmann::ordered_json(*r.asymptotic) : nullptr;
            jr["mc_estimate"] =
                r.mc_estimate ? nlohmann::ordered_json(*r.mc_estimate) : nullptr;
            jr["mc_stderr"] =
                r.mc_stderr ? nlohmann::ordered_json(*r.mc_stderr) : nullptr;
            jr["status"] = r.status;
            doc["rows"].push_back(std::move(jr));
        }
        *out << doc.dump(2) << '\n';
    } else {
        throw ConfigError({"format must be csv or json, got '" + o.format + "'"});
    }
    if (!o.output.empty())
        std::printf("%s: %zu point(s) -> %s\n", metric.c_str(), rows.size(),
                    o.output.c_str());
}

// Run `job(i)` for every row index across a pool; rows land by index, so the
// output order never depends on scheduling.
void dispatch(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job)
{
    const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            job(i);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < w; ++t) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Metric sweeps
// ---------------------------------------------------------------------------

enum class Metric { Outage, ErrorRate, Capacity, Moment };

const char* metric_name(Metric m)
{
    switch (m) {
        case Metric::Outage: return "op";
        case Metric::ErrorRate: return "ber";
        case Metric::Capacity: return "capacity";
        default: return "moments";
    }
}

int run_metric_sweep(Metric metric, const CommonOpts& o,
                     const std::string& modulation, double order)
{
    const ScenarioConfig cfg = load_config(o);
    const UserSide side = parse_user(o.user);
    const E2EParams e = derive_e2e(cfg, side);
    const EvaluatorSet ev = parse_evaluators(o.evaluators);
    const std::vector<double> grid = parse_grid(o.grid);

    if (ev.asymptotic && (metric == Metric::Capacity || metric == Metric::Moment))
        throw ConfigError({std::string("no high-SNR expansion is implemented for ") +
                           metric_name(metric) + " sweeps; use exact and/or mc"});
    if (metric == Metric::Moment && ev.mc && order != 1.0)
        throw ConfigError({"mc evaluates the first SNR moment only (order 1)"});

    ModulationScheme scheme;
    const ModulationScheme* mod = nullptr;
    if (metric == Metric::ErrorRate) {
        scheme = modulation_scheme(modulation);
        if (scheme.r != e.r)
            throw ConfigError({"modulation '" + scheme.name + "' assumes detection order " +
                               std::to_string(scheme.r) + " but the scenario uses " +
                               std::to_string(e.r)});
        mod = &scheme;
    }

    // One simulator shared across rows; run() is const and thread-safe.
    std::optional<ChainSimulator> sim;
    if (ev.mc) sim.emplace(e, mod);

    const unsigned workers = resolve_workers(o.workers);
    const unsigned mc_threads = std::max(
        1u, workers / std::max(1u, std::min<unsigned>(
                          workers, static_cast<unsigned>(grid.size()))));

    std::vector<Row> rows(grid.size());
    std::atomic<bool> any_error{false};
    dispatch(grid.size(), workers, [&](std::size_t i) {
        Row& row = rows[i];
        row.gamma_h_db = grid[i];
        const double gbar = std::pow(10.0, grid[i] / 10.0);
        try {
            if (ev.exact) {
                switch (metric) {
                    case Metric::Outage: row.exact = outage_probability(gbar, e); break;
                    case Metric::ErrorRate: row.exact = avg_ber(*mod, gbar, e); break;
                    case Metric::Capacity: row.exact = ergodic_capacity(gbar, e); break;
                    case Metric::Moment: row.exact = snr_moment(order, gbar, e); break;
                }
            }
            if (ev.asymptotic) {
                row.asymptotic = metric == Metric::Outage
                                     ? outage_probability_asymptotic(gbar, e)
                                     : avg_ber_asymptotic(*mod, gbar, e);
            }
            if (ev.mc) {
                const auto res = sim->run(gbar, {o.seed, o.samples, mc_threads},
                                          static_cast<std::uint32_t>(i));
                const McEstimate* est = nullptr;
                switch (metric) {
                    case Metric::Outage: est = &res.outage; break;
                    case Metric::ErrorRate: est = &res.error_rate; break;
                    case Metric::Capacity: est = &res.capacity; break;
                    case Metric::Moment: est = &res.mean_snr; break;
                }
                row.mc_estimate = est->value;
                row.mc_stderr = est->std_error;
                if (est->undersampled) row.status = "undersampled";
            }
        } catch (const std::exception& ex) {
            row.status = std::string("error: ") + ex.what();
            any_error = true;
        }
    });

    write_rows(o, metric_name(metric), cfg.detection_r, rows);
    return any_error ? 2 : 0;
}

// ---------------------------------------------------------------------------
// validate: full load + derived-quantity report
// ---------------------------------------------------------------------------

int run_validate(const CommonOpts& o)
{
    const ScenarioConfig cfg = load_config(o);
    const LinkGeometry g = derive_geometry(cfg);
    std::printf("config OK: %s\n", o.config_path.c_str());
    std::printf("geometry [m]: source->relay %.6g, relay->station %.6g, "
                "station->surface %.6g, surface->T %.6g, surface->R %.6g\n",
                g.d_oh, g.d_he, g.d_es, g.d_st, g.d_sr);

    const E2EParams et = derive_e2e(cfg, UserSide::Transmission);
    const E2EParams er = derive_e2e(cfg, UserSide::Reflection);
    const FsoParams& f = et.fso;
    std::printf("optical: rytov_var %.6g (up %.3g, down %.3g)\n", f.rytov_var,
                f.rytov_up, f.rytov_down);
    std::printf("optical: alpha %.10g, beta %.10g (single-aperture %.6g, %.6g), "
                "detection order r = %d\n",
                f.alpha, f.beta, f.alpha_tilde, f.beta_tilde, f.r);
    std::printf("pointing: a0 %.10g, q_g %.10g, varpi %.10g, h_p %.10g, "
                "series depth %d, norm %.10g\n",
                f.a0, f.q_g, f.varpi, f.h_p, f.k_f, f.nf_norm);
    for (const E2EParams* e : {&et, &er}) {
        const auto& rf = e->rf;
        std::printf("%s user: k %.10g, m %.10g, psi %.6g (%s), "
                    "mean RF SNR %.6g dB%s, path loss %.6g dB\n",
                    user_side_name(e->user), rf.fit.k, rf.fit.m, rf.fit.psi,
                    fit_mode_name(rf.fit.mode),
                    10.0 * std::log10(rf.mean_snr),
                    rf.budget.overridden ? " (budget override)" : "",
                    rf.budget.path_loss_db);
        std::printf("%s user: gain scale K %.10g, kernel argument %.10g, "
                    "threshold %.6g dB\n",
                    user_side_name(e->user), e->k_gain, e->x_rf,
                    10.0 * std::log10(e->gamma_th));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// mc-validate: closed forms against the sampler, every metric, every point
// ---------------------------------------------------------------------------

int run_mc_validate(const CommonOpts& o, const std::string& modulation)
{
    const ScenarioConfig cfg = load_config(o);
    const UserSide side = parse_user(o.user);
    const E2EParams e = derive_e2e(cfg, side);
    const std::vector<double> grid = parse_grid(o.grid);

    // Scheme follows the detection order unless named explicitly.
    const std::string mod_name =
        !modulation.empty() ? modulation : (e.r == 1 ? "bpsk" : "ook");
    const ModulationScheme scheme = modulation_scheme(mod_name);
    if (scheme.r != e.r)
        throw ConfigError({"modulation '" + scheme.name +
                           "' does not match detection order " + std::to_string(e.r)});
    const ChainSimulator sim(e, &scheme);

    struct CheckRow {
        double gamma_h_db;
        const char* metric;
        double exact, mc, se, pull;
        std::string status;
    };
    const unsigned workers = resolve_workers(o.workers);
    const unsigned mc_threads = std::max(
        1u, workers / std::max(1u, std::min<unsigned>(
                          workers, static_cast<unsigned>(grid.size()))));
    std::vector<std::array<CheckRow, 4>> table(grid.size());
    std::atomic<bool> any_mismatch{false}, any_error{false};

    dispatch(grid.size(), workers, [&](std::size_t i) {
        const double db = grid[i];
        const double gbar = std::pow(10.0, db / 10.0);
        try {
            const auto res = sim.run(gbar, {o.seed, o.samples, mc_threads},
                                     static_cast<std::uint32_t>(i));
            const double ex_op = outage_probability(gbar, e);
            const double ex_ber = avg_ber(scheme, gbar, e);
            const double ex_cap = ergodic_capacity(gbar, e);
            const double ex_m1 = snr_moment(1.0, gbar, e);
            const std::array<std::pair<const char*, std::pair<double, McEstimate>>, 4>
                checks = {{{"op", {ex_op, res.outage}},
                           {"ber", {ex_ber, res.error_rate}},
                           {"capacity", {ex_cap, res.capacity}},
                           {"mean_snr", {ex_m1, res.mean_snr}}}};
            for (std::size_t k = 0; k < checks.size(); ++k) {
                const auto& [name, pair] = checks[k];
                const auto& [exact, est] = pair;
                CheckRow row{db, name, exact, est.value, est.std_error, 0.0, "ok"};
                if (est.undersampled || !(est.std_error > 0.0)) {
                    row.status = "undersampled";
                } else {
                    row.pull = (est.value - exact) / est.std_error;
                    if (std::fabs(row.pull) > 3.0) {
                        row.status = "mismatch";
                        any_mismatch = true;
                    }
                }
                table[i][k] = std::move(row);
            }
        } catch (const std::exception& ex) {
            for (std::size_t k = 0; k < 4; ++k)
                table[i][k] = {db, "-", 0.0, 0.0, 0.0, 0.0,
                               std::string("error: ") + ex.what()};
            any_error = true;
        }
    });

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!o.output.empty()) {
        file.open(o.output);
        if (!file) throw ConfigError({"cannot write output file: " + o.output});
        out = &file;
    }
    std::size_t checked = 0, flagged = 0;
    if (o.format == "json") {
        nlohmann::ordered_json doc;
        doc["schema_version"] = 1;
        doc["metric"] = "mc-validate";
        doc["user"] = o.user;
        doc["modulation"] = scheme.name;
        doc["seed"] = o.seed;
        doc["samples"] = o.samples;
        doc["rows"] = nlohmann::ordered_json::array();
        for (const auto& group : table)
            for (const auto& r : group) {
                doc["rows"].push_back({{"gamma_h_db", r.gamma_h_db},
                                       {"metric", r.metric},
                                       {"exact", r.exact},
                                       {"mc_estimate", r.mc},
                                       {"mc_stderr", r.se},
                                       {"pull", r.pull},
                                       {"status", r.status}});
            }
        *out << doc.dump(2) << '\n';
    } else {
        *out << "gamma_h_db,metric,exact,mc_estimate,mc_stderr,pull,status\n";
        for (const auto& group : table)
            for (const auto& r : group)
                *out << full(r.gamma_h_db) << ',' << r.metric << ',' << full(r.exact)
                     << ',' << full(r.mc) << ',' << full(r.se) << ',' << full(r.pull)
                     << ',' << r.status << '\n';
    }
    for (const auto& group : table)
        for (const auto& r : group) {
            ++checked;
            if (r.status == "mismatch" || r.status.rfind("error", 0) == 0) ++flagged;
        }
    std::fprintf(stderr, "mc-validate: %zu check(s), %zu flagged\n", checked, flagged);
    return any_error || any_mismatch ? 2 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Closed-form and Monte Carlo performance engine for the "
                 "optical-feeder / dual-surface radio downlink"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string modulation = "bpsk";
    std::string mcv_modulation;  // mc-validate picks by detection order if empty
    double moment_order = 1.0;

    CLI::App* validate = app.add_subcommand(
        "validate", "Check a scenario file and print the derived parameters");
    add_common(validate, common, false);

    CLI::App* op = app.add_subcommand("op-sweep", "Outage probability sweep");
    op->alias("op");
    add_common(op, common);
    op->add_option("-e,--evaluators", common.evaluators,
                   "Comma list of exact, asymptotic, mc")
        ->capture_default_str();

    CLI::App* ber = app.add_subcommand("ber-sweep", "Average bit error rate sweep");
    ber->alias("ber");
    add_common(ber, common);
    ber->add_option("-e,--evaluators", common.evaluators,
                    "Comma list of exact, asymptotic, mc")
        ->capture_default_str();
    ber->add_option("-m,--modulation", modulation,
                    "bpsk, 16psk, 16qam, 64qam (coherent) or ook (intensity)")
        ->capture_default_str();

    CLI::App* cap = app.add_subcommand("capacity-sweep", "Ergodic capacity sweep [nats]");
    cap->alias("capacity");
    add_common(cap, common);
    cap->add_option("-e,--evaluators", common.evaluators, "Comma list of exact, mc")
        ->capture_default_str();

    CLI::App* mom = app.add_subcommand("moments", "SNR moment sweep");
    add_common(mom, common);
    mom->add_option("-e,--evaluators", common.evaluators, "Comma list of exact, mc")
        ->capture_default_str();
    mom->add_option("--order", moment_order, "Moment order (positive real)")
        ->capture_default_str();

    CLI::App* div = app.add_subcommand(
        "diversity", "Print the high-SNR diversity order (single scalar)");
    add_common(div, common, false);

    CLI::App* mcv = app.add_subcommand(
        "mc-validate", "Check every closed-form metric against Monte Carlo");
    add_common(mcv, common);
    mcv->add_option("-m,--modulation", mcv_modulation,
                    "Scheme for the error-rate check (default: by detection order)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage problems are configuration errors
    }

    try {
        if (validate->parsed()) return run_validate(common);
        if (op->parsed()) return run_metric_sweep(Metric::Outage, common, "", 0.0);
        if (ber->parsed())
            return run_metric_sweep(Metric::ErrorRate, common, modulation, 0.0);
        if (cap->parsed()) return run_metric_sweep(Metric::Capacity, common, "", 0.0);
        if (mom->parsed())
            return run_metric_sweep(Metric::Moment, common, "", moment_order);
        if (div->parsed()) {
            const ScenarioConfig cfg = load_config(common);
            const E2EParams e = derive_e2e(cfg, parse_user(common.user));
            std::printf("%.17g\n", diversity_order(e));
            return 0;
        }
        if (mcv->parsed()) return run_mc_validate(common, mcv_modulation);
    } catch (const ConfigError& e) {
        for (const auto& d : e.details())
            std::fprintf(stderr, "error: %s\n", d.c_str());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "evaluator failure: %s\n", e.what());
        return 2;
    }
    return 0;
}
