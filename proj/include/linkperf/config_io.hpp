// JSON configuration: one key per scenario field, everything explicit.
//
// A config file is the record of a numerical experiment, so the loader is
// deliberately strict: every field must be present (no silent defaults), no
// unknown keys (typos fail loudly instead of being ignored), and the physical
// invariants are checked before anything downstream sees the struct.  All
// problems in a file are reported together, not one per run.
//
// The machine-readable schema with units lives in examples/config.schema.json;
// the reference scenario ships as examples/table2.json.
#ifndef LINKPERF_CONFIG_IO_HPP
#define LINKPERF_CONFIG_IO_HPP

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scenario.hpp"

namespace linkperf {

// Bumped whenever a key is added, removed, or changes meaning; files declare
// the version they were written against.
inline constexpr int config_schema_version = 1;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> details)
        : std::runtime_error(join(details)), details_(std::move(details))
    {
    }
    const std::vector<std::string>& details() const { return details_; }

private:
    static std::string join(const std::vector<std::string>& d)
    {
        std::string msg = "invalid configuration:";
        for (const auto& line : d) msg += "\n  - " + line;
        return msg;
    }
    std::vector<std::string> details_;
};

namespace detail {

struct DoubleField {
    const char* key;
    double ScenarioConfig::* member;
    // Only the phase-front radius may be infinite (collimated beam); JSON has
    // no infinity literal, so that one field round-trips as the string "inf".
    bool allow_inf = false;
};

struct IntField {
    const char* key;
    int ScenarioConfig::* member;
};

inline const std::vector<DoubleField>& double_fields()
{
    static const std::vector<DoubleField> v = {
        {"h_o", &ScenarioConfig::h_o},
        {"h_h", &ScenarioConfig::h_h},
        {"h_e", &ScenarioConfig::h_e},
        {"h_s", &ScenarioConfig::h_s},
        {"h_t", &ScenarioConfig::h_t},
        {"h_r", &ScenarioConfig::h_r},
        {"d_es0", &ScenarioConfig::d_es0},
        {"d_st0", &ScenarioConfig::d_st0},
        {"d_sr0", &ScenarioConfig::d_sr0},
        {"zeta1", &ScenarioConfig::zeta1},
        {"zeta2", &ScenarioConfig::zeta2},
        {"phi_r", &ScenarioConfig::phi_r},
        {"theta_rl", &ScenarioConfig::theta_rl},
        {"wavelength", &ScenarioConfig::wavelength},
        {"w0", &ScenarioConfig::w0},
        {"waist_target_over_aperture", &ScenarioConfig::waist_target_over_aperture},
        {"f0", &ScenarioConfig::f0, true},
        {"aperture", &ScenarioConfig::aperture},
        {"wind_rms", &ScenarioConfig::wind_rms},
        {"hv_nominal", &ScenarioConfig::hv_nominal},
        {"absorption", &ScenarioConfig::absorption},
        {"reflect_eff", &ScenarioConfig::reflect_eff},
        {"sigma_s", &ScenarioConfig::sigma_s},
        {"sigma_r", &ScenarioConfig::sigma_r},
        {"sigma_l", &ScenarioConfig::sigma_l},
        {"m_a", &ScenarioConfig::m_a},
        {"m_t", &ScenarioConfig::m_t},
        {"m_r", &ScenarioConfig::m_r},
        {"omega_a", &ScenarioConfig::omega_a},
        {"omega_l", &ScenarioConfig::omega_l},
        {"rho_t", &ScenarioConfig::rho_t},
        {"rho_r", &ScenarioConfig::rho_r},
        {"sigma2_r", &ScenarioConfig::sigma2_r},
        {"p_r_db", &ScenarioConfig::p_r_db},
        {"f_ghz", &ScenarioConfig::f_ghz},
        {"g_tx_db", &ScenarioConfig::g_tx_db},
        {"g_rx_db", &ScenarioConfig::g_rx_db},
        {"relay_gain_c", &ScenarioConfig::relay_gain_c},
        {"gamma_th_db", &ScenarioConfig::gamma_th_db},
    };
    return v;
}

inline const std::vector<IntField>& int_fields()
{
    static const std::vector<IntField> v = {
        {"k_f", &ScenarioConfig::k_f},
        {"n_f", &ScenarioConfig::n_f},
        {"n_r", &ScenarioConfig::n_r},
        {"detection_r", &ScenarioConfig::detection_r},
    };
    return v;
}

} // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
    std::vector<std::string> bad;
    if (!j.is_object()) throw ConfigError({"top level must be a JSON object"});

    std::set<std::string> known = {"schema_version", "gamma_r_override_db"};
    for (const auto& f : detail::double_fields()) known.insert(f.key);
    for (const auto& f : detail::int_fields()) known.insert(f.key);
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            bad.push_back("unknown key: " + item.key());

    if (!j.contains("schema_version")) {
        bad.push_back("missing key: schema_version");
    } else if (!j.at("schema_version").is_number_integer() ||
               j.at("schema_version").get<int>() != config_schema_version) {
        bad.push_back("schema_version: this reader understands version " +
                      std::to_string(config_schema_version));
    }

    ScenarioConfig c;
    for (const auto& f : detail::double_fields()) {
        if (!j.contains(f.key)) {
            bad.push_back(std::string("missing key: ") + f.key);
            continue;
        }
        const auto& v = j.at(f.key);
        if (v.is_number()) {
            c.*f.member = v.get<double>();
        } else if (f.allow_inf && v.is_string() && v.get<std::string>() == "inf") {
            c.*f.member = std::numeric_limits<double>::infinity();
        } else {
            bad.push_back(std::string(f.key) + ": expected a number" +
                          (f.allow_inf ? " or \"inf\"" : ""));
        }
    }
    for (const auto& f : detail::int_fields()) {
        if (!j.contains(f.key)) {
            bad.push_back(std::string("missing key: ") + f.key);
            continue;
        }
        const auto& v = j.at(f.key);
        if (v.is_number_integer())
            c.*f.member = v.get<int>();
        else
            bad.push_back(std::string(f.key) + ": expected an integer");
    }
    if (j.contains("gamma_r_override_db")) {
        const auto& v = j.at("gamma_r_override_db");
        if (v.is_number())
            c.gamma_r_override_db = v.get<double>();
        else if (!v.is_null())
            bad.push_back("gamma_r_override_db: expected a number or null");
    }

    // Physical invariants only make sense on a fully assembled struct.
    if (bad.empty())
        for (auto& msg : validate_scenario(c)) bad.push_back(std::move(msg));
    if (!bad.empty()) throw ConfigError(std::move(bad));
    return c;
}

// Emits in declaration order (nlohmann's default container would sort keys
// alphabetically, scattering related fields).
inline nlohmann::ordered_json scenario_to_json(const ScenarioConfig& c)
{
    nlohmann::ordered_json j;
    j["schema_version"] = config_schema_version;
    for (const auto& f : detail::double_fields()) {
        const double v = c.*f.member;
        if (f.allow_inf && !std::isfinite(v))
            j[f.key] = "inf";
        else
            j[f.key] = v;
    }
    for (const auto& f : detail::int_fields()) j[f.key] = c.*f.member;
    if (c.gamma_r_override_db)
        j["gamma_r_override_db"] = *c.gamma_r_override_db;
    else
        j["gamma_r_override_db"] = nullptr;
    return j;
}

inline ScenarioConfig load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("JSON parse failure: ") + e.what()});
    }
    return scenario_from_json(j);
}

} // namespace linkperf

#endif
