// Configuration loader and command-line front end.
//
// The loader half runs in-process and checks the strictness contract: every
// field explicit, unknown keys named, all problems in a file reported at
// once.  The front-end half spawns the real binary (path injected by the
// build) and checks the things only a process boundary can show: exit codes,
// output round-trips, and determinism across worker counts.
#include <catch2/catch_amalgamated.hpp>

#include <linkperf/config_io.hpp>
#include <linkperf/e2e_metrics.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace linkperf;

namespace {

nlohmann::json reference_json()
{
    std::ifstream in(LINKPERF_TABLE2);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return j;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
};

// Runs the shipped binary through the shell; stderr folded into stdout.
RunResult run_cli(const std::string& args)
{
    const std::string out_path = "/tmp/linkperf_test_out.txt";
    const std::string cmd =
        std::string(LINKPERF_BIN) + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kConfigArg = std::string("-c ") + LINKPERF_TABLE2;

} // namespace

// ---------------------------------------------------------------------------
// Loader
// ---------------------------------------------------------------------------

TEST_CASE("reference scenario file loads and round-trips exactly")
{
    const ScenarioConfig cfg = load_scenario_file(LINKPERF_TABLE2);
    // Spot-check two derived anchors so a silently mangled file cannot pass.
    CHECK(cfg.gamma_r_override_db.has_value());
    CHECK(*cfg.gamma_r_override_db == 102.902);
    CHECK(!std::isfinite(cfg.f0));  // collimated beam survives the "inf" string
    const E2EParams e = derive_e2e(cfg, UserSide::Reflection);
    CHECK(std::fabs(e.x_rf - 3364.31545864005) < 1e-8);

    // Serialize -> parse -> serialize is the identity.
    const auto j = scenario_to_json(cfg);
    const auto j2 = scenario_to_json(scenario_from_json(j));
    CHECK(j == j2);
}

TEST_CASE("loader rejects unknown keys by name")
{
    auto j = reference_json();
    j["watt_per_furlong"] = 3;
    try {
        scenario_from_json(j);
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        REQUIRE(e.details().size() == 1);
        CHECK(e.details()[0].find("watt_per_furlong") != std::string::npos);
    }
}

TEST_CASE("loader names every missing field")
{
    auto j = reference_json();
    j.erase("m_a");
    j.erase("rho_t");
    try {
        scenario_from_json(j);
        FAIL("missing fields accepted");
    } catch (const ConfigError& e) {
        REQUIRE(e.details().size() == 2);
        CHECK(e.details()[0].find("m_a") != std::string::npos);
        CHECK(e.details()[1].find("rho_t") != std::string::npos);
    }
}

TEST_CASE("loader reports all problems in one pass")
{
    auto j = reference_json();
    j.erase("aperture");         // missing
    j["surprise"] = true;        // unknown
    j["n_r"] = 2.5;              // float where an integer is required
    try {
        scenario_from_json(j);
        FAIL("broken file accepted");
    } catch (const ConfigError& e) {
        CHECK(e.details().size() == 3);
    }
}

TEST_CASE("loader enforces physical invariants")
{
    auto j = reference_json();
    j["rho_r"] = 0.7;  // 0.64 + 0.49 != 1
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);

    auto v = reference_json();
    v["schema_version"] = 99;
    CHECK_THROWS_AS(scenario_from_json(v), ConfigError);

    auto d = reference_json();
    d["detection_r"] = 3;
    CHECK_THROWS_AS(scenario_from_json(d), ConfigError);
}

TEST_CASE("only the phase-front radius accepts the inf string")
{
    auto j = reference_json();
    j["f0"] = 1.0e6;  // finite number is fine too
    CHECK(scenario_from_json(j).f0 == 1.0e6);

    auto a = reference_json();
    a["aperture"] = "inf";
    CHECK_THROWS_AS(scenario_from_json(a), ConfigError);
}

TEST_CASE("override field accepts number, null, or absence")
{
    auto j = reference_json();
    j["gamma_r_override_db"] = nullptr;
    CHECK_FALSE(scenario_from_json(j).gamma_r_override_db.has_value());
    j.erase("gamma_r_override_db");
    CHECK_FALSE(scenario_from_json(j).gamma_r_override_db.has_value());
    j["gamma_r_override_db"] = "high";
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
}

// ---------------------------------------------------------------------------
// Front end
// ---------------------------------------------------------------------------

TEST_CASE("validate prints the derived parameter report")
{
    const auto r = run_cli("validate " + kConfigArg);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("config OK") != std::string::npos);
    CHECK(r.out.find("reflection user") != std::string::npos);
    CHECK(r.out.find("modulus-fallback") != std::string::npos);
}

TEST_CASE("sweep CSV round-trips the library values exactly")
{
    const auto r = run_cli("op-sweep " + kConfigArg +
                           " -g 50:50:1 -e exact,asymptotic -o /tmp/lp_op.csv");
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp("/tmp/lp_op.csv");
    CHECK(csv.rfind("gamma_h_db,exact,asymptotic,mc_estimate,mc_stderr,status\n", 0) == 0);

    // Parse the single data row back.
    std::stringstream ss(csv.substr(csv.find('\n') + 1));
    std::string db_s, exact_s, asym_s;
    std::getline(ss, db_s, ',');
    std::getline(ss, exact_s, ',');
    std::getline(ss, asym_s, ',');

    const ScenarioConfig cfg = load_scenario_file(LINKPERF_TABLE2);
    const E2EParams e = derive_e2e(cfg, UserSide::Reflection);
    // Full-precision emission: the parsed doubles are bitwise identical to a
    // fresh in-process evaluation.
    CHECK(std::stod(db_s) == 50.0);
    CHECK(std::stod(exact_s) == outage_probability(1e5, e));
    CHECK(std::stod(asym_s) == outage_probability_asymptotic(1e5, e));
}

TEST_CASE("JSON output carries the same values as CSV")
{
    REQUIRE(run_cli("capacity-sweep " + kConfigArg +
                    " -g 40:40:1 -f json -o /tmp/lp_cap.json")
                .exit_code == 0);
    std::ifstream in("/tmp/lp_cap.json");
    nlohmann::json doc;
    in >> doc;
    CHECK(doc.at("metric") == "capacity");
    REQUIRE(doc.at("rows").size() == 1);
    const ScenarioConfig cfg = load_scenario_file(LINKPERF_TABLE2);
    const E2EParams e = derive_e2e(cfg, UserSide::Reflection);
    CHECK(doc.at("rows")[0].at("exact").get<double>() == ergodic_capacity(1e4, e));
    CHECK(doc.at("rows")[0].at("asymptotic").is_null());
}

TEST_CASE("diversity prints the closed-form order")
{
    const auto r = run_cli("diversity " + kConfigArg);
    REQUIRE(r.exit_code == 0);
    const ScenarioConfig cfg = load_scenario_file(LINKPERF_TABLE2);
    CHECK(std::stod(r.out) == diversity_order(derive_e2e(cfg, UserSide::Reflection)));
}

TEST_CASE("monte carlo rows are identical for any worker count")
{
    const std::string args = "op-sweep " + kConfigArg +
                             " -g 48:52:2 -e exact,mc --samples 50000 --seed 9 -o ";
    REQUIRE(run_cli(args + "/tmp/lp_a.csv --workers 1").exit_code == 0);
    REQUIRE(run_cli(args + "/tmp/lp_b.csv --workers 4").exit_code == 0);
    // Worker count via the environment instead of the flag.
    const std::string env_cmd = std::string("LINKPERF_THREADS=3 ") + LINKPERF_BIN +
                                " " + args + "/tmp/lp_c.csv > /dev/null 2>&1";
    REQUIRE(std::system(env_cmd.c_str()) == 0);
    const std::string a = slurp("/tmp/lp_a.csv");
    CHECK(a == slurp("/tmp/lp_b.csv"));
    CHECK(a == slurp("/tmp/lp_c.csv"));
    CHECK(a.find(",ok") != std::string::npos);
}

TEST_CASE("mc-validate agrees at a mid-range point")
{
    const auto r = run_cli("mc-validate " + kConfigArg +
                           " -g 44:44:1 --samples 100000 -o /tmp/lp_mcv.csv");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0 flagged") != std::string::npos);
    const std::string csv = slurp("/tmp/lp_mcv.csv");
    CHECK(csv.find("op,") != std::string::npos);
    CHECK(csv.find("ber,") != std::string::npos);
    CHECK(csv.find("capacity,") != std::string::npos);
    CHECK(csv.find("mean_snr,") != std::string::npos);
}

TEST_CASE("usage and configuration problems exit with code 1")
{
    CHECK(run_cli("op-sweep -c /does/not/exist.json").exit_code == 1);
    CHECK(run_cli("op-sweep " + kConfigArg + " -g 60:20:2").exit_code == 1);
    CHECK(run_cli("op-sweep " + kConfigArg + " -g 40:50:0").exit_code == 1);
    CHECK(run_cli("op-sweep " + kConfigArg + " -e telepathy").exit_code == 1);
    CHECK(run_cli("op-sweep " + kConfigArg + " -u Q").exit_code == 1);
    CHECK(run_cli("capacity-sweep " + kConfigArg + " -e asymptotic").exit_code == 1);
    CHECK(run_cli("ber-sweep " + kConfigArg + " -m ook").exit_code == 1);
    CHECK(run_cli("ber-sweep " + kConfigArg + " -m 1024qam").exit_code == 1);
    CHECK(run_cli("moments " + kConfigArg + " -e mc --order 2").exit_code == 1);
    CHECK(run_cli("--no-such-flag").exit_code == 1);
    CHECK(run_cli("").exit_code == 1);  // a subcommand is required
}

TEST_CASE("intensity detection pairs with the square-law scheme")
{
    const auto r = run_cli("ber-sweep " + kConfigArg +
                           " -d imdd -m ook -g 40:40:1 -o /tmp/lp_ook.csv");
    CHECK(r.exit_code == 0);
    const ScenarioConfig base = load_scenario_file(LINKPERF_TABLE2);
    ScenarioConfig cfg = base;
    cfg.detection_r = 2;
    const E2EParams e = derive_e2e(cfg, UserSide::Reflection);
    const std::string csv = slurp("/tmp/lp_ook.csv");
    std::stringstream ss(csv.substr(csv.find('\n') + 1));
    std::string db_s, exact_s;
    std::getline(ss, db_s, ',');
    std::getline(ss, exact_s, ',');
    CHECK(std::stod(exact_s) == avg_ber(modulation_scheme("ook"), 1e4, e));
}
