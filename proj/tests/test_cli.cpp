#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kge/scenario_io.hpp"
#include "oracles.hpp"

using namespace kge;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "kge_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_dir() / ("stdout" + std::to_string(counter));
    const fs::path err = scratch_dir() / ("stderr" + std::to_string(counter));
    ++counter;
    const std::string cmd = std::string(KGE_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_json(const std::string& name, const Json& j) {
    const fs::path p = scratch_dir() / name;
    std::ofstream out(p);
    out << j.dump(2);
    return p;
}

std::string fixture_path(const std::string& name) {
    return std::string(KGE_FIXTURES_DIR) + "/" + name + ".json";
}

} // namespace

TEST_CASE("cli: run executes a fixture scenario") {
    const fs::path out = scratch_dir() / "run-declarative";
    const CliResult r = run_cli("run " + fixture_path("discrimination-2x2") +
                                " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("regime: declarative") != std::string::npos);

    const Json summary = Json::parse(slurp(out / "summary.json"));
    CHECK(summary.at("regime") == "declarative");
    CHECK(summary.at("seed") == 7);
    CHECK(summary.at("per_episode").size() == 200);

    const std::string csv = slurp(out / "trace.csv");
    CHECK(csv.rfind("episode,tau,observation,action,F,G,surprisal,n_concepts\n",
                    0) == 0);
    // declarative: the action column is always "none"
    CHECK(csv.find(",none,") != std::string::npos);
}

TEST_CASE("cli: run honors --seed and --episodes overrides") {
    const fs::path out = scratch_dir() / "run-overrides";
    const CliResult r = run_cli("run " + fixture_path("discrimination-2x2") +
                                " --seed 99 --episodes 5 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const Json summary = Json::parse(slurp(out / "summary.json"));
    CHECK(summary.at("seed") == 99);
    CHECK(summary.at("per_episode").size() == 5);
}

TEST_CASE("cli: run produces byte-identical outputs across reruns") {
    const fs::path out1 = scratch_dir() / "det1";
    const fs::path out2 = scratch_dir() / "det2";
    const std::string base = "run " + fixture_path("tmaze") + " --out ";
    REQUIRE(run_cli(base + out1.string()).exit_code == 0);
    REQUIRE(run_cli(base + out2.string()).exit_code == 0);
    CHECK(slurp(out1 / "trace.csv") == slurp(out2 / "trace.csv"));
    CHECK(slurp(out1 / "summary.json") == slurp(out2 / "summary.json"));

    // json format as well
    const fs::path out3 = scratch_dir() / "det3";
    const fs::path out4 = scratch_dir() / "det4";
    const std::string jb = "run " + fixture_path("cue-conditional") +
                           " --format json --out ";
    REQUIRE(run_cli(jb + out3.string()).exit_code == 0);
    REQUIRE(run_cli(jb + out4.string()).exit_code == 0);
    CHECK(slurp(out3 / "trace.json") == slurp(out4 / "trace.json"));
}

TEST_CASE("cli: missing file exits 1, schema violation exits 2") {
    CHECK(run_cli("run /nonexistent/scenario.json").exit_code == 1);
    CHECK(run_cli("analyze /nonexistent/matrix.json").exit_code == 1);

    // structurally valid JSON missing a required section
    Json bad;
    bad["environment"]["A_star"] = {{1.0, 0.0}, {0.0, 1.0}};
    const fs::path p = write_json("bad_scenario.json", bad);
    const CliResult r = run_cli("run " + p.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("environment.B_star") != std::string::npos);

    // non-stochastic agent matrix is also a schema error with a field name
    Json s = Json::parse(slurp(fixture_path("tmaze")));
    s["agent"]["gamma"] = "eight";
    const fs::path p2 = write_json("bad_gamma.json", s);
    const CliResult r2 = run_cli("run " + p2.string());
    CHECK(r2.exit_code == 2);
    CHECK(r2.err.find("agent.gamma") != std::string::npos);

    // malformed JSON text
    const fs::path p3 = scratch_dir() / "not_json.json";
    std::ofstream(p3) << "{ this is not json";
    CHECK(run_cli("run " + p3.string()).exit_code == 2);
}

TEST_CASE("cli: fixture files on disk round-trip through the parser") {
    for (const std::string name :
         {"discrimination-2x2", "tmaze", "cue-conditional"}) {
        const Scenario disk = parse_scenario(load_json_file(fixture_path(name)));
        const Scenario built = fixture(name);
        CHECK(disk.environment.emission() == built.environment.emission());
        REQUIRE(disk.environment.transitions().size() ==
                built.environment.transitions().size());
        for (std::size_t k = 0; k < disk.environment.transitions().size(); ++k)
            CHECK(disk.environment.transitions()[k] ==
                  built.environment.transitions()[k]);
        CHECK(disk.agent.A() == built.agent.A());
        CHECK(disk.agent.horizon() == built.agent.horizon());
        CHECK(disk.agent.gamma() == built.agent.gamma());
        CHECK(disk.counts == built.counts);
        CHECK(disk.episodes == built.episodes);
        CHECK(disk.use_episodes == built.use_episodes);
        CHECK(disk.seed == built.seed);
        CHECK(classify_regime(disk.regime) == classify_regime(built.regime));
    }
}

TEST_CASE("cli: analyze reports the expected transfer energy") {
    Json m;
    m["mode"] = "weighted";
    m["entries"] = {{4.0, 1.0}, {1.0, 4.0}};
    const fs::path p = write_json("weighted2x2.json", m);
    const CliResult r = run_cli("analyze " + p.string() + " --lambda 0.41");
    REQUIRE(r.exit_code == 0);
    const Json out = Json::parse(r.out);
    CHECK(out.at("report").at("omega").get<double>() == Approx(0.329931).margin(1e-6));
    CHECK(out.at("report").at("information").get<double>() ==
          Approx(0.192745).margin(1e-6));
    CHECK(out.at("machine_transfer_energy").get<double>() ==
          Approx(0.192745).margin(1e-6));
    CHECK(out.at("synsets").is_null()); // weighted mode has no synsets

    Json b;
    b["mode"] = "binary";
    b["entries"] = {{1.0, 1.0, 0.0}, {1.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    const fs::path pb = write_json("binary3x3.json", b);
    const CliResult rb = run_cli("analyze " + pb.string() + " --lambda 1.0");
    REQUIRE(rb.exit_code == 0);
    const Json outb = Json::parse(rb.out);
    const double I = oracle::mutual_information({{0.2, 0.2, 0.0},
                                                 {0.2, 0.2, 0.0},
                                                 {0.0, 0.0, 0.2}});
    CHECK(outb.at("report").at("omega").get<double>() == Approx(-I).margin(1e-10));
    REQUIRE(outb.at("synsets").size() == 2);
    CHECK(outb.at("synsets")[0] == Json::array({0, 1}));
    // similarity of the identical columns is 1
    CHECK(outb.at("similarity")[0][1].get<double>() == Approx(1.0).margin(1e-12));
}

TEST_CASE("cli: sweep emits an affine omega profile") {
    Json m;
    m["mode"] = "binary";
    m["entries"] = {{1.0, 0.0}, {0.0, 1.0}};
    const fs::path p = write_json("identity2x2.json", m);
    const CliResult r = run_cli("sweep " + p.string() + " --grid 11");
    REQUIRE(r.exit_code == 0);

    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "lambda,information,concept_entropy,omega");
    std::vector<std::array<double, 4>> rows;
    std::string line;
    while (std::getline(lines, line)) {
        std::array<double, 4> v{};
        std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]);
        rows.push_back(v);
    }
    REQUIRE(rows.size() == 11);
    // identity: H = I = ln 2, so omega runs linearly from ln 2 to -ln 2
    CHECK(rows.front()[3] == Approx(std::log(2.0)).margin(1e-10));
    CHECK(rows.back()[3] == Approx(-std::log(2.0)).margin(1e-10));
    for (const auto& v : rows)
        CHECK(v[3] == Approx(std::log(2.0) * (1.0 - 2.0 * v[0])).margin(1e-9));

    CHECK(run_cli("sweep " + p.string() + " --grid 1").exit_code == 3);
}

TEST_CASE("cli: optimize output is self-consistent and feeds analyze") {
    const CliResult r = run_cli("optimize --concepts 3 --stimuli 3 --lambda 1.0 "
                                "--seed 5 --restarts 8");
    REQUIRE(r.exit_code == 0);
    const Json out = Json::parse(r.out);
    const double reported = out.at("report").at("omega").get<double>();
    // lambda = 1 wants maximal mutual information: -ln 3 for 3x3
    CHECK(reported == Approx(-std::log(3.0)).margin(1e-9));
    CHECK(reported == Approx(oracle::exhaustive_min_omega(3, 3, 1.0)).margin(1e-9));

    // round-trip the returned matrix through analyze
    const fs::path p = write_json("optimized.json", out.at("matrix"));
    const CliResult ra = run_cli("analyze " + p.string() + " --lambda 1.0");
    REQUIRE(ra.exit_code == 0);
    const Json aout = Json::parse(ra.out);
    CHECK(aout.at("report").at("omega").get<double>() ==
          Approx(reported).margin(1e-12));

    // deterministic under a fixed seed
    const CliResult r2 = run_cli("optimize --concepts 3 --stimuli 3 --lambda 1.0 "
                                 "--seed 5 --restarts 8");
    CHECK(r2.out == r.out);
}
