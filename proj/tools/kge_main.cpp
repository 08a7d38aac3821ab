// Command-line front end: scenario execution (run), semantic-network
// analysis (analyze), lambda sweeps (sweep), and matrix optimization
// (optimize).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kge/kge.hpp"
#include "kge/scenario_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMissingFile = 1;
constexpr int kExitSchema = 2;
constexpr int kExitDomain = 3;

kge::Json load_input(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw std::ios_base::failure("no such file: " + path);
    return kge::load_json_file(path);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write file: " + path);
    out << content;
}

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> episodes, const std::string& out_dir,
            const std::string& format) {
    kge::Scenario scenario = kge::parse_scenario(load_input(scenario_path));
    if (seed) scenario.seed = *seed;
    if (episodes) scenario.episodes = *episodes;

    kge::CurriculumSummary summary = kge::run_curriculum(scenario);

    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    if (format == "json") {
        kge::Json steps = kge::Json::array();
        for (std::size_t e = 0; e < summary.traces.size(); ++e)
            for (const kge::StepRecord& s : summary.traces[e].steps) {
                kge::Json js;
                js["episode"] = e;
                js["tau"] = s.tau;
                js["observation"] = s.observation;
                if (s.action) js["action"] = *s.action;
                else js["action"] = nullptr;
                js["F"] = s.free_energy;
                js["G"] = s.expected_free_energy;
                js["surprisal"] = s.surprisal;
                js["n_concepts"] = s.n_concepts;
                steps.push_back(js);
            }
        write_file((dir / "trace.json").string(), steps.dump(2) + "\n");
    } else {
        write_file((dir / "trace.csv").string(), kge::trace_csv(summary));
    }
    write_file((dir / "summary.json").string(),
               kge::summary_json(scenario, summary).dump(2) + "\n");
    std::cout << "regime: " << kge::to_string(summary.regime) << "\n";
    return kExitOk;
}

int cmd_analyze(const std::string& matrix_path, double lambda) {
    kge::ConceptStimulusMatrix csm =
        kge::parse_concept_stimulus_matrix(load_input(matrix_path));
    kge::Json out;
    out["report"] = kge::transfer_energy_report_json(kge::transfer_energy(csm, lambda));
    out["machine_transfer_energy"] = kge::machine_transfer_energy(csm);
    const kge::Matrix sim = kge::similarity_matrix(csm);
    kge::Json jsim = kge::Json::array();
    for (std::size_t i = 0; i < sim.rows(); ++i) jsim.push_back(sim.row(i));
    out["similarity"] = jsim;
    if (csm.mode() == kge::MatrixMode::Binary) out["synsets"] = kge::synsets(csm);
    else out["synsets"] = nullptr;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& matrix_path, int grid) {
    if (grid < 2) throw std::domain_error("sweep: --grid must be >= 2");
    kge::ConceptStimulusMatrix csm =
        kge::parse_concept_stimulus_matrix(load_input(matrix_path));
    std::printf("lambda,information,concept_entropy,omega\n");
    for (int k = 0; k < grid; ++k) {
        const double lambda = static_cast<double>(k) / static_cast<double>(grid - 1);
        const kge::TransferEnergyReport rep = kge::transfer_energy(csm, lambda);
        std::printf("%.12g,%.12g,%.12g,%.12g\n", lambda, rep.information,
                    rep.concept_entropy, rep.omega);
    }
    return kExitOk;
}

int cmd_optimize(std::size_t concepts, std::size_t stimuli, double lambda,
                 std::uint64_t seed, int restarts) {
    kge::Rng rng(seed);
    auto [csm, rep] = kge::optimize_matrix(concepts, stimuli, lambda, rng, restarts);
    kge::Json out;
    out["matrix"] = kge::concept_stimulus_matrix_to_json(csm);
    out["report"] = kge::transfer_energy_report_json(rep);
    out["seed"] = seed;
    out["restarts"] = restarts;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-generation engine: semantic-network analysis and "
                 "active-inference scenario runner"};
    app.require_subcommand(1);

    // run
    std::string scenario_path, out_dir = ".", format = "csv";
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> episodes_override;
    auto* run = app.add_subcommand("run", "run a scenario curriculum");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--seed", seed_override, "override the scenario seed");
    run->add_option("--episodes", episodes_override, "override learning episodes");
    run->add_option("--out", out_dir, "output directory (trace + summary)");
    run->add_option("--format", format, "trace format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // analyze
    std::string matrix_path;
    double lambda = kge::kDefaultLambda;
    auto* analyze = app.add_subcommand("analyze", "transfer energy, similarity, synsets");
    analyze->add_option("matrix", matrix_path, "concept-stimulus matrix JSON")->required();
    analyze->add_option("--lambda", lambda, "balance parameter in [0, 1]");

    // sweep
    std::string sweep_path;
    int grid = 101;
    auto* sweep = app.add_subcommand("sweep", "omega(lambda) profile as CSV");
    sweep->add_option("matrix", sweep_path, "concept-stimulus matrix JSON")->required();
    sweep->add_option("--grid", grid, "number of lambda grid points (>= 2)");

    // optimize
    std::size_t n_concepts = 0, n_stimuli = 0;
    double opt_lambda = kge::kDefaultLambda;
    std::uint64_t opt_seed = 0;
    int restarts = 8;
    auto* optimize = app.add_subcommand("optimize", "least-effort binary matrix search");
    optimize->add_option("--concepts", n_concepts, "number of concepts")->required();
    optimize->add_option("--stimuli", n_stimuli, "number of stimuli")->required();
    optimize->add_option("--lambda", opt_lambda, "balance parameter in [0, 1]");
    optimize->add_option("--seed", opt_seed, "random seed");
    optimize->add_option("--restarts", restarts, "greedy restarts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario_path, seed_override, episodes_override, out_dir,
                           format);
        if (analyze->parsed()) return cmd_analyze(matrix_path, lambda);
        if (sweep->parsed()) return cmd_sweep(sweep_path, grid);
        if (optimize->parsed())
            return cmd_optimize(n_concepts, n_stimuli, opt_lambda, opt_seed, restarts);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingFile;
    } catch (const kge::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitOk;
}
