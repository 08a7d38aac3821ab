#pragma once

// JSON schemas for matrix files and scenarios, and the CSV/JSON writers the
// CLI emits. All output formatting is deterministic.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kge/environment.hpp"
#include "kge/genmodel.hpp"
#include "kge/knowledge.hpp"
#include "kge/semnet.hpp"

namespace kge {

using Json = nlohmann::json;

// Thrown on schema violations; carries the offending field path.
class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& field, const std::string& what)
        : std::runtime_error("schema error at '" + field + "': " + what),
          field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

namespace io_detail {

inline const Json& require(const Json& j, const std::string& key,
                           const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw SchemaError(path + key, "missing required field");
    return j.at(key);
}

inline Matrix parse_matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw SchemaError(path, "expected a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& row = j[i];
        if (!row.is_array() || row.empty())
            throw SchemaError(path + "[" + std::to_string(i) + "]",
                              "expected a non-empty numeric row");
        std::vector<double> r;
        for (const Json& v : row) {
            if (!v.is_number())
                throw SchemaError(path + "[" + std::to_string(i) + "]",
                                  "non-numeric entry");
            r.push_back(v.get<double>());
        }
        rows.push_back(std::move(r));
    }
    try {
        return Matrix::from_rows(rows);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path, e.what());
    }
}

inline std::vector<double> parse_vector(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw SchemaError(path, "expected a non-empty numeric array");
    std::vector<double> out;
    for (const Json& v : j) {
        if (!v.is_number()) throw SchemaError(path, "non-numeric entry");
        out.push_back(v.get<double>());
    }
    return out;
}

inline Categorical parse_categorical(const Json& j, const std::string& path) {
    try {
        return Categorical(parse_vector(j, path));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path, e.what());
    }
}

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
    return rows;
}

} // namespace io_detail

// ---- concept-stimulus matrix files ----

inline ConceptStimulusMatrix parse_concept_stimulus_matrix(const Json& j) {
    const std::string mode_str =
        io_detail::require(j, "mode", "").get<std::string>();
    MatrixMode mode;
    if (mode_str == "binary") mode = MatrixMode::Binary;
    else if (mode_str == "weighted") mode = MatrixMode::Weighted;
    else throw SchemaError("mode", "must be 'binary' or 'weighted'");

    Matrix entries = io_detail::parse_matrix(io_detail::require(j, "entries", ""),
                                             "entries");
    std::vector<std::string> stim_labels, concept_labels;
    if (j.contains("stimulus_labels"))
        stim_labels = j.at("stimulus_labels").get<std::vector<std::string>>();
    if (j.contains("concept_labels"))
        concept_labels = j.at("concept_labels").get<std::vector<std::string>>();
    try {
        return ConceptStimulusMatrix(std::move(entries), mode,
                                     std::move(stim_labels),
                                     std::move(concept_labels));
    } catch (const std::invalid_argument& e) {
        throw SchemaError("entries", e.what());
    }
}

inline Json concept_stimulus_matrix_to_json(const ConceptStimulusMatrix& csm) {
    Json j;
    j["mode"] = csm.mode() == MatrixMode::Binary ? "binary" : "weighted";
    j["entries"] = io_detail::matrix_to_json(csm.entries());
    j["stimulus_labels"] = csm.stimulus_labels();
    j["concept_labels"] = csm.concept_labels();
    return j;
}

// ---- scenario files ----

inline Scenario parse_scenario(const Json& j) {
    using io_detail::parse_categorical;
    using io_detail::parse_matrix;
    using io_detail::parse_vector;
    using io_detail::require;

    // environment
    const Json& jenv = require(j, "environment", "");
    Matrix A_star = parse_matrix(require(jenv, "A_star", "environment."),
                                 "environment.A_star");
    const Json& jbstar = require(jenv, "B_star", "environment.");
    if (!jbstar.is_array() || jbstar.empty())
        throw SchemaError("environment.B_star", "expected a list of matrices");
    std::vector<Matrix> B_star;
    for (std::size_t i = 0; i < jbstar.size(); ++i)
        B_star.push_back(parse_matrix(jbstar[i], "environment.B_star[" +
                                                     std::to_string(i) + "]"));
    const Json& jinit = require(jenv, "initial_state", "environment.");
    Categorical initial = Categorical::uniform(A_star.cols());
    if (jinit.is_number_integer()) {
        const auto idx = jinit.get<std::size_t>();
        if (idx >= A_star.cols())
            throw SchemaError("environment.initial_state", "index out of range");
        initial = Categorical::delta(A_star.cols(), idx);
    } else {
        initial = parse_categorical(jinit, "environment.initial_state");
    }
    AutonomousDynamics autonomous = AutonomousDynamics::Identity;
    if (jenv.contains("autonomous")) {
        const std::string s = jenv.at("autonomous").get<std::string>();
        if (s == "identity") autonomous = AutonomousDynamics::Identity;
        else if (s == "action0") autonomous = AutonomousDynamics::Action0;
        else throw SchemaError("environment.autonomous", "must be 'identity' or 'action0'");
    }

    GenerativeProcess env = [&] {
        try {
            return GenerativeProcess(std::move(A_star), std::move(B_star),
                                     std::move(initial), autonomous);
        } catch (const std::invalid_argument& e) {
            throw SchemaError("environment", e.what());
        }
    }();

    // agent
    const Json& ja = require(j, "agent", "");
    Matrix A = parse_matrix(require(ja, "A", "agent."), "agent.A");
    const Json& jb = require(ja, "B", "agent.");
    if (!jb.is_array() || jb.empty())
        throw SchemaError("agent.B", "expected a list of matrices");
    std::vector<Matrix> B;
    for (std::size_t i = 0; i < jb.size(); ++i)
        B.push_back(parse_matrix(jb[i], "agent.B[" + std::to_string(i) + "]"));
    const Json& jgamma = require(ja, "gamma", "agent.");
    if (!jgamma.is_number()) throw SchemaError("agent.gamma", "expected a number");
    const double gamma = jgamma.get<double>();
    const Json& jhorizon = require(ja, "horizon", "agent.");
    if (!jhorizon.is_number_unsigned() || jhorizon.get<std::size_t>() < 1)
        throw SchemaError("agent.horizon", "expected a positive integer");
    const std::size_t horizon = jhorizon.get<std::size_t>();

    // C: one distribution per time step, or a single one broadcast to all.
    const Json& jc = require(ja, "C", "agent.");
    std::vector<Categorical> C;
    if (jc.is_array() && !jc.empty() && jc[0].is_array()) {
        for (std::size_t t = 0; t < jc.size(); ++t)
            C.push_back(parse_categorical(jc[t], "agent.C[" + std::to_string(t) + "]"));
        if (C.size() != horizon)
            throw SchemaError("agent.C", "need one preference per time step");
    } else {
        C.assign(horizon, parse_categorical(jc, "agent.C"));
    }

    Categorical D = parse_categorical(require(ja, "D", "agent."), "agent.D");

    std::vector<Policy> policies;
    if (ja.contains("policies")) {
        const Json& jp = ja.at("policies");
        if (!jp.is_array() || jp.empty())
            throw SchemaError("agent.policies", "expected a non-empty list");
        for (const Json& p : jp) {
            if (!p.is_array())
                throw SchemaError("agent.policies", "each policy is an action list");
            Policy pol;
            for (const Json& a : p) pol.actions.push_back(a.get<std::size_t>());
            policies.push_back(std::move(pol));
        }
    } else {
        try {
            policies = enumerate_policies(B.size(), horizon - 1);
        } catch (const std::runtime_error& e) {
            throw SchemaError("agent.policies", e.what());
        }
    }

    DirichletCounts counts;
    if (ja.contains("dirichlet")) {
        const Json& jd = ja.at("dirichlet");
        counts.a = parse_matrix(require(jd, "a", "agent.dirichlet."),
                                "agent.dirichlet.a");
        const Json& jbb = require(jd, "b", "agent.dirichlet.");
        if (!jbb.is_array())
            throw SchemaError("agent.dirichlet.b", "expected a list of matrices");
        for (std::size_t i = 0; i < jbb.size(); ++i)
            counts.b.push_back(parse_matrix(jbb[i], "agent.dirichlet.b[" +
                                                        std::to_string(i) + "]"));
        counts.d = parse_vector(require(jd, "d", "agent.dirichlet."),
                                "agent.dirichlet.d");
    } else {
        // Derive soft counts from the supplied matrices.
        counts = detail::counts_like(A, B, D.probs(), 10.0);
    }

    GenerativeModel agent = [&] {
        try {
            DirichletCounts check = counts;
            check.validate();
            return GenerativeModel(std::move(A), std::move(B), std::move(C),
                                   std::move(D), gamma, horizon, std::move(policies));
        } catch (const std::invalid_argument& e) {
            throw SchemaError("agent", e.what());
        }
    }();

    // regime
    const Json& jr = require(j, "regime", "");
    RegimeConfig regime;
    regime.loop_I_learning = require(jr, "loop_I_learning", "regime.").get<bool>();
    regime.loop_II = require(jr, "loop_II", "regime.").get<bool>();
    regime.loop_I_frozen_in_use =
        jr.contains("loop_I_frozen_in_use") ? jr.at("loop_I_frozen_in_use").get<bool>()
                                            : false;
    try {
        regime.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError("regime", e.what());
    }

    Scenario s{std::move(env), std::move(agent), std::move(counts), regime};
    const Json& jep = require(j, "episodes", "");
    if (!jep.is_number_unsigned() || jep.get<std::size_t>() < 1)
        throw SchemaError("episodes", "expected a positive integer");
    s.episodes = jep.get<std::size_t>();
    if (j.contains("use_episodes"))
        s.use_episodes = j.at("use_episodes").get<std::size_t>();
    s.seed = require(j, "seed", "").get<std::uint64_t>();
    if (j.contains("eta")) s.eta = j.at("eta").get<double>();
    if (j.contains("expansion")) {
        const Json& jx = j.at("expansion");
        ExpansionConfig xc;
        if (jx.contains("window")) xc.window = jx.at("window").get<std::size_t>();
        if (jx.contains("threshold")) xc.threshold = jx.at("threshold").get<double>();
        if (jx.contains("prior_concentration"))
            xc.prior_concentration = jx.at("prior_concentration").get<double>();
        s.expansion = xc;
    }

    if (s.environment.n_stimuli() != s.agent.n_stimuli())
        throw SchemaError("agent.A", "stimulus alphabet differs from environment");
    return s;
}

inline Json scenario_to_json(const Scenario& s) {
    Json j;
    j["environment"]["A_star"] = io_detail::matrix_to_json(s.environment.emission());
    Json bstar = Json::array();
    for (const Matrix& b : s.environment.transitions())
        bstar.push_back(io_detail::matrix_to_json(b));
    j["environment"]["B_star"] = bstar;
    j["environment"]["initial_state"] = s.environment.initial().probs();
    j["environment"]["autonomous"] =
        s.environment.autonomous() == AutonomousDynamics::Identity ? "identity"
                                                                   : "action0";
    j["agent"]["A"] = io_detail::matrix_to_json(s.agent.A());
    Json bj = Json::array();
    for (const Matrix& b : s.agent.B()) bj.push_back(io_detail::matrix_to_json(b));
    j["agent"]["B"] = bj;
    Json cj = Json::array();
    for (const Categorical& c : s.agent.C()) cj.push_back(c.probs());
    j["agent"]["C"] = cj;
    j["agent"]["D"] = s.agent.D().probs();
    j["agent"]["gamma"] = s.agent.gamma();
    j["agent"]["horizon"] = s.agent.horizon();
    Json pj = Json::array();
    for (const Policy& p : s.agent.policies()) pj.push_back(p.actions);
    j["agent"]["policies"] = pj;
    j["agent"]["dirichlet"]["a"] = io_detail::matrix_to_json(s.counts.a);
    Json dbj = Json::array();
    for (const Matrix& b : s.counts.b) dbj.push_back(io_detail::matrix_to_json(b));
    j["agent"]["dirichlet"]["b"] = dbj;
    j["agent"]["dirichlet"]["d"] = s.counts.d;
    j["regime"]["loop_I_learning"] = s.regime.loop_I_learning;
    j["regime"]["loop_II"] = s.regime.loop_II;
    j["regime"]["loop_I_frozen_in_use"] = s.regime.loop_I_frozen_in_use;
    j["episodes"] = s.episodes;
    j["use_episodes"] = s.use_episodes;
    j["seed"] = s.seed;
    j["eta"] = s.eta;
    if (s.expansion) {
        j["expansion"]["window"] = s.expansion->window;
        j["expansion"]["threshold"] = s.expansion->threshold;
        j["expansion"]["prior_concentration"] = s.expansion->prior_concentration;
    }
    return j;
}

// ---- output writers ----

namespace io_detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

} // namespace io_detail

inline std::string trace_csv(const CurriculumSummary& summary) {
    std::ostringstream out;
    out << "episode,tau,observation,action,F,G,surprisal,n_concepts\n";
    for (std::size_t e = 0; e < summary.traces.size(); ++e) {
        for (const StepRecord& s : summary.traces[e].steps) {
            out << e << ',' << s.tau << ',' << s.observation << ',';
            if (s.action) out << *s.action;
            else out << "none";
            out << ',' << io_detail::format_double(s.free_energy) << ','
                << io_detail::format_double(s.expected_free_energy) << ','
                << io_detail::format_double(s.surprisal) << ',' << s.n_concepts
                << '\n';
        }
    }
    return out.str();
}

inline Json summary_json(const Scenario& scenario, const CurriculumSummary& summary) {
    Json j;
    j["regime"] = to_string(summary.regime);
    j["seed"] = summary.seed;
    j["episodes"] = scenario.episodes;
    j["use_episodes"] = scenario.use_episodes;
    j["eta"] = scenario.eta;
    j["gamma"] = scenario.agent.gamma();
    j["horizon"] = scenario.agent.horizon();
    j["expansions"] = summary.expansions;
    j["n_concepts_final"] = summary.final_agent.model.n_concepts();

    Json per = Json::array();
    double pref_learning = 0.0, pref_use = 0.0;
    std::size_t n_learning = 0, n_use = 0;
    for (const EpisodeSummary& e : summary.episodes) {
        Json je;
        je["episode"] = e.episode;
        je["phase"] = to_string(e.phase);
        je["mean_F"] = e.mean_free_energy;
        je["mean_G"] = e.mean_expected_free_energy;
        je["mean_surprisal"] = e.mean_surprisal;
        je["preferred_outcome"] = e.preferred_outcome;
        je["n_concepts"] = e.n_concepts;
        per.push_back(je);
        if (e.phase == Phase::Learning) {
            pref_learning += e.preferred_outcome ? 1.0 : 0.0;
            ++n_learning;
        } else {
            pref_use += e.preferred_outcome ? 1.0 : 0.0;
            ++n_use;
        }
    }
    j["per_episode"] = per;
    j["preferred_frequency_learning"] =
        n_learning ? pref_learning / static_cast<double>(n_learning) : 0.0;
    if (n_use)
        j["preferred_frequency_use"] = pref_use / static_cast<double>(n_use);

    j["final_dirichlet_means"]["A"] =
        io_detail::matrix_to_json(summary.final_agent.model.A());
    Json bj = Json::array();
    for (const Matrix& b : summary.final_agent.model.B())
        bj.push_back(io_detail::matrix_to_json(b));
    j["final_dirichlet_means"]["B"] = bj;
    j["final_dirichlet_means"]["D"] = summary.final_agent.model.D().probs();
    return j;
}

inline Json transfer_energy_report_json(const TransferEnergyReport& rep) {
    Json j;
    j["lambda"] = rep.lambda;
    j["information"] = rep.information;
    j["concept_entropy"] = rep.concept_entropy;
    j["omega"] = rep.omega;
    if (rep.a_omega) j["a_omega"] = *rep.a_omega;
    else j["a_omega"] = nullptr;
    if (rep.scaled_omega) j["scaled_omega"] = *rep.scaled_omega;
    else j["scaled_omega"] = nullptr;
    return j;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw SchemaError("<json>", e.what());
    }
}

} // namespace kge
