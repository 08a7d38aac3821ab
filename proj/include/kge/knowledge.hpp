#pragma once

// Orchestrates the two-loop architecture into the three knowledge regimes
// (declarative / procedural / conditional) and produces labeled traces.

#include <optional>
#include <string>
#include <vector>

#include "kge/environment.hpp"
#include "kge/genmodel.hpp"
#include "kge/inference.hpp"
#include "kge/probmath.hpp"

namespace kge {

enum class Phase { Learning, Use };

enum class Regime { Declarative, Procedural, Conditional, Unclassified };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::Declarative: return "declarative";
        case Regime::Procedural: return "procedural";
        case Regime::Conditional: return "conditional";
        default: return "unclassified";
    }
}

inline std::string to_string(Phase p) {
    return p == Phase::Learning ? "learning" : "use";
}

// Declarative: loop II never runs. Procedural: both loops learn, only loop
// II is used. Conditional: both loops active in both phases.
inline Regime classify_regime(const RegimeConfig& cfg) {
    cfg.validate();
    if (!cfg.loop_II) return Regime::Declarative;
    if (cfg.loop_I_learning && cfg.loop_I_frozen_in_use) return Regime::Procedural;
    if (cfg.loop_I_learning && !cfg.loop_I_frozen_in_use) return Regime::Conditional;
    return Regime::Unclassified;
}

struct StepRecord {
    std::size_t tau = 0; // 1-based
    std::size_t observation = 0;
    std::optional<std::size_t> action; // action applied before the next step
    double free_energy = 0.0;          // policy-mixed F
    double expected_free_energy = 0.0; // policy-mixed G
    double surprisal = 0.0;
    std::size_t n_concepts = 0;
};

struct EpisodeTrace {
    std::vector<StepRecord> steps;
    Regime regime = Regime::Unclassified;
    Phase phase = Phase::Learning;
    std::uint64_t seed = 0;
};

// The mutable agent state a curriculum threads through its episodes.
struct Agent {
    GenerativeModel model;
    DirichletCounts counts;
    double eta = 1.0;
};

// One horizon-T trial. Per step: observe, perceive per policy, plan and act
// when loop II is on; at the end, fold the posterior-weighted episode into
// the Dirichlet counts unless learning is off or frozen for this phase.
inline EpisodeTrace run_episode(Agent& agent, GenerativeProcess& env,
                                const RegimeConfig& cfg, Phase phase, Rng& rng) {
    cfg.validate();
    if (env.n_stimuli() != agent.model.n_stimuli())
        throw std::domain_error("run_episode: environment and model stimulus "
                                "alphabets differ");

    const GenerativeModel& gm = agent.model;
    const std::size_t T = gm.horizon();
    const std::size_t P = gm.policies().size();

    env.reset(rng);
    EpisodeTrace trace;
    trace.regime = classify_regime(cfg);
    trace.phase = phase;

    std::vector<std::size_t> obs;
    std::vector<std::size_t> taken;
    std::vector<PerceptionResult> perception(P);
    Categorical q_pi = Categorical::uniform(P);
    std::optional<std::size_t> pending_action;

    // Policies whose opening actions disagree with what was actually done
    // carry no posterior mass from then on.
    const auto mask_consistent = [&](const Categorical& q) {
        std::vector<double> w(P);
        for (std::size_t p = 0; p < P; ++p) {
            bool ok = true;
            for (std::size_t k = 0; k < taken.size() && ok; ++k)
                ok = gm.policies()[p].actions[k] == taken[k];
            w[p] = ok ? q[p] : 0.0;
        }
        return Categorical::from_weights(w);
    };

    // Per-policy forward filters for the one-step-ahead predictive.
    std::vector<std::vector<double>> filt(P, gm.D().probs());

    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t phi = env.step(pending_action, rng);
        if (pending_action) taken.push_back(*pending_action);

        // Predictive surprisal before conditioning on phi, mixed by the
        // current policy posterior.
        double predictive = 0.0;
        std::vector<std::vector<double>> prior(P);
        for (std::size_t p = 0; p < P; ++p) {
            prior[p] = t == 0 ? filt[p]
                              : gm.B()[gm.policies()[p].actions[t - 1]].mul(filt[p]);
            double pp = 0.0;
            for (std::size_t i = 0; i < gm.n_concepts(); ++i)
                pp += gm.A()(phi, i) * prior[p][i];
            predictive += q_pi[p] * pp;
        }
        const double surprisal = predictive > 0.0
                                     ? -std::log(predictive)
                                     : -std::log(detail::kLogFloor);
        for (std::size_t p = 0; p < P; ++p) {
            double norm = 0.0;
            for (std::size_t i = 0; i < gm.n_concepts(); ++i) {
                prior[p][i] *= gm.A()(phi, i);
                norm += prior[p][i];
            }
            if (norm > 0.0)
                for (double& x : prior[p]) x /= norm;
            else
                prior[p].assign(gm.n_concepts(), 1.0 / gm.n_concepts());
            filt[p] = prior[p];
        }

        obs.push_back(phi);
        std::vector<double> F(P), G(P);
        std::vector<std::vector<std::vector<double>>> beliefs(P);
        for (std::size_t p = 0; p < P; ++p) {
            perception[p] = perceive(gm, gm.policies()[p], obs);
            F[p] = perception[p].free_energy;
            beliefs[p] = perception[p].posteriors;
        }
        const EFEReport efe = expected_free_energy(gm, beliefs);
        G = efe.per_policy;

        q_pi = mask_consistent(cfg.loop_II ? plan(F, G, gm.gamma())
                                           : Categorical::uniform(P));

        pending_action.reset();
        if (cfg.loop_II && t + 1 < T)
            pending_action = select_action(q_pi, gm.policies(), t + 1, gm.n_actions());

        StepRecord rec;
        rec.tau = t + 1;
        rec.observation = phi;
        rec.action = pending_action;
        double fmix = 0.0, gmix = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            fmix += q_pi[p] * F[p];
            gmix += q_pi[p] * G[p];
        }
        rec.free_energy = fmix;
        rec.expected_free_energy = gmix;
        rec.surprisal = surprisal;
        rec.n_concepts = gm.n_concepts();
        trace.steps.push_back(rec);
    }

    const bool learn = cfg.loop_I_learning &&
                       !(phase == Phase::Use && cfg.loop_I_frozen_in_use);
    if (learn) {
        // Bayesian model average of the final per-policy posteriors.
        std::vector<PosteriorStep> episode;
        const std::size_t n = gm.n_concepts();
        for (std::size_t t = 0; t < T; ++t) {
            PosteriorStep step;
            step.tau = t + 1;
            step.obs = obs[t];
            step.q.assign(n, 0.0);
            for (std::size_t p = 0; p < P; ++p)
                for (std::size_t i = 0; i < n; ++i)
                    step.q[i] += q_pi[p] * perception[p].posteriors[t][i];
            step.action_to_next = trace.steps[t].action;
            episode.push_back(std::move(step));
        }
        agent.counts = update_dirichlet(agent.counts, episode, agent.eta);
        agent.model = expected_model(agent.counts, gm.gamma(), gm.horizon(),
                                     gm.C(), gm.policies());
    }
    return trace;
}

struct EpisodeSummary {
    std::size_t episode = 0;
    Phase phase = Phase::Learning;
    double mean_free_energy = 0.0;
    double mean_expected_free_energy = 0.0;
    double mean_surprisal = 0.0;
    bool preferred_outcome = false; // preferred stimulus observed at tau = T
    std::size_t n_concepts = 0;
};

struct CurriculumSummary {
    Regime regime = Regime::Unclassified;
    std::uint64_t seed = 0;
    std::vector<EpisodeSummary> episodes;
    std::vector<EpisodeTrace> traces;
    Agent final_agent{GenerativeModel(Matrix::identity(1), {Matrix::identity(1)},
                                      {Categorical::uniform(1)},
                                      Categorical::uniform(1), 1.0, 1,
                                      {Policy{}}),
                      DirichletCounts{Matrix(1, 1, 1.0), {Matrix(1, 1, 1.0)}, {1.0}}};
    std::size_t expansions = 0;
};

// Sequential episodes with persistent counts: `episodes` learning trials
// followed by `use_episodes` use trials. Expansion, when configured, is
// checked against the sliding stimulus window after every learning episode.
inline CurriculumSummary run_curriculum(const Scenario& scenario) {
    if (scenario.episodes < 1)
        throw std::invalid_argument("run_curriculum: need at least one episode");

    Rng rng(scenario.seed);
    GenerativeProcess env = scenario.environment;
    Agent agent{scenario.agent, scenario.counts, scenario.eta};

    CurriculumSummary summary;
    summary.regime = classify_regime(scenario.regime);
    summary.seed = scenario.seed;

    // Preferred stimulus: the mode of the final-step preference.
    const Categorical& c_last = scenario.agent.C().back();
    std::size_t preferred = 0;
    for (std::size_t i = 1; i < c_last.size(); ++i)
        if (c_last[i] > c_last[preferred]) preferred = i;

    std::vector<std::size_t> window;

    const std::size_t total = scenario.episodes + scenario.use_episodes;
    for (std::size_t e = 0; e < total; ++e) {
        const Phase phase = e < scenario.episodes ? Phase::Learning : Phase::Use;
        EpisodeTrace trace = run_episode(agent, env, scenario.regime, phase, rng);
        trace.seed = scenario.seed;

        EpisodeSummary es;
        es.episode = e;
        es.phase = phase;
        for (const StepRecord& s : trace.steps) {
            es.mean_free_energy += s.free_energy;
            es.mean_expected_free_energy += s.expected_free_energy;
            es.mean_surprisal += s.surprisal;
        }
        const double len = static_cast<double>(trace.steps.size());
        es.mean_free_energy /= len;
        es.mean_expected_free_energy /= len;
        es.mean_surprisal /= len;
        es.preferred_outcome = trace.steps.back().observation == preferred;
        es.n_concepts = agent.model.n_concepts();
        summary.episodes.push_back(es);
        summary.traces.push_back(std::move(trace));

        if (scenario.expansion && phase == Phase::Learning) {
            const ExpansionConfig& xc = *scenario.expansion;
            for (const StepRecord& s : summary.traces.back().steps) {
                window.push_back(s.observation);
                if (window.size() > xc.window) window.erase(window.begin());
            }
            if (window.size() == xc.window) {
                const double threshold =
                    xc.threshold > 0.0
                        ? xc.threshold
                        : 0.9 * std::log(static_cast<double>(agent.model.n_stimuli()));
                ExpansionResult xr = expand_concepts(agent.model, agent.counts,
                                                     window, threshold,
                                                     xc.prior_concentration);
                if (xr.triggered) {
                    agent.model = std::move(xr.model);
                    agent.counts = std::move(xr.counts);
                    ++summary.expansions;
                    window.clear();
                }
            }
        }
    }

    summary.final_agent = std::move(agent);
    return summary;
}

} // namespace kge
