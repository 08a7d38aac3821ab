#pragma once

// Active-inference engine: variational perception (mean-field F
// minimization), exact enumeration posteriors, the two free-energy
// decomposition identities, expected-free-energy planning, action
// selection, surprisal accounting, and unsupervised concept expansion.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kge/genmodel.hpp"
#include "kge/probmath.hpp"

namespace kge {

namespace detail {

// Probabilities this small are treated as impossible events in log space.
inline constexpr double kLogFloor = 1e-300;

inline double safe_log(double p) { return std::log(std::max(p, kLogFloor)); }

} // namespace detail

struct PerceptionOptions {
    double damping = 0.5;    // fraction of the coordinate minimizer mixed in
    double tolerance = 1e-8; // L-inf convergence threshold
    int max_sweeps = 64;
};

struct PerceptionResult {
    std::vector<std::vector<double>> posteriors; // T rows of q(theta_tau | pi)
    double free_energy = 0.0;                    // mean-field F(pi)
    int sweeps = 0;
    bool converged = false;
    std::vector<double> sweep_free_energies;     // F after each sweep
};

namespace detail {

// Mean-field F(pi) = E_q[ln q] - E_q[ln p(obs, states | pi)] for a fully
// factored q over the policy-conditioned chain.
inline double mean_field_free_energy(const GenerativeModel& gm, const Policy& policy,
                                     const std::vector<std::size_t>& obs,
                                     const std::vector<std::vector<double>>& q) {
    const std::size_t T = gm.horizon();
    const std::size_t n = gm.n_concepts();
    double f = 0.0;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < n; ++i) f += xlogx(q[t][i]);
    for (std::size_t i = 0; i < n; ++i)
        if (q[0][i] > 0.0) f -= q[0][i] * safe_log(gm.D()[i]);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const Matrix& b = gm.B()[policy.actions[t]];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double w = q[t + 1][i] * q[t][j];
                if (w > 0.0) f -= w * safe_log(b(i, j));
            }
    }
    for (std::size_t t = 0; t < obs.size(); ++t)
        for (std::size_t i = 0; i < n; ++i)
            if (q[t][i] > 0.0) f -= q[t][i] * safe_log(gm.A()(obs[t], i));
    return f;
}

} // namespace detail

// Mean-field perception for one policy. Coordinate updates sweep tau = 1..T;
// each coordinate's exact minimizer q* is softmax of the expected
// log-factors (ln D or E[ln B] from the left, E[ln B] from the right, ln A
// row for observed steps), mixed into the old value with the damping
// factor. The first sweep is undamped so deterministic models land on their
// support immediately. Exact coordinate minimizers and convexity of F in
// each block make F non-increasing across sweeps.
inline PerceptionResult perceive(const GenerativeModel& gm, const Policy& policy,
                                 const std::vector<std::size_t>& obs,
                                 const PerceptionOptions& opts = {}) {
    const std::size_t T = gm.horizon();
    const std::size_t n = gm.n_concepts();
    if (policy.actions.size() != T - 1)
        throw std::invalid_argument("perceive: policy length must be T - 1");
    if (obs.size() > T)
        throw std::invalid_argument("perceive: more observations than time steps");
    for (std::size_t phi : obs) {
        if (phi >= gm.n_stimuli())
            throw std::invalid_argument("perceive: observation out of alphabet");
        double rowsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) rowsum += gm.A()(phi, i);
        if (rowsum <= 0.0)
            throw std::domain_error("perceive: observed stimulus has zero likelihood "
                                    "under every concept");
    }

    std::vector<std::vector<double>> q(T, std::vector<double>(n, 1.0 / n));
    PerceptionResult res;

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        const double damp = sweep == 0 ? 1.0 : opts.damping;
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> lq(n, 0.0);
            if (t == 0) {
                for (std::size_t i = 0; i < n; ++i)
                    lq[i] += detail::safe_log(gm.D()[i]);
            } else {
                const Matrix& b = gm.B()[policy.actions[t - 1]];
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        if (q[t - 1][j] > 0.0)
                            lq[i] += q[t - 1][j] * detail::safe_log(b(i, j));
            }
            if (t + 1 < T) {
                const Matrix& b = gm.B()[policy.actions[t]];
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t k = 0; k < n; ++k)
                        if (q[t + 1][k] > 0.0)
                            lq[i] += q[t + 1][k] * detail::safe_log(b(k, i));
            }
            if (t < obs.size())
                for (std::size_t i = 0; i < n; ++i)
                    lq[i] += detail::safe_log(gm.A()(obs[t], i));

            const Categorical proposal = softmax(lq, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double next = (1.0 - damp) * q[t][i] + damp * proposal[i];
                max_change = std::max(max_change, std::abs(next - q[t][i]));
                q[t][i] = next;
            }
        }
        res.sweeps = sweep + 1;
        res.sweep_free_energies.push_back(
            detail::mean_field_free_energy(gm, policy, obs, q));
        if (max_change < opts.tolerance) {
            res.converged = true;
            break;
        }
    }

    res.posteriors = std::move(q);
    res.free_energy = res.sweep_free_energies.back();
    return res;
}

struct ExactPosterior {
    std::vector<std::vector<double>> marginals; // T rows of p(theta_tau | obs, pi)
    double neg_log_evidence = 0.0;              // -ln p(obs | pi)
    std::vector<double> joint;                  // posterior over all n^T sequences
};

// Brute-force Bayes over all n^T concept sequences for a fixed policy.
// Test oracle and equality reference; guarded at n^T <= 1e6.
inline ExactPosterior exact_posterior(const GenerativeModel& gm, const Policy& policy,
                                      const std::vector<std::size_t>& obs) {
    const std::size_t T = gm.horizon();
    const std::size_t n = gm.n_concepts();
    if (policy.actions.size() != T - 1)
        throw std::invalid_argument("exact_posterior: policy length must be T - 1");
    if (obs.size() > T)
        throw std::invalid_argument("exact_posterior: more observations than steps");
    double total = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        total *= static_cast<double>(n);
        if (total > 1e6)
            throw std::runtime_error("exact_posterior: n^T exceeds enumeration guard");
    }
    const std::size_t n_seq = static_cast<std::size_t>(total);

    ExactPosterior out;
    out.joint.assign(n_seq, 0.0);
    out.marginals.assign(T, std::vector<double>(n, 0.0));
    double evidence = 0.0;
    std::vector<std::size_t> states(T);
    for (std::size_t s = 0; s < n_seq; ++s) {
        std::size_t code = s;
        for (std::size_t t = 0; t < T; ++t) {
            states[t] = code % n;
            code /= n;
        }
        double w = gm.D()[states[0]];
        for (std::size_t t = 0; t + 1 < T; ++t)
            w *= gm.B()[policy.actions[t]](states[t + 1], states[t]);
        for (std::size_t t = 0; t < obs.size(); ++t)
            w *= gm.A()(obs[t], states[t]);
        out.joint[s] = w;
        evidence += w;
    }
    if (evidence <= 0.0)
        throw std::domain_error("exact_posterior: observation sequence has zero "
                                "probability");
    for (std::size_t s = 0; s < n_seq; ++s) {
        out.joint[s] /= evidence;
        std::size_t code = s;
        for (std::size_t t = 0; t < T; ++t) {
            out.marginals[t][code % n] += out.joint[s];
            code /= n;
        }
    }
    out.neg_log_evidence = -std::log(evidence);
    return out;
}

// The two single-step decompositions of F: divergence + surprise and
// complexity - accuracy, alongside the direct evaluation.
struct FreeEnergyReport {
    double direct = 0.0;
    double divergence_plus_surprise = 0.0;
    double complexity_minus_accuracy = 0.0;
    double divergence = 0.0;
    double surprise = 0.0;
    double complexity = 0.0;
    double accuracy = 0.0;
};

inline FreeEnergyReport free_energy_decompositions(const GenerativeModel& gm,
                                                   const Categorical& q,
                                                   std::size_t obs) {
    const std::size_t n = gm.n_concepts();
    if (q.size() != n)
        throw std::invalid_argument("free_energy_decompositions: q dimension mismatch");
    if (obs >= gm.n_stimuli())
        throw std::invalid_argument("free_energy_decompositions: observation out of range");

    double p_obs = 0.0;
    std::vector<double> post(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        post[i] = gm.A()(obs, i) * gm.D()[i];
        p_obs += post[i];
    }
    if (p_obs <= 0.0)
        throw std::domain_error("free_energy_decompositions: observation has zero "
                                "probability under the model");
    for (double& x : post) x /= p_obs;

    FreeEnergyReport rep;
    for (std::size_t i = 0; i < n; ++i) {
        if (q[i] > 0.0) {
            rep.direct += q[i] * (std::log(q[i]) -
                                  detail::safe_log(gm.D()[i] * gm.A()(obs, i)));
            rep.divergence += q[i] * (std::log(q[i]) - detail::safe_log(post[i]));
            rep.complexity += q[i] * (std::log(q[i]) - detail::safe_log(gm.D()[i]));
            rep.accuracy += q[i] * detail::safe_log(gm.A()(obs, i));
        }
    }
    rep.surprise = -std::log(p_obs);
    rep.divergence_plus_surprise = rep.divergence + rep.surprise;
    rep.complexity_minus_accuracy = rep.complexity - rep.accuracy;
    return rep;
}

// Per-policy expected free energy, split per time step into risk (KL of the
// predicted stimulus distribution to the preference C_tau) and ambiguity
// (posterior-expected entropy of the likelihood columns).
struct EFEReport {
    std::vector<double> per_policy;              // G(pi)
    std::vector<std::vector<double>> risk;       // [pi][tau]
    std::vector<std::vector<double>> ambiguity;  // [pi][tau]
};

inline EFEReport expected_free_energy(
    const GenerativeModel& gm,
    const std::vector<std::vector<std::vector<double>>>& beliefs) {
    const std::size_t T = gm.horizon();
    const std::size_t n = gm.n_concepts();
    const std::size_t m = gm.n_stimuli();
    if (beliefs.size() != gm.policies().size())
        throw std::invalid_argument("expected_free_energy: one belief set per policy");

    std::vector<double> col_entropy(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) col_entropy[j] = entropy_raw(gm.A().col(j));

    EFEReport rep;
    for (std::size_t p = 0; p < beliefs.size(); ++p) {
        if (beliefs[p].size() != T)
            throw std::invalid_argument("expected_free_energy: need beliefs for every tau");
        std::vector<double> risk(T, 0.0), ambiguity(T, 0.0);
        double total = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const std::vector<double>& qt = beliefs[p][t];
            if (qt.size() != n)
                throw std::invalid_argument("expected_free_energy: belief dimension");
            const std::vector<double> pred = gm.A().mul(qt);
            for (std::size_t o = 0; o < m; ++o) {
                if (pred[o] > 0.0) {
                    if (gm.C()[t][o] <= 0.0)
                        throw std::domain_error(
                            "expected_free_energy: preference C has zero mass on a "
                            "predicted stimulus; risk undefined");
                    risk[t] += pred[o] * std::log(pred[o] / gm.C()[t][o]);
                }
            }
            for (std::size_t j = 0; j < n; ++j) ambiguity[t] += qt[j] * col_entropy[j];
            total += risk[t] + ambiguity[t];
        }
        rep.per_policy.push_back(total);
        rep.risk.push_back(std::move(risk));
        rep.ambiguity.push_back(std::move(ambiguity));
    }
    return rep;
}

// Policy posterior q(pi) = softmax(-(F(pi) + gamma * G(pi))).
inline Categorical plan(const std::vector<double>& F_per_policy,
                        const std::vector<double>& G_per_policy, double gamma) {
    if (F_per_policy.size() != G_per_policy.size() || F_per_policy.empty())
        throw std::invalid_argument("plan: F and G must be same nonempty length");
    std::vector<double> values(F_per_policy.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = -(F_per_policy[i] + gamma * G_per_policy[i]);
    return softmax(values, 1.0);
}

// Action with the largest posterior policy mass at step tau (1-based); ties
// go to the lowest action index.
inline std::size_t select_action(const Categorical& q_pi,
                                 const std::vector<Policy>& policies,
                                 std::size_t tau, std::size_t n_actions) {
    if (q_pi.size() != policies.size())
        throw std::invalid_argument("select_action: q_pi / policy count mismatch");
    if (tau < 1)
        throw std::invalid_argument("select_action: tau is 1-based");
    std::vector<double> mass(n_actions, 0.0);
    for (std::size_t p = 0; p < policies.size(); ++p) {
        if (tau - 1 >= policies[p].actions.size())
            throw std::invalid_argument("select_action: tau beyond policy length");
        mass[policies[p].actions[tau - 1]] += q_pi[p];
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a < n_actions; ++a)
        if (mass[a] > mass[best]) best = a;
    return best;
}

// Per-step surprisal -ln p(phi_tau) under the policy-mixed one-step-ahead
// predictive, plus the running mean (the empirical input-entropy estimate).
// Filtering is exact per policy: predict through B, score, then condition.
struct SurprisalTrace {
    std::vector<double> per_step;   // -ln p(phi_tau), +inf recorded when p = 0
    std::vector<double> running_mean;
    double time_average = 0.0;
    bool saw_zero_probability = false;
};

inline SurprisalTrace surprisal_trace(const GenerativeModel& gm,
                                      const Categorical& q_pi,
                                      const std::vector<std::size_t>& obs) {
    if (q_pi.size() != gm.policies().size())
        throw std::invalid_argument("surprisal_trace: q_pi / policy count mismatch");
    if (obs.size() > gm.horizon())
        throw std::invalid_argument("surprisal_trace: more observations than steps");
    const std::size_t n = gm.n_concepts();
    const std::size_t P = gm.policies().size();

    std::vector<std::vector<double>> filt(P, gm.D().probs());
    SurprisalTrace trace;
    double sum = 0.0;
    for (std::size_t t = 0; t < obs.size(); ++t) {
        const std::size_t phi = obs[t];
        if (phi >= gm.n_stimuli())
            throw std::invalid_argument("surprisal_trace: observation out of alphabet");
        double predictive = 0.0;
        std::vector<std::vector<double>> prior(P);
        for (std::size_t p = 0; p < P; ++p) {
            prior[p] = t == 0 ? filt[p]
                              : gm.B()[gm.policies()[p].actions[t - 1]].mul(filt[p]);
            double pp = 0.0;
            for (std::size_t i = 0; i < n; ++i) pp += gm.A()(phi, i) * prior[p][i];
            predictive += q_pi[p] * pp;
        }
        double s;
        if (predictive <= 0.0) {
            s = std::numeric_limits<double>::infinity();
            trace.saw_zero_probability = true;
        } else {
            s = -std::log(predictive);
        }
        trace.per_step.push_back(s);
        sum += s;
        trace.running_mean.push_back(sum / static_cast<double>(t + 1));
        // condition each policy's filter on the observation
        for (std::size_t p = 0; p < P; ++p) {
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                prior[p][i] *= gm.A()(phi, i);
                norm += prior[p][i];
            }
            if (norm > 0.0)
                for (double& x : prior[p]) x /= norm;
            else
                prior[p].assign(n, 1.0 / n);
            filt[p] = prior[p];
        }
    }
    trace.time_average = trace.running_mean.empty() ? 0.0 : trace.running_mean.back();
    return trace;
}

// Model-marginal stimulus probability under the initial prior; the window
// statistic the expansion trigger is judged against.
inline double window_surprisal(const GenerativeModel& gm,
                               const std::vector<std::size_t>& window) {
    if (window.empty())
        throw std::invalid_argument("window_surprisal: empty window");
    double total = 0.0;
    for (std::size_t phi : window) {
        if (phi >= gm.n_stimuli())
            throw std::invalid_argument("window_surprisal: observation out of alphabet");
        double p = 0.0;
        for (std::size_t j = 0; j < gm.n_concepts(); ++j)
            p += gm.A()(phi, j) * gm.D()[j];
        total += p > 0.0 ? -std::log(p) : -std::log(detail::kLogFloor);
    }
    return total / static_cast<double>(window.size());
}

struct ExpansionResult {
    bool triggered = false;
    double window_surprisal_before = 0.0;
    GenerativeModel model;
    DirichletCounts counts;
};

// Appends one hidden concept when the recent stimulus window is persistently
// unexplained (average surprisal above the threshold). The new concept's
// a-column starts at the prior concentration plus the window's stimulus
// counts; b gains a row and column of prior concentration per action; d
// gains one prior-concentration entry. Existing counts are untouched.
inline ExpansionResult expand_concepts(const GenerativeModel& gm,
                                       const DirichletCounts& counts,
                                       const std::vector<std::size_t>& obs_window,
                                       double threshold,
                                       double prior_concentration = 0.1) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("expand_concepts: threshold must be > 0");
    if (!(prior_concentration > 0.0))
        throw std::invalid_argument("expand_concepts: prior concentration must be > 0");

    ExpansionResult res{false, window_surprisal(gm, obs_window), gm, counts};
    if (res.window_surprisal_before <= threshold) return res;

    const std::size_t n = counts.n_concepts();
    const std::size_t m = counts.n_stimuli();

    Matrix a(m, n + 1);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = counts.a(i, j);
    for (std::size_t i = 0; i < m; ++i) a(i, n) = prior_concentration;
    for (std::size_t phi : obs_window) a(phi, n) += 1.0;

    std::vector<Matrix> b;
    for (const Matrix& old : counts.b) {
        Matrix nb(n + 1, n + 1, prior_concentration);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) nb(i, j) = old(i, j);
        b.push_back(std::move(nb));
    }

    std::vector<double> d = counts.d;
    d.push_back(prior_concentration);

    res.counts = DirichletCounts{std::move(a), std::move(b), std::move(d)};
    res.model = expected_model(res.counts, gm.gamma(), gm.horizon(), gm.C(),
                               gm.policies());
    res.triggered = true;
    return res;
}

} // namespace kge
