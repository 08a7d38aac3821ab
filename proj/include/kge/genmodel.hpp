#pragma once

// Discrete generative model: likelihood A, per-action transitions B,
// stimulus preferences C, initial prior D, precision gamma, horizon T,
// explicit policy set, and the Dirichlet counts backing A, B, D.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kge/matrix.hpp"
#include "kge/probmath.hpp"

namespace kge {

// A fixed action sequence, one action per transition (length T - 1).
struct Policy {
    std::vector<std::size_t> actions;

    bool operator==(const Policy&) const = default;
};

// Concentration parameters backing A, B, D. Strictly positive.
struct DirichletCounts {
    Matrix a;               // m x n
    std::vector<Matrix> b;  // per action, n x n
    std::vector<double> d;  // length n

    void validate() const {
        auto check = [](const std::vector<double>& v, const char* what) {
            for (double x : v)
                if (!(x > 0.0))
                    throw std::invalid_argument(std::string("DirichletCounts: non-positive ") + what);
        };
        check(a.data(), "a entry");
        for (const Matrix& m : b) check(m.data(), "b entry");
        check(d, "d entry");
        for (const Matrix& m : b)
            if (m.rows() != a.cols() || m.cols() != a.cols())
                throw std::invalid_argument("DirichletCounts: b dimension mismatch");
        if (d.size() != a.cols())
            throw std::invalid_argument("DirichletCounts: d dimension mismatch");
    }

    std::size_t n_concepts() const { return a.cols(); }
    std::size_t n_stimuli() const { return a.rows(); }

    bool operator==(const DirichletCounts&) const = default;
};

class GenerativeModel {
public:
    GenerativeModel(Matrix A, std::vector<Matrix> B, std::vector<Categorical> C,
                    Categorical D, double gamma, std::size_t horizon,
                    std::vector<Policy> policies)
        : A_(std::move(A)),
          B_(std::move(B)),
          C_(std::move(C)),
          D_(std::move(D)),
          gamma_(gamma),
          horizon_(horizon),
          policies_(std::move(policies)) {
        if (horizon_ < 1)
            throw std::invalid_argument("GenerativeModel: horizon must be >= 1");
        if (!(gamma_ >= 0.0))
            throw std::invalid_argument("GenerativeModel: gamma must be >= 0");
        const std::size_t n = A_.cols();
        check_stochastic(A_, "A");
        if (B_.empty())
            throw std::invalid_argument("GenerativeModel: no transition matrices");
        for (const Matrix& b : B_) {
            if (b.rows() != n || b.cols() != n)
                throw std::invalid_argument("GenerativeModel: B dimension mismatch");
            check_stochastic(b, "B");
        }
        if (C_.size() != horizon_)
            throw std::invalid_argument("GenerativeModel: need one C per time step");
        for (const Categorical& c : C_)
            if (c.size() != A_.rows())
                throw std::invalid_argument("GenerativeModel: C dimension mismatch");
        if (D_.size() != n)
            throw std::invalid_argument("GenerativeModel: D dimension mismatch");
        if (policies_.empty())
            throw std::invalid_argument("GenerativeModel: empty policy set");
        for (const Policy& p : policies_) {
            if (p.actions.size() != horizon_ - 1)
                throw std::invalid_argument("GenerativeModel: policy length must be T - 1");
            for (std::size_t a : p.actions)
                if (a >= B_.size())
                    throw std::invalid_argument("GenerativeModel: policy action out of range");
        }
    }

    const Matrix& A() const { return A_; }
    const std::vector<Matrix>& B() const { return B_; }
    const std::vector<Categorical>& C() const { return C_; }
    const Categorical& D() const { return D_; }
    double gamma() const { return gamma_; }
    std::size_t horizon() const { return horizon_; }
    const std::vector<Policy>& policies() const { return policies_; }

    std::size_t n_concepts() const { return A_.cols(); }
    std::size_t n_stimuli() const { return A_.rows(); }
    std::size_t n_actions() const { return B_.size(); }

private:
    static void check_stochastic(const Matrix& m, const char* name) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) {
                if (!(m(i, j) >= 0.0))
                    throw std::invalid_argument(std::string("GenerativeModel: negative entry in ") + name);
                sum += m(i, j);
            }
            if (std::abs(sum - 1.0) > kProbTolerance)
                throw std::invalid_argument(std::string("GenerativeModel: column of ") +
                                            name + " does not sum to 1");
        }
    }

    Matrix A_;
    std::vector<Matrix> B_;
    std::vector<Categorical> C_;
    Categorical D_;
    double gamma_;
    std::size_t horizon_;
    std::vector<Policy> policies_;
};

// A, B, D as column-wise Dirichlet means of the counts.
inline GenerativeModel expected_model(const DirichletCounts& counts, double gamma,
                                      std::size_t horizon, std::vector<Categorical> C,
                                      std::vector<Policy> policies) {
    counts.validate();
    Matrix A = normalize_columns(counts.a);
    std::vector<Matrix> B;
    B.reserve(counts.b.size());
    for (const Matrix& b : counts.b) B.push_back(normalize_columns(b));
    double dsum = 0.0;
    for (double x : counts.d) dsum += x;
    std::vector<double> D(counts.d.size());
    for (std::size_t i = 0; i < D.size(); ++i) D[i] = counts.d[i] / dsum;
    return GenerativeModel(std::move(A), std::move(B), std::move(C),
                           Categorical(std::move(D)), gamma, horizon,
                           std::move(policies));
}

// All n_actions^depth action sequences, lexicographic. Refuses to enumerate
// past the cap; larger policy spaces must be supplied by the scenario.
inline std::vector<Policy> enumerate_policies(std::size_t n_actions,
                                              std::size_t depth,
                                              std::size_t cap = 4096) {
    if (n_actions < 1)
        throw std::invalid_argument("enumerate_policies: need at least one action");
    double count = 1.0;
    for (std::size_t i = 0; i < depth; ++i) {
        count *= static_cast<double>(n_actions);
        if (count > static_cast<double>(cap))
            throw std::runtime_error(
                "enumerate_policies: policy space exceeds cap of " +
                std::to_string(cap) + "; supply policies explicitly in the scenario");
    }
    std::vector<Policy> out;
    out.reserve(static_cast<std::size_t>(count));
    Policy p{std::vector<std::size_t>(depth, 0)};
    for (;;) {
        out.push_back(p);
        std::size_t k = depth;
        while (k > 0) {
            --k;
            if (++p.actions[k] < n_actions) break;
            p.actions[k] = 0;
            if (k == 0) return out;
        }
        if (depth == 0) return out;
    }
}

// p(obs, states, policy) = D[theta_1] * prior[pi] * prod B * prod A.
inline double joint_probability(const GenerativeModel& gm,
                                const std::vector<std::size_t>& states,
                                const std::vector<std::size_t>& obs,
                                std::size_t policy_index,
                                const Categorical& policy_prior) {
    const std::size_t T = gm.horizon();
    if (states.size() != T || obs.size() != T)
        throw std::invalid_argument("joint_probability: sequences must have length T");
    if (policy_index >= gm.policies().size())
        throw std::invalid_argument("joint_probability: policy index out of range");
    const Policy& pi = gm.policies()[policy_index];
    double p = gm.D()[states[0]] * policy_prior[policy_index];
    for (std::size_t t = 0; t + 1 < T; ++t)
        p *= gm.B()[pi.actions[t]](states[t + 1], states[t]);
    for (std::size_t t = 0; t < T; ++t)
        p *= gm.A()(obs[t], states[t]);
    return p;
}

// One step of a posterior-weighted episode, for Dirichlet updating. tau is
// 1-based within its episode, so a trace may carry several episodes back to
// back and updating stays additive under concatenation.
struct PosteriorStep {
    std::size_t tau;             // 1-based time step within the episode
    std::size_t obs;             // stimulus observed at this step
    std::vector<double> q;       // marginal posterior over concepts
    std::optional<std::size_t> action_to_next; // action taken toward tau + 1
};

// Conjugate accumulation: a[obs,:] += eta*q per step, b_action += eta *
// outer(q_next, q) per within-episode transition, d += eta*q at tau = 1.
inline DirichletCounts update_dirichlet(DirichletCounts counts,
                                        const std::vector<PosteriorStep>& trace,
                                        double eta = 1.0) {
    if (trace.empty()) return counts;
    const std::size_t n = counts.n_concepts();
    for (const PosteriorStep& step : trace) {
        if (step.q.size() != n)
            throw std::invalid_argument("update_dirichlet: posterior dimension mismatch");
        if (step.obs >= counts.n_stimuli())
            throw std::invalid_argument("update_dirichlet: observation out of range");
    }
    for (std::size_t t = 0; t < trace.size(); ++t) {
        for (std::size_t i = 0; i < n; ++i)
            counts.a(trace[t].obs, i) += eta * trace[t].q[i];
        if (trace[t].tau == 1)
            for (std::size_t i = 0; i < n; ++i) counts.d[i] += eta * trace[t].q[i];
        if (t + 1 < trace.size() && trace[t].action_to_next &&
            trace[t + 1].tau == trace[t].tau + 1) {
            const std::size_t act = *trace[t].action_to_next;
            if (act >= counts.b.size())
                throw std::invalid_argument("update_dirichlet: action out of range");
            Matrix& b = counts.b[act];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    b(i, j) += eta * trace[t + 1].q[i] * trace[t].q[j];
        }
    }
    return counts;
}

} // namespace kge
