#pragma once

// Exhaustive policy planning: enumerate action sequences, roll beliefs
// forward, sum per-step functionals, and form the policy posterior
// Q(pi) proportional to exp(-gamma * total).

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "efelab/functionals.hpp"
#include "efelab/inference.hpp"
#include "efelab/model.hpp"
#include "efelab/random.hpp"

namespace efelab {

inline constexpr unsigned long long kMaxPolicies = 100000;

struct Policy {
    std::vector<std::size_t> actions;
    bool operator==(Policy const&) const = default;
    auto operator<=>(Policy const&) const = default;
};

/// All A^T action sequences in lexicographic order.
inline std::vector<Policy> enumerate_policies(std::size_t num_actions, std::size_t horizon) {
    if (num_actions == 0 || horizon == 0) throw error("enumerate_policies needs A >= 1 and T >= 1");
    unsigned long long count = 1;
    for (std::size_t t = 0; t < horizon; ++t) {
        count *= num_actions;
        if (count > kMaxPolicies) {
            // Finish the power for the error message, saturating on overflow.
            for (std::size_t u = t + 1; u < horizon && count <= (~0ULL) / num_actions; ++u)
                count *= num_actions;
            throw policy_space_too_large(count);
        }
    }
    std::vector<Policy> out;
    out.reserve(count);
    std::vector<std::size_t> cur(horizon, 0);
    for (unsigned long long i = 0; i < count; ++i) {
        out.push_back({cur});
        for (std::size_t pos = horizon; pos-- > 0;) {
            if (++cur[pos] < num_actions) break;
            cur[pos] = 0;
        }
    }
    return out;
}

/// Predicted states for steps 1..T under the policy. `eta` > 0 attaches a
/// posterior override mixing each exact conditional with the uniform.
inline std::vector<PredictiveState> rollout(Categorical const& belief0, Policy const& policy,
                                            GenerativeModel const& m, double eta = 0.0) {
    if (belief0.size() != m.num_states())
        throw dimension_mismatch("rollout belief", m.num_states(), belief0.size());
    std::vector<PredictiveState> out;
    out.reserve(policy.actions.size());
    Categorical belief = belief0;
    for (std::size_t a : policy.actions) {
        belief = belief_predict(belief, a, m);
        out.push_back(perturbed_predictive_state(belief, m.likelihood(), eta));
    }
    return out;
}

struct PolicyEvaluation {
    Policy policy;
    Functional functional = Functional::efe;
    std::vector<FunctionalReport> per_step;
    double total = 0.0;
};

inline PolicyEvaluation evaluate_policy(Policy const& policy, Functional functional,
                                        Categorical const& belief0, GenerativeModel const& m,
                                        PreferenceModel const& pref, double eta = 0.0) {
    PolicyEvaluation ev{policy, functional, {}, 0.0};
    for (auto const& ps : rollout(belief0, policy, m, eta)) {
        ev.per_step.push_back(evaluate_step(functional, ps, pref));
        ev.total += ev.per_step.back().value;
    }
    return ev;
}

/// softmax(-gamma * totals)
inline Categorical policy_posterior(std::vector<PolicyEvaluation> const& evals, double gamma = 1.0) {
    if (evals.empty()) throw error("policy_posterior needs at least one evaluation");
    std::vector<double> neg(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) {
        if (evals[i].functional != evals.front().functional) throw mixed_functionals();
        neg[i] = -evals[i].total;
    }
    return softmax(neg, gamma);
}

enum class SelectionMode { deterministic, stochastic };

/// Index of the chosen policy: the lexicographically first argmax, or a
/// seeded draw.
inline std::size_t select_policy(Categorical const& posterior, SelectionMode mode, Rng* rng = nullptr) {
    if (mode == SelectionMode::stochastic) {
        if (!rng) throw error("stochastic selection needs a generator");
        return rng->categorical(posterior.probs());
    }
    return posterior.argmax();  // max_element returns the first maximum
}

inline std::size_t select_action(Categorical const& posterior, std::vector<Policy> const& policies,
                                 SelectionMode mode = SelectionMode::deterministic,
                                 Rng* rng = nullptr) {
    if (policies.empty() || posterior.size() != policies.size())
        throw dimension_mismatch("select_action", policies.size(), posterior.size());
    return policies[select_policy(posterior, mode, rng)].actions.front();
}

struct PlanResult {
    std::vector<Policy> policies;
    std::vector<PolicyEvaluation> evaluations;
    Categorical posterior = Categorical::uniform(1);
};

/// Evaluates every policy of the model's horizon. Work is spread over
/// `threads` workers; results are stored in enumeration order.
inline PlanResult plan(Functional functional, Categorical const& belief0, GenerativeModel const& m,
                       PreferenceModel const& pref, double gamma = 1.0, double eta = 0.0,
                       unsigned threads = 1) {
    PlanResult r;
    r.policies = enumerate_policies(m.num_actions(), m.horizon());
    r.evaluations.resize(r.policies.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < r.policies.size(); i = next++)
            r.evaluations[i] = evaluate_policy(r.policies[i], functional, belief0, m, pref, eta);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(r.policies.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    r.posterior = policy_posterior(r.evaluations, gamma);
    return r;
}

}  // namespace efelab
