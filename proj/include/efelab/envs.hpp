#pragma once

// Ground-truth environments and the two shipped tasks.
//
// Cue task: the context (0 or 1) is hidden; visiting the cue location reveals
// it. States are indexed context * 2 + location with location 0 = start and
// 1 = cue. Observations are {null, cue0, cue1}; actions are {stay, go-cue}.
//
// Bandit: a start state and two absorbing arms. Pulling an arm moves there;
// each arm emits "reward" with its own probability.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "efelab/functionals.hpp"
#include "efelab/model.hpp"
#include "efelab/model_io.hpp"
#include "efelab/random.hpp"

namespace efelab {

struct Labels {
    std::vector<std::string> states;
    std::vector<std::string> observations;
    std::vector<std::string> actions;
};

struct Task {
    GenerativeModel model;
    PreferenceModel preferences;
    Labels labels;
    std::size_t true_state = 0;  // initial ground-truth state for simulation
};

/// Single-owner mutable world. Emissions follow the model's tables exactly.
class Environment {
  public:
    Environment(GenerativeModel model, std::size_t true_state, std::uint64_t seed)
        : model_(std::move(model)), state_(true_state), rng_(seed) {
        if (state_ >= model_.num_states())
            throw index_out_of_range("true state", state_, model_.num_states());
    }

    /// Moves to a state drawn from the transition column of the current
    /// state, then emits an observation from the new state's likelihood column.
    std::size_t step(std::size_t action) {
        auto const next = model_.transition(action).column(state_);
        state_ = rng_.categorical(next.probs());
        auto const emission = model_.likelihood().column(state_);
        return rng_.categorical(emission.probs());
    }

    std::size_t true_state() const noexcept { return state_; }
    GenerativeModel const& model() const noexcept { return model_; }

  private:
    GenerativeModel model_;
    std::size_t state_;
    Rng rng_;
};

inline Task cue_task_factory() {
    constexpr std::size_t S = 4, O = 3;
    auto idx = [](std::size_t ctx, std::size_t loc) { return ctx * 2 + loc; };
    ModelData d;
    d.num_states = S;
    d.num_obs = O;
    d.num_actions = 2;
    d.horizon = 1;
    d.likelihood = Matrix(O, S);
    for (std::size_t ctx = 0; ctx < 2; ++ctx) {
        d.likelihood(0, idx(ctx, 0)) = 1.0;
        d.likelihood(1 + ctx, idx(ctx, 1)) = 1.0;
    }
    for (std::size_t a = 0; a < 2; ++a) {
        Matrix t(S, S);
        for (std::size_t ctx = 0; ctx < 2; ++ctx)
            for (std::size_t loc = 0; loc < 2; ++loc)
                t(idx(ctx, a == 1 ? 1 : loc), idx(ctx, loc)) = 1.0;
        d.transitions.push_back(std::move(t));
    }
    d.initial_prior = {0.5, 0.0, 0.5, 0.0};
    return {GenerativeModel::from_data(d),
            {PreferenceKind::observations, Categorical::uniform(O)},
            {{"ctx0_start", "ctx0_cue", "ctx1_start", "ctx1_cue"},
             {"null", "cue0", "cue1"},
             {"stay", "go_cue"}},
            0};
}

/// Hand-derived cue-task policy totals, indexed like enumerate_policies(2, 1):
/// [stay, go-cue]. Preferences are uniform, so every step has extrinsic value
/// ln 3. Staying predicts the null observation with certainty and learns
/// nothing; going to the cue splits the observation between cue0 and cue1 and
/// resolves the context, an information gain of ln 2. Likelihoods are
/// deterministic and the conditional is exact, so the posterior error and the
/// likelihood entropy both vanish.
///   EFE  = extrinsic - IG
///   FEF  = EFE + IG = extrinsic
///   FEEF = KL[J || B] = extrinsic - IG
///   GFE  = FEEF - MI, and MI = H[q(o)] for a deterministic likelihood
inline std::vector<double> cue_task_hand_totals(Functional f) {
    double const ln2 = std::log(2.0), ln3 = std::log(3.0);
    switch (f) {
        case Functional::efe: return {ln3, ln3 - ln2};
        case Functional::fef: return {ln3, ln3};
        case Functional::feef: return {ln3, ln3 - ln2};
        case Functional::gfe: return {ln3, ln3 - 2.0 * ln2};
    }
    return {};
}

/// Reward probabilities are taken verbatim so that swapped arms are exact
/// mirror images. `pref` defaults to 0.99 mass on reward.
inline Task bandit_factory(double reward_arm0 = 0.9, double reward_arm1 = 0.1,
                           std::optional<PreferenceModel> pref = std::nullopt) {
    for (double p : {reward_arm0, reward_arm1})
        if (!(p >= 0.0 && p <= 1.0)) throw invalid_distribution("reward probability outside [0, 1]");
    auto complement = [](double p) { return p == 0.1 ? 0.9 : p == 0.9 ? 0.1 : 1.0 - p; };
    ModelData d;
    d.num_states = 3;
    d.num_obs = 2;
    d.num_actions = 2;
    d.horizon = 1;
    d.likelihood = Matrix(2, 3, {0.5, complement(reward_arm0), complement(reward_arm1),
                                 0.5, reward_arm0, reward_arm1});
    for (std::size_t a = 0; a < 2; ++a) {
        Matrix t(3, 3);
        t(1 + a, 0) = 1.0;
        t(1, 1) = 1.0;
        t(2, 2) = 1.0;
        d.transitions.push_back(std::move(t));
    }
    d.initial_prior = {1.0, 0.0, 0.0};
    PreferenceModel p = pref ? *pref
                             : PreferenceModel{PreferenceKind::observations,
                                               Categorical(std::vector<double>{0.01, 0.99})};
    return {GenerativeModel::from_data(d),
            std::move(p),
            {{"start", "arm0", "arm1"}, {"no_reward", "reward"}, {"pull_arm0", "pull_arm1"}},
            0};
}

/// Model-file text for a task, including its preferences and true state.
inline std::string task_fixture(Task const& t) {
    return serialize_model(t.model, t.preferences, t.true_state);
}

}  // namespace efelab
