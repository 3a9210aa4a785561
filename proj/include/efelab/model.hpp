#pragma once

// POMDP generative models, preference models, and biased joints.

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "efelab/errors.hpp"
#include "efelab/probability.hpp"
#include "efelab/random.hpp"

namespace efelab {

/// Unvalidated model tables, as read from a file or assembled by hand.
struct ModelData {
    std::size_t num_states = 0;
    std::size_t num_obs = 0;
    std::size_t num_actions = 0;
    std::size_t horizon = 0;
    Matrix likelihood;                // num_obs x num_states, p(o | x)
    std::vector<Matrix> transitions;  // per action, num_states x num_states, p(x' | x, a)
    std::vector<double> initial_prior;
};

/// One violated invariant. Indices that do not apply are left empty.
struct Violation {
    std::string component;  // "likelihood", "transitions[1]", "initial_prior", ...
    std::optional<std::size_t> row;
    std::optional<std::size_t> column;
    double deviation = 0.0;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }

    std::string describe() const {
        std::ostringstream os;
        for (auto const& v : violations) {
            os << v.component;
            if (v.row) os << " row " << *v.row;
            if (v.column) os << " column " << *v.column;
            os << ": " << v.message << " (deviation " << v.deviation << ")\n";
        }
        return os.str();
    }
};

class validation_error : public error {
  public:
    explicit validation_error(ValidationReport report)
        : error("model failed validation:\n" + report.describe()), report_(std::move(report)) {}
    ValidationReport const& report() const noexcept { return report_; }

  private:
    ValidationReport report_;
};

namespace detail {

inline void check_stochastic(std::string const& name, Matrix const& m, std::size_t rows,
                             std::size_t cols, ValidationReport& out) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream msg;
        msg << "shape " << m.rows() << "x" << m.cols() << ", expected " << rows << "x" << cols;
        out.violations.push_back({name, {}, {}, 0.0, msg.str()});
        return;
    }
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) {
            double const v = m(r, c);
            if (!std::isfinite(v))
                out.violations.push_back({name, r, c, 0.0, "entry is not finite"});
            else if (v < 0.0)
                out.violations.push_back({name, r, c, -v, "negative entry"});
        }
        double const dev = std::abs(m.column_sum(c) - 1.0);
        if (!(dev <= kSumTolerance))
            out.violations.push_back({name, {}, c, dev, "column does not sum to 1"});
    }
}

}  // namespace detail

/// Lists every violated invariant; empty iff the data describes a valid model.
inline ValidationReport validate_model(ModelData const& d) {
    ValidationReport out;
    if (d.num_states == 0) out.violations.push_back({"num_states", {}, {}, 0.0, "must be >= 1"});
    if (d.num_obs == 0) out.violations.push_back({"num_obs", {}, {}, 0.0, "must be >= 1"});
    if (d.num_actions == 0) out.violations.push_back({"num_actions", {}, {}, 0.0, "must be >= 1"});
    if (d.horizon == 0) out.violations.push_back({"horizon", {}, {}, 0.0, "must be >= 1"});
    if (!out.ok()) return out;

    detail::check_stochastic("likelihood", d.likelihood, d.num_obs, d.num_states, out);
    if (d.transitions.size() != d.num_actions) {
        out.violations.push_back({"transitions", {}, {}, 0.0,
                                  "expected " + std::to_string(d.num_actions) + " blocks, got " +
                                      std::to_string(d.transitions.size())});
    }
    for (std::size_t a = 0; a < d.transitions.size(); ++a)
        detail::check_stochastic("transitions[" + std::to_string(a) + "]", d.transitions[a],
                                 d.num_states, d.num_states, out);

    if (d.initial_prior.size() != d.num_states) {
        out.violations.push_back({"initial_prior", {}, {}, 0.0,
                                  "expected " + std::to_string(d.num_states) + " entries, got " +
                                      std::to_string(d.initial_prior.size())});
    } else {
        double total = 0.0;
        for (std::size_t i = 0; i < d.initial_prior.size(); ++i) {
            double const v = d.initial_prior[i];
            if (!std::isfinite(v))
                out.violations.push_back({"initial_prior", i, {}, 0.0, "entry is not finite"});
            else if (v < 0.0)
                out.violations.push_back({"initial_prior", i, {}, -v, "negative entry"});
            total += v;
        }
        double const dev = std::abs(total - 1.0);
        if (!(dev <= kSumTolerance))
            out.violations.push_back({"initial_prior", {}, {}, dev, "does not sum to 1"});
    }
    return out;
}

/// A validated POMDP. Immutable once built.
class GenerativeModel {
  public:
    /// Throws validation_error carrying the full report when `d` is invalid.
    static GenerativeModel from_data(ModelData const& d) {
        auto report = validate_model(d);
        if (!report.ok()) throw validation_error(std::move(report));
        std::vector<StochasticMatrix> transitions;
        transitions.reserve(d.transitions.size());
        for (auto const& t : d.transitions) transitions.emplace_back(t);
        return GenerativeModel(StochasticMatrix(d.likelihood), std::move(transitions),
                               Categorical(d.initial_prior), d.horizon);
    }

    GenerativeModel(StochasticMatrix likelihood, std::vector<StochasticMatrix> transitions,
                    Categorical initial_prior, std::size_t horizon)
        : likelihood_(std::move(likelihood)),
          transitions_(std::move(transitions)),
          prior_(std::move(initial_prior)),
          horizon_(horizon) {
        ModelData d = data();
        auto report = validate_model(d);
        if (!report.ok()) throw validation_error(std::move(report));
    }

    std::size_t num_states() const noexcept { return likelihood_.cols(); }
    std::size_t num_obs() const noexcept { return likelihood_.rows(); }
    std::size_t num_actions() const noexcept { return transitions_.size(); }
    std::size_t horizon() const noexcept { return horizon_; }

    StochasticMatrix const& likelihood() const noexcept { return likelihood_; }
    StochasticMatrix const& transition(std::size_t action) const {
        if (action >= transitions_.size())
            throw index_out_of_range("action", action, transitions_.size());
        return transitions_[action];
    }
    std::vector<StochasticMatrix> const& transitions() const noexcept { return transitions_; }
    Categorical const& initial_prior() const noexcept { return prior_; }

    GenerativeModel with_horizon(std::size_t horizon) const {
        return GenerativeModel(likelihood_, transitions_, prior_, horizon);
    }
    GenerativeModel with_likelihood(StochasticMatrix likelihood) const {
        return GenerativeModel(std::move(likelihood), transitions_, prior_, horizon_);
    }
    GenerativeModel with_prior(Categorical prior) const {
        return GenerativeModel(likelihood_, transitions_, std::move(prior), horizon_);
    }

    ModelData data() const {
        ModelData d;
        d.num_states = num_states();
        d.num_obs = num_obs();
        d.num_actions = num_actions();
        d.horizon = horizon_;
        d.likelihood = likelihood_.matrix();
        for (auto const& t : transitions_) d.transitions.push_back(t.matrix());
        d.initial_prior = prior_.probs();
        return d;
    }

    bool operator==(GenerativeModel const&) const = default;

  private:
    StochasticMatrix likelihood_;
    std::vector<StochasticMatrix> transitions_;
    Categorical prior_;
    std::size_t horizon_;
};

enum class PreferenceKind { observations, states };

inline char const* to_string(PreferenceKind k) noexcept {
    return k == PreferenceKind::observations ? "observations" : "states";
}

/// Time-homogeneous preference distribution over observations or states.
struct PreferenceModel {
    PreferenceKind kind = PreferenceKind::observations;
    Categorical dist = Categorical::uniform(1);

    bool operator==(PreferenceModel const&) const = default;
};

/// Joint over (observation, state) at one future step, built from preferences.
struct BiasedJoint {
    Joint2 joint;
    PreferenceKind provenance;
};

/// Observation preferences give p~(o) * Q(x | o), with Q(x | o) the exact
/// conditional of `predictive`. State preferences give p(o | x) * p~(x).
inline BiasedJoint build_biased_joint(PreferenceModel const& pref, Joint2 const& predictive,
                                      StochasticMatrix const& likelihood) {
    std::size_t const O = predictive.rows();
    std::size_t const S = predictive.cols();
    if (likelihood.rows() != O || likelihood.cols() != S)
        throw dimension_mismatch("likelihood vs predictive joint", O * S,
                                 likelihood.rows() * likelihood.cols());
    if (pref.kind == PreferenceKind::observations) {
        if (pref.dist.size() != O) throw dimension_mismatch("observation preferences", O, pref.dist.size());
        auto const f = factorize(predictive);
        return {Joint2::compose_transposed(f.col_given_row, pref.dist), PreferenceKind::observations};
    }
    if (pref.dist.size() != S) throw dimension_mismatch("state preferences", S, pref.dist.size());
    return {Joint2::compose(likelihood, pref.dist), PreferenceKind::states};
}

namespace detail {

inline std::vector<double> dirichlet_column(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v) {
        x = rng.exponential();
        total += x;
    }
    for (double& x : v) x /= total;
    return v;
}

inline Matrix dirichlet_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
        auto col = dirichlet_column(rng, rows);
        for (std::size_t r = 0; r < rows; ++r) m(r, c) = col[r];
    }
    return m;
}

}  // namespace detail

struct RandomModel {
    GenerativeModel model;
    PreferenceModel preferences;
};

/// Every column is an independent flat-Dirichlet draw. Draw order: likelihood
/// columns, transition columns action by action, initial prior, observation
/// preferences.
inline RandomModel random_model(std::size_t num_states, std::size_t num_obs,
                                std::size_t num_actions, std::size_t horizon, std::uint64_t seed) {
    Rng rng(seed);
    ModelData d;
    d.num_states = num_states;
    d.num_obs = num_obs;
    d.num_actions = num_actions;
    d.horizon = horizon;
    d.likelihood = detail::dirichlet_matrix(rng, num_obs, num_states);
    for (std::size_t a = 0; a < num_actions; ++a)
        d.transitions.push_back(detail::dirichlet_matrix(rng, num_states, num_states));
    d.initial_prior = detail::dirichlet_column(rng, num_states);
    PreferenceModel pref{PreferenceKind::observations,
                         Categorical(detail::dirichlet_column(rng, num_obs))};
    return {GenerativeModel::from_data(d), std::move(pref)};
}

}  // namespace efelab
