#pragma once

// Per-step objective functionals over a policy-conditioned predictive state.
//
// Notation used in comments:
//   A(o|x)   model likelihood
//   q(x)     predicted state distribution Q(x | pi)
//   J(o,x)   predictive joint A(o|x) q(x);  q(o) its observation marginal
//   C(x|o)   exact conditional of J
//   Qh(x|o)  posterior used by the functionals: C, or a supplied override
//   M(o,x)   q(o) Qh(x|o), the measure every expectation is taken under
//            (M == J whenever no override is supplied)
//   B(o,x)   biased joint, factorized as p~(o) p~(x|o) = p~(o|x) p~(x)
//
// Every functional is a cost. Report terms are stored with the sign they
// carry in the sum, so each listed decomposition reassembles `value` by plain
// addition. Terms not listed in any decomposition are auxiliary quantities.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "efelab/inference.hpp"
#include "efelab/model.hpp"
#include "efelab/probability.hpp"

namespace efelab {

/// Everything known about one future step under one policy.
struct PredictiveState {
    StochasticMatrix likelihood;   // A, O x S
    Categorical q_x;               // Q(x | pi)
    Joint2 joint;                  // Q(o, x | pi)
    Categorical q_o;               // Q(o | pi)
    StochasticMatrix q_x_given_o;  // exact conditional, S x O
    std::optional<StochasticMatrix> posterior_override;

    /// The conditional the functionals use: the override when present.
    StochasticMatrix const& posterior() const noexcept {
        return posterior_override ? *posterior_override : q_x_given_o;
    }
    PosteriorSource posterior_source() const noexcept {
        return posterior_override ? PosteriorSource::supplied_approximation
                                  : PosteriorSource::exact_bayes;
    }
};

inline PredictiveState predictive_state(Categorical const& q_x, StochasticMatrix const& likelihood,
                                        std::optional<StochasticMatrix> posterior_override = {}) {
    if (q_x.size() != likelihood.cols())
        throw dimension_mismatch("predictive state", likelihood.cols(), q_x.size());
    if (posterior_override && (posterior_override->rows() != likelihood.cols() ||
                               posterior_override->cols() != likelihood.rows()))
        throw dimension_mismatch("posterior override", likelihood.cols() * likelihood.rows(),
                                 posterior_override->rows() * posterior_override->cols());
    Joint2 joint = Joint2::compose(likelihood, q_x);
    auto f = factorize(joint);
    return PredictiveState{likelihood, q_x, std::move(joint), std::move(f.row_marginal),
                           std::move(f.col_given_row), std::move(posterior_override)};
}

inline PredictiveState predictive_state(Categorical const& q_x, GenerativeModel const& m,
                                        std::optional<StochasticMatrix> posterior_override = {}) {
    return predictive_state(q_x, m.likelihood(), std::move(posterior_override));
}

/// Exact conditional mixed at rate eta with the uniform distribution on the
/// support of q(x) (the plain uniform whenever q(x) is strictly positive).
inline PredictiveState perturbed_predictive_state(Categorical const& q_x,
                                                  StochasticMatrix const& likelihood, double eta) {
    auto ps = predictive_state(q_x, likelihood);
    if (eta > 0.0) ps.posterior_override = mix_with_uniform_on_support(ps.q_x_given_o, q_x, eta);
    return ps;
}

enum class Functional { efe, fef, feef, gfe };

inline constexpr Functional kAllFunctionals[] = {Functional::efe, Functional::fef,
                                                 Functional::feef, Functional::gfe};

inline char const* to_string(Functional f) noexcept {
    switch (f) {
        case Functional::efe: return "efe";
        case Functional::fef: return "fef";
        case Functional::feef: return "feef";
        case Functional::gfe: return "gfe";
    }
    return "?";
}

inline std::optional<Functional> parse_functional(std::string_view s) noexcept {
    for (Functional f : kAllFunctionals)
        if (s == to_string(f)) return f;
    return std::nullopt;
}

struct Decomposition {
    std::string name;
    std::vector<std::string> terms;
};

struct FunctionalReport {
    Functional name = Functional::efe;
    double value = 0.0;
    std::vector<std::pair<std::string, double>> terms;  // insertion order is the stable key order
    std::vector<Decomposition> decompositions;
    bool clamped = false;
    PosteriorSource posterior_source = PosteriorSource::exact_bayes;
    PreferenceKind preference_kind = PreferenceKind::observations;

    double term(std::string_view key) const {
        for (auto const& [k, v] : terms)
            if (k == key) return v;
        throw error("report has no term '" + std::string(key) + "'");
    }
    bool has_term(std::string_view key) const noexcept {
        for (auto const& kv : terms)
            if (kv.first == key) return true;
        return false;
    }
    double reassemble(Decomposition const& d) const {
        double s = 0.0;
        for (auto const& k : d.terms) s += term(k);
        return s;
    }
    Decomposition const& decomposition(std::string_view name_) const {
        for (auto const& d : decompositions)
            if (d.name == name_) return d;
        throw error("report has no decomposition '" + std::string(name_) + "'");
    }
};

namespace detail {

/// Sum_i p_i (ln p_i - ln q_i) over the support of p, with clamped logs.
inline double kl_clamped(std::span<double const> p, std::span<double const> q, ClampedLog& log) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) kl += p[i] * (log(p[i]) - log(q[i]));
    return kl;
}

/// Every quantity the four functionals are assembled from.
struct StepQuantities {
    // definitions
    double efe = 0, fef = 0, feef = 0, gfe = 0;
    // shared pieces
    double neg_expected_evidence = 0;  // -E_q(o) ln p~(o)
    double information_gain = 0;       // E_q(o) KL[Qh(x|o) || q(x)]
    double post_err = 0;               // E_q(o) KL[Qh(x|o) || p~(x|o)]
    double energy = 0;                 // -E_M ln B(o,x)
    double cross_prior = 0;            // E_M ln q(x)
    double neg_posterior_entropy = 0;  // E_M ln Qh(x|o)
    double neg_joint_entropy = 0;      // E_M ln M(o,x)
    double accuracy = 0;               // -E_M ln p~(o|x)
    double prior_complexity = 0;       // E_M [ln q(x) - ln p~(x)]
    double predicted_uncertainty = 0;  // -E_M ln A(o|x)
    double predicted_divergence = 0;   // E_M [ln q(o) - ln p~(o)]
    double obs_information_gain = 0;   // E_M [ln A(o|x) - ln q(o)]
    double conditional_bias = 0;       // E_M [ln C(x|o) - ln p~(x|o)]
    double risk = 0;                   // sum_x m(x) [ln q(x) - ln p~(x)]
    double ambiguity = 0;              // sum_x m(x) CE[M(o|x), p~(o|x)]
    double kl_control = 0;             // KL[q(x) || p~(x)]
    double feef_extrinsic = 0;         // sum_x m(x) KL[M(o|x) || p~(o)]
    double likelihood_entropy = 0;     // sum_x m(x) H[M(o|x)]
    double posterior_residual = 0;     // E_M [ln m(x) - ln q(x) + ln Qh(x|o) - ln p~(x|o)]
    double mutual_information = 0;     // E_M [ln M - ln q(o) - ln m(x)]
    double obs_entropy_term = 0;       // E_M ln q(o)
    double state_entropy_term = 0;     // E_M ln m(x)
    bool clamped = false;
};

inline StepQuantities compute_step(PredictiveState const& ps, PreferenceModel const& pref) {
    std::size_t const O = ps.likelihood.rows();
    std::size_t const S = ps.likelihood.cols();
    auto const biased = build_biased_joint(pref, ps.joint, ps.likelihood);
    auto const& B = biased.joint;
    auto const bf = factorize(B);
    auto const& Qh = ps.posterior();
    auto const& C = ps.q_x_given_o;
    auto const& A = ps.likelihood;
    auto const& qx = ps.q_x;
    auto const& qo = ps.q_o;

    // Observation preferences define p~(x|o) as the exact conditional itself;
    // reading it back from B would only add rounding.
    bool const obs_kind = pref.kind == PreferenceKind::observations;
    auto pxo = [&](std::size_t x, std::size_t o) {
        return obs_kind ? C(x, o) : bf.col_given_row(x, o);
    };

    Matrix M(O, S);
    std::vector<double> mx(S, 0.0);
    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t x = 0; x < S; ++x) {
            M(o, x) = qo[o] * Qh(x, o);
            mx[x] += M(o, x);
        }

    ClampedLog log;
    StepQuantities q;

    for (std::size_t o = 0; o < O; ++o) {
        if (qo[o] == 0.0) continue;
        q.neg_expected_evidence -= qo[o] * log(bf.row_marginal[o]);
        std::vector<double> post(S), target(S);
        for (std::size_t x = 0; x < S; ++x) {
            post[x] = Qh(x, o);
            target[x] = pxo(x, o);
        }
        q.information_gain += qo[o] * kl_clamped(post, qx.probs(), log);
        q.post_err += qo[o] * kl_clamped(post, target, log);
    }

    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t x = 0; x < S; ++x) {
            double const w = M(o, x);
            if (w == 0.0) continue;
            double const lnB = log(B(o, x));
            double const lnqx = log(qx[x]);
            double const lnQh = log(Qh(x, o));
            double const lnM = log(w);
            double const lnqo = log(qo[o]);
            double const lnmx = log(mx[x]);
            double const lnpxo = log(pxo(x, o));
            double const lnpo = log(bf.row_marginal[o]);
            double const lnA = log(A(o, x));

            q.efe += w * (lnqx - lnB);
            q.fef += w * (lnQh - lnB);
            q.feef += w * (lnM - lnB);
            q.gfe += w * (lnqo + lnmx - lnB);

            q.energy -= w * lnB;
            q.cross_prior += w * lnqx;
            q.neg_posterior_entropy += w * lnQh;
            q.neg_joint_entropy += w * lnM;
            q.accuracy -= w * log(bf.row_given_col(o, x));
            q.prior_complexity += w * (lnqx - log(bf.col_marginal[x]));
            q.predicted_uncertainty -= w * lnA;
            q.predicted_divergence += w * (lnqo - lnpo);
            q.obs_information_gain += w * (lnA - lnqo);
            q.conditional_bias += w * (log(C(x, o)) - lnpxo);
            q.posterior_residual += w * (lnmx - lnqx + lnQh - lnpxo);
            q.mutual_information += w * (lnM - lnqo - lnmx);
            q.obs_entropy_term += w * lnqo;
            q.state_entropy_term += w * lnmx;
        }

    // State-indexed routes: per-state conditionals of the measure.
    for (std::size_t x = 0; x < S; ++x) {
        if (mx[x] == 0.0) continue;
        std::vector<double> obs_given_x(O), pref_obs_given_x(O);
        for (std::size_t o = 0; o < O; ++o) {
            obs_given_x[o] = M(o, x) / mx[x];
            pref_obs_given_x[o] = bf.row_given_col(o, x);
        }
        double cross = 0.0, h = 0.0;
        for (std::size_t o = 0; o < O; ++o) {
            if (obs_given_x[o] == 0.0) continue;
            cross -= obs_given_x[o] * log(pref_obs_given_x[o]);
            h -= obs_given_x[o] * log(obs_given_x[o]);
        }
        q.risk += mx[x] * (log(qx[x]) - log(bf.col_marginal[x]));
        q.ambiguity += mx[x] * cross;
        q.likelihood_entropy += mx[x] * h;
        q.feef_extrinsic += mx[x] * kl_clamped(obs_given_x, bf.row_marginal.probs(), log);
    }
    q.kl_control = kl_clamped(qx.probs(), bf.col_marginal.probs(), log);

    q.clamped = log.clamped();
    return q;
}

inline FunctionalReport make_report(Functional name, double value, PredictiveState const& ps,
                                    PreferenceModel const& pref, bool clamped) {
    FunctionalReport r;
    r.name = name;
    r.value = value;
    r.clamped = clamped;
    r.posterior_source = ps.posterior_source();
    r.preference_kind = pref.kind;
    return r;
}

}  // namespace detail

/// Expected free energy, E_M[ln q(x) - ln B(o,x)].
inline FunctionalReport efe_step(PredictiveState const& ps, PreferenceModel const& pref) {
    auto const q = detail::compute_step(ps, pref);
    auto r = detail::make_report(Functional::efe, q.efe, ps, pref, q.clamped);
    r.terms = {
        {"extrinsic", q.neg_expected_evidence},
        {"epistemic", -q.information_gain},
        {"post_err", q.post_err},
        {"entropy", q.cross_prior},
        {"energy", q.energy},
        {"accuracy", q.accuracy},
        {"complexity", q.prior_complexity},
        {"predicted_uncertainty", q.predicted_uncertainty},
        {"predicted_divergence", q.predicted_divergence},
        {"obs_information_gain", -q.obs_information_gain},
        {"conditional_bias", q.conditional_bias},
        {"risk", q.risk},
        {"ambiguity", q.ambiguity},
        {"information_gain", q.information_gain},
        {"kl_control", q.kl_control},
    };
    r.decompositions = {
        {"extrinsic_epistemic", {"extrinsic", "epistemic", "post_err"}},
        {"entropy_energy", {"entropy", "energy"}},
        {"accuracy_complexity", {"accuracy", "complexity"}},
        {"observation_space", {"predicted_uncertainty", "predicted_divergence", "conditional_bias"}},
        {"observation_information_gain", {"extrinsic", "obs_information_gain", "conditional_bias"}},
        {"risk_ambiguity", {"risk", "ambiguity"}},
    };
    return r;
}

/// Free energy of the future, E_M[ln Qh(x|o) - ln B(o,x)].
inline FunctionalReport fef_step(PredictiveState const& ps, PreferenceModel const& pref) {
    auto const q = detail::compute_step(ps, pref);
    auto r = detail::make_report(Functional::fef, q.fef, ps, pref, q.clamped);
    r.terms = {
        {"neg_expected_evidence", q.neg_expected_evidence},
        {"post_err", q.post_err},
        {"accuracy", q.accuracy},
        {"complexity", q.information_gain},
        {"prior_divergence", q.prior_complexity},
        {"entropy", q.neg_posterior_entropy},
        {"energy", q.energy},
        {"information_gain", q.information_gain},
    };
    r.decompositions = {
        {"evidence_bound", {"neg_expected_evidence", "post_err"}},
        {"accuracy_complexity", {"accuracy", "complexity", "prior_divergence"}},
        {"entropy_energy", {"entropy", "energy"}},
    };
    return r;
}

/// Free energy of the expected future, KL[M || B].
inline FunctionalReport feef_step(PredictiveState const& ps, PreferenceModel const& pref) {
    auto const q = detail::compute_step(ps, pref);
    auto r = detail::make_report(Functional::feef, q.feef, ps, pref, q.clamped);
    r.terms = {
        {"extrinsic", q.feef_extrinsic},
        {"intrinsic", -q.information_gain},
        {"posterior_residual", q.posterior_residual},
        {"entropy", q.neg_joint_entropy},
        {"energy", q.energy},
        {"likelihood_entropy", q.likelihood_entropy},
        {"information_gain", q.information_gain},
    };
    r.decompositions = {
        {"extrinsic_intrinsic", {"extrinsic", "intrinsic", "posterior_residual"}},
        {"entropy_energy", {"entropy", "energy"}},
    };
    return r;
}

/// Generalised free energy, E_M[ln q(o) + ln m(x) - ln B(o,x)] with m the
/// state marginal of M.
inline FunctionalReport gfe_step(PredictiveState const& ps, PreferenceModel const& pref) {
    auto const q = detail::compute_step(ps, pref);
    auto r = detail::make_report(Functional::gfe, q.gfe, ps, pref, q.clamped);
    r.terms = {
        {"observation_entropy", q.obs_entropy_term},
        {"state_entropy", q.state_entropy_term},
        {"energy", q.energy},
        {"mutual_information", q.mutual_information},
    };
    r.decompositions = {
        {"entropy_energy", {"observation_entropy", "state_entropy", "energy"}},
    };
    return r;
}

inline FunctionalReport evaluate_step(Functional f, PredictiveState const& ps,
                                      PreferenceModel const& pref) {
    switch (f) {
        case Functional::efe: return efe_step(ps, pref);
        case Functional::fef: return fef_step(ps, pref);
        case Functional::feef: return feef_step(ps, pref);
        case Functional::gfe: return gfe_step(ps, pref);
    }
    throw error("unknown functional");
}

/// Diagnostics for the attempts to recover the EFE from the expected evidence.
struct NaturalisationDiagnostics {
    /// E_{q(o) q(x)}[ln q(x) - ln B(o,x)]: importance sampling on the
    /// variational prior. Jensen makes it an upper bound on the expected
    /// negative log evidence.
    double marginal_product_efe = 0.0;
    double efe = 0.0;
    double marginal_product_gap = 0.0;  // marginal_product_efe - efe
    double neg_expected_evidence = 0.0;
    bool prior_substitution_bound_holds = false;
    /// H[q(o)]; the FEF bounds it from above.
    double observation_entropy = 0.0;
    double fef = 0.0;
    bool entropy_bound_holds = false;
    /// max over reachable o of max_x |Qh(x|o) - q(x)|: how far "prior equals
    /// posterior" is from holding.
    double max_posterior_prior_deviation = 0.0;
    /// max |J(o,x) - q(o) q(x)|: how far the joint is from factorizing.
    double max_independence_deviation = 0.0;
    bool clamped = false;
};

inline NaturalisationDiagnostics naturalisation_diagnostics(PredictiveState const& ps,
                                                            PreferenceModel const& pref,
                                                            double bound_slack = 1e-12) {
    std::size_t const O = ps.likelihood.rows();
    std::size_t const S = ps.likelihood.cols();
    auto const biased = build_biased_joint(pref, ps.joint, ps.likelihood);
    ClampedLog log;

    NaturalisationDiagnostics d;
    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t x = 0; x < S; ++x) {
            double const w = ps.q_o[o] * ps.q_x[x];
            if (w != 0.0) d.marginal_product_efe += w * (log(ps.q_x[x]) - log(biased.joint(o, x)));
            d.max_independence_deviation =
                std::max(d.max_independence_deviation, std::abs(ps.joint(o, x) - w));
        }
    auto const efe = efe_step(ps, pref);
    auto const fef = fef_step(ps, pref);
    d.efe = efe.value;
    d.fef = fef.value;
    d.marginal_product_gap = d.marginal_product_efe - d.efe;
    d.neg_expected_evidence = fef.term("neg_expected_evidence");
    d.prior_substitution_bound_holds =
        d.marginal_product_efe >= d.neg_expected_evidence - bound_slack;
    d.observation_entropy = entropy(ps.q_o);
    d.entropy_bound_holds = d.fef >= d.observation_entropy - bound_slack;

    auto const& Qh = ps.posterior();
    for (std::size_t o = 0; o < O; ++o) {
        if (ps.q_o[o] == 0.0) continue;
        for (std::size_t x = 0; x < S; ++x)
            d.max_posterior_prior_deviation =
                std::max(d.max_posterior_prior_deviation, std::abs(Qh(x, o) - ps.q_x[x]));
    }
    d.clamped = log.clamped() || efe.clamped || fef.clamped;
    return d;
}

}  // namespace efelab
