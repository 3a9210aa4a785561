#pragma once

// Brute-force reference computations and the identity suite.
//
// Nothing here calls the decomposition code it checks: evidence, information
// gain, posterior error, mutual information and trajectory values are plain
// sums over enumerated outcomes, built from the raw tables.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "efelab/functionals.hpp"
#include "efelab/inference.hpp"
#include "efelab/model.hpp"
#include "efelab/planning.hpp"
#include "efelab/random.hpp"

namespace efelab {

inline constexpr unsigned long long kMaxTrajectories = 100000;

namespace oracle_detail {

/// One future step rebuilt from A, q(x), the mixing rate and the preferences.
struct RawStep {
    std::size_t O = 0, S = 0;
    std::vector<double> A;     // O x S
    std::vector<double> qx;    // S
    std::vector<double> qo;    // O
    std::vector<double> post;  // S x O, the conditional the functionals use
    std::vector<double> B;     // O x S, biased joint
    std::vector<double> pref_o, pref_x_given_o;

    double a(std::size_t o, std::size_t x) const { return A[o * S + x]; }
    double qh(std::size_t x, std::size_t o) const { return post[x * O + o]; }
    double b(std::size_t o, std::size_t x) const { return B[o * S + x]; }
    double m(std::size_t o, std::size_t x) const { return qo[o] * qh(x, o); }
};

inline RawStep raw_step(StochasticMatrix const& likelihood, Categorical const& q_x, double eta,
                        PreferenceModel const& pref) {
    RawStep r;
    r.O = likelihood.rows();
    r.S = likelihood.cols();
    r.A.assign(likelihood.matrix().data().begin(), likelihood.matrix().data().end());
    r.qx = q_x.probs();
    r.qo.assign(r.O, 0.0);
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x) r.qo[o] += r.a(o, x) * r.qx[x];

    double const u = 1.0 / static_cast<double>(r.S);
    std::size_t support = 0;
    for (double p : r.qx) support += p > 0.0;
    double const u_support = 1.0 / static_cast<double>(support);
    std::vector<double> exact(r.S * r.O);
    r.post.assign(r.S * r.O, 0.0);
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x) {
            double const e = r.qo[o] > 0.0 ? r.a(o, x) * r.qx[x] / r.qo[o] : u;
            exact[x * r.O + o] = e;
            double const mix = r.qx[x] > 0.0 ? eta * u_support : 0.0;
            r.post[x * r.O + o] = eta > 0.0 ? (1.0 - eta) * e + mix : e;
        }

    r.B.assign(r.O * r.S, 0.0);
    if (pref.kind == PreferenceKind::observations) {
        for (std::size_t o = 0; o < r.O; ++o)
            for (std::size_t x = 0; x < r.S; ++x) r.B[o * r.S + x] = pref.dist[o] * exact[x * r.O + o];
    } else {
        for (std::size_t o = 0; o < r.O; ++o)
            for (std::size_t x = 0; x < r.S; ++x) r.B[o * r.S + x] = r.a(o, x) * pref.dist[x];
    }
    r.pref_o.assign(r.O, 0.0);
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x) r.pref_o[o] += r.b(o, x);
    // Observation preferences: p~(x|o) is the exact conditional by construction.
    r.pref_x_given_o.assign(r.S * r.O, 0.0);
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x)
            r.pref_x_given_o[x * r.O + o] = pref.kind == PreferenceKind::observations
                                                ? exact[x * r.O + o]
                                                : r.pref_o[o] > 0.0 ? r.b(o, x) / r.pref_o[o] : u;
    return r;
}

inline double safe_log(double p) { return std::log(std::max(p, kLogFloor)); }

inline double neg_expected_evidence(RawStep const& r) {
    double v = 0.0;
    for (std::size_t o = 0; o < r.O; ++o) {
        if (r.qo[o] == 0.0) continue;
        if (r.pref_o[o] == 0.0) throw absolute_continuity_violation(o);
        v -= r.qo[o] * std::log(r.pref_o[o]);
    }
    return v;
}

inline double information_gain(RawStep const& r) {
    double v = 0.0;
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x)
            if (r.m(o, x) > 0.0) v += r.m(o, x) * (safe_log(r.qh(x, o)) - safe_log(r.qx[x]));
    return v;
}

inline double posterior_error(RawStep const& r) {
    double v = 0.0;
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x)
            if (r.m(o, x) > 0.0)
                v += r.m(o, x) *
                     (safe_log(r.qh(x, o)) - safe_log(r.pref_x_given_o[x * r.O + o]));
    return v;
}

inline std::vector<double> state_marginal(RawStep const& r) {
    std::vector<double> mx(r.S, 0.0);
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x) mx[x] += r.m(o, x);
    return mx;
}

inline double mutual_information(RawStep const& r) {
    auto const mx = state_marginal(r);
    double v = 0.0;
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x) {
            double const w = r.m(o, x);
            if (w > 0.0) v += w * std::log(w / (r.qo[o] * mx[x]));
        }
    return v;
}

/// ln of the per-(o, x) integrand's "model" side for a functional, i.e. the
/// quantity whose expectation minus E ln B gives its value.
inline double log_numerator(Functional f, RawStep const& r, std::vector<double> const& mx,
                            std::size_t o, std::size_t x) {
    switch (f) {
        case Functional::efe: return safe_log(r.qx[x]);
        case Functional::fef: return safe_log(r.qh(x, o));
        case Functional::feef: return safe_log(r.m(o, x));
        case Functional::gfe: return safe_log(r.qo[o]) + safe_log(mx[x]);
    }
    return 0.0;
}

/// Definition of a functional by direct summation over (o, x).
inline double definition(Functional f, RawStep const& r) {
    auto const mx = state_marginal(r);
    double v = 0.0;
    for (std::size_t o = 0; o < r.O; ++o)
        for (std::size_t x = 0; x < r.S; ++x) {
            double const w = r.m(o, x);
            if (w > 0.0) v += w * (log_numerator(f, r, mx, o, x) - safe_log(r.b(o, x)));
        }
    return v;
}

inline unsigned long long checked_power(std::size_t base, std::size_t exp, unsigned long long cap) {
    unsigned long long n = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (n > cap / std::max<std::size_t>(base, 1)) {
            // Saturating finish for the error message.
            for (std::size_t j = i; j < exp && n <= (~0ULL) / std::max<std::size_t>(base, 1); ++j)
                n *= base;
            return n;
        }
        n *= base;
    }
    return n;
}

/// Mixed-radix increment; false once every digit has wrapped.
inline bool next_sequence(std::vector<std::size_t>& seq, std::size_t radix) {
    for (std::size_t pos = seq.size(); pos-- > 0;) {
        if (++seq[pos] < radix) return true;
        seq[pos] = 0;
    }
    return false;
}

}  // namespace oracle_detail

/// -sum_o Q(o|pi) ln p~(o), by direct summation. With state preferences the
/// preferred observation marginal is sum_x A(o|x) p~(x).
inline double expected_log_evidence_exact(PredictiveState const& ps, PreferenceModel const& pref) {
    return oracle_detail::neg_expected_evidence(
        oracle_detail::raw_step(ps.likelihood, ps.q_x, 0.0, pref));
}

/// Full-trajectory enumeration under one policy.
struct TrajectoryEnumeration {
    double value = 0.0;
    std::vector<std::vector<double>> state_marginals;  // per step 1..T
    std::vector<std::vector<double>> obs_marginals;    // per step 1..T
};

/// Enumerates state paths x_0..x_T of the Markov chain to get the path-level
/// observation distribution P(o_1..o_T), then for every observation sequence
/// enumerates x_1..x_T under prod_t Qh_t(x_t | o_t) and sums
///   ln prod_t N_t(o_t, x_t) - ln prod_t B_t(o_t, x_t)
/// with N_t the functional's model-side factor. Posteriors are per step
/// (mean field) and preferences are time-homogeneous.
inline TrajectoryEnumeration trajectory_enumeration(Functional f, Categorical const& belief0,
                                                    Policy const& policy, GenerativeModel const& m,
                                                    PreferenceModel const& pref, double eta = 0.0) {
    using namespace oracle_detail;
    std::size_t const T = policy.actions.size();
    std::size_t const S = m.num_states();
    std::size_t const O = m.num_obs();
    if (T == 0) throw error("trajectory enumeration needs a nonempty policy");
    if (belief0.size() != S) throw dimension_mismatch("trajectory belief", S, belief0.size());
    for (std::size_t a : policy.actions)
        if (a >= m.num_actions()) throw index_out_of_range("action", a, m.num_actions());
    unsigned long long const n_obs = checked_power(O, T, kMaxTrajectories);
    if (n_obs > kMaxTrajectories) throw trajectory_space_too_large(n_obs);
    unsigned long long const n_paths = checked_power(S, T + 1, kMaxTrajectories);
    if (n_paths > kMaxTrajectories) throw trajectory_space_too_large(n_paths);
    unsigned long long const n_inner = checked_power(S, T, kMaxTrajectories);

    auto const& A = m.likelihood();
    TrajectoryEnumeration out;
    out.state_marginals.assign(T, std::vector<double>(S, 0.0));
    out.obs_marginals.assign(T, std::vector<double>(O, 0.0));

    // Path-level observation distribution, indexed like the mixed-radix sequence.
    std::vector<double> p_obs(n_obs, 0.0);
    std::vector<std::size_t> path(T + 1, 0);
    do {
        double p = belief0[path[0]];
        for (std::size_t t = 0; t < T && p > 0.0; ++t)
            p *= m.transition(policy.actions[t])(path[t + 1], path[t]);
        if (p == 0.0) continue;
        for (std::size_t t = 0; t < T; ++t) out.state_marginals[t][path[t + 1]] += p;
        // Spread the path mass over all observation sequences it can emit.
        std::vector<std::size_t> obs(T, 0);
        std::size_t idx = 0;
        do {
            double q = p;
            for (std::size_t t = 0; t < T && q > 0.0; ++t) q *= A(obs[t], path[t + 1]);
            if (q > 0.0) p_obs[idx] += q;
            ++idx;
        } while (next_sequence(obs, O));
    } while (next_sequence(path, S));

    std::vector<RawStep> steps;
    std::vector<std::vector<double>> mxs;
    for (std::size_t t = 0; t < T; ++t) {
        auto qx = Categorical::normalized(out.state_marginals[t]);
        steps.push_back(raw_step(A, qx, eta, pref));
        mxs.push_back(state_marginal(steps.back()));
    }

    std::vector<std::size_t> obs(T, 0);
    std::size_t idx = 0;
    do {
        double const po = p_obs[idx++];
        if (po == 0.0) continue;
        for (std::size_t t = 0; t < T; ++t) out.obs_marginals[t][obs[t]] += po;
        std::vector<std::size_t> xs(T, 0);
        for (unsigned long long k = 0; k < n_inner; ++k) {
            double w = po;
            double log_num = 0.0, log_b = 0.0;
            for (std::size_t t = 0; t < T && w > 0.0; ++t) {
                w *= steps[t].qh(xs[t], obs[t]);
                log_num += log_numerator(f, steps[t], mxs[t], obs[t], xs[t]);
                log_b += safe_log(steps[t].b(obs[t], xs[t]));
            }
            if (w > 0.0) out.value += w * (log_num - log_b);
            next_sequence(xs, S);
        }
    } while (next_sequence(obs, O));
    return out;
}

inline double trajectory_fef_exact(Categorical const& belief0, Policy const& policy,
                                   GenerativeModel const& m, PreferenceModel const& pref,
                                   double eta = 0.0) {
    return trajectory_enumeration(Functional::fef, belief0, policy, m, pref, eta).value;
}

/// Identity families checked by the suite.
inline constexpr std::array<char const*, 10> kIdentityIds = {"i",   "ii",  "iii", "iv", "v",
                                                             "vi",  "vii", "viii", "ix", "x"};

inline char const* identity_description(std::string const& id) {
    static std::map<std::string, char const*> const d = {
        {"i", "FEF - IG = EFE"},
        {"ii", "FEF >= -E ln p~(o), gap = post_err"},
        {"iii", "EFE = extrinsic + post_err - IG"},
        {"iv", "EFE and FEF decompositions agree"},
        {"v", "FEEF = extrinsic - intrinsic; entropy-term relation"},
        {"vi", "GFE = FEEF - MI, MI >= 0"},
        {"vii", "one-hot FEEF equals biased VFE"},
        {"viii", "VFE decompositions and evidence bound"},
        {"ix", "trajectory value equals per-step sum"},
        {"x", "naturalisation diagnostics"},
    };
    auto it = d.find(id);
    return it == d.end() ? "" : it->second;
}

struct SuiteTolerances {
    double identity = 1e-9;
    double bound = 1e-12;
};

struct SuiteDims {
    std::size_t states = 3, obs = 3, actions = 3, horizon = 2;
};

struct SuiteFailure {
    std::string id;
    std::uint64_t seed = 0;
    double violation = 0.0;
};

struct IdentitySuiteReport {
    std::size_t seeds_run = 0;
    std::map<std::string, double> max_violation;  // keyed by identity id
    std::vector<SuiteFailure> failures;

    // Recorded behaviour that is not a pass/fail identity.
    std::size_t efe_gap_positive = 0;  // eta > 0: EFE above -E ln p~(o)
    std::size_t efe_gap_negative = 0;  // eta > 0: EFE below it
    double max_eta0_post_err = 0.0;
    double min_eta_half_fef_gap = std::numeric_limits<double>::infinity();
    std::size_t marginal_product_gap_positive = 0;
    std::size_t marginal_product_gap_negative = 0;
    std::size_t clamped_evaluations = 0;

    bool ok() const noexcept { return failures.empty(); }
};

namespace oracle_detail {

struct SeedResult {
    std::map<std::string, double> max_violation;
    std::vector<SuiteFailure> failures;
    std::size_t efe_gap_positive = 0, efe_gap_negative = 0;
    double max_eta0_post_err = 0.0;
    double min_eta_half_fef_gap = std::numeric_limits<double>::infinity();
    std::size_t mp_positive = 0, mp_negative = 0;
    std::size_t clamped = 0;
};

class Checker {
  public:
    Checker(SeedResult& out, std::uint64_t seed, SuiteTolerances tol)
        : out_(out), seed_(seed), tol_(tol) {}

    void equal(char const* id, double a, double b) { record(id, std::abs(a - b), tol_.identity); }
    /// a >= b up to the bound slack.
    void at_least(char const* id, double a, double b) {
        record(id, std::max(0.0, b - a), tol_.bound);
    }
    void holds(char const* id, bool ok) { record(id, ok ? 0.0 : 1.0, 0.0); }

  private:
    void record(char const* id, double v, double tol) {
        double& mx = out_.max_violation[id];
        mx = std::max(mx, v);
        if (!(v <= tol)) out_.failures.push_back({id, seed_, v});
    }
    SeedResult& out_;
    std::uint64_t seed_;
    SuiteTolerances tol_;
};

inline PreferenceModel random_state_preferences(std::size_t S, std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    return {PreferenceKind::states, Categorical(detail::dirichlet_column(rng, S))};
}

inline void check_step(Checker& c, SeedResult& out, PredictiveState const& ps,
                       PreferenceModel const& pref, double eta) {
    auto const raw = raw_step(ps.likelihood, ps.q_x, eta, pref);
    double const neg_ev = neg_expected_evidence(raw);
    double const ig = information_gain(raw);
    double const perr = posterior_error(raw);
    double const mi = mutual_information(raw);
    bool const exact_obs = eta == 0.0 && pref.kind == PreferenceKind::observations;

    FunctionalReport reps[4];
    bool clamped = false;
    for (Functional f : kAllFunctionals) {
        auto& r = reps[static_cast<int>(f)];
        r = evaluate_step(f, ps, pref);
        clamped = clamped || r.clamped;
    }
    // A floored logarithm stands in for ln 0; sums regrouped around it no
    // longer agree, so such steps are counted rather than checked.
    if (clamped) {
        ++out.clamped;
        return;
    }
    for (Functional f : kAllFunctionals) {
        auto const& r = reps[static_cast<int>(f)];
        // Every report must agree with the functional's definition.
        c.equal("iv", r.value, definition(f, raw));
        for (auto const& d : r.decompositions) c.equal("iv", r.reassemble(d), r.value);
    }
    auto const& efe = reps[0];
    auto const& fef = reps[1];
    auto const& feef = reps[2];
    auto const& gfe = reps[3];

    // (i)
    c.equal("i", fef.value - ig, efe.value);
    c.equal("i", fef.term("information_gain"), ig);

    // (ii)
    double const fef_gap = fef.value - neg_ev;
    c.at_least("ii", fef.value, neg_ev);
    c.equal("ii", fef_gap, perr);
    c.equal("ii", fef.term("post_err"), perr);
    c.equal("ii", fef.term("neg_expected_evidence"), neg_ev);
    double const efe_gap = efe.value - neg_ev;
    c.equal("ii", efe_gap, perr - ig);
    if (exact_obs) {
        c.at_least("ii", neg_ev, efe.value);
        c.equal("ii", perr, 0.0);
        out.max_eta0_post_err = std::max(out.max_eta0_post_err, std::abs(fef.term("post_err")));
    }
    if (eta > 0.0 && pref.kind == PreferenceKind::observations) {
        if (efe_gap > 0.0) ++out.efe_gap_positive;
        if (efe_gap < 0.0) ++out.efe_gap_negative;
    }
    if (eta == 0.5 && pref.kind == PreferenceKind::observations)
        out.min_eta_half_fef_gap = std::min(out.min_eta_half_fef_gap, fef_gap);

    // (iii)
    c.equal("iii", efe.value, neg_ev + perr - ig);
    c.equal("iii", efe.term("extrinsic"), neg_ev);
    c.equal("iii", efe.term("epistemic"), -ig);
    c.equal("iii", efe.term("post_err"), perr);

    // (iv) five-plus EFE routes agree pairwise; risk is the KL-control term
    // whenever the measure keeps the predicted state marginal.
    std::vector<double> sums;
    for (auto const& d : efe.decompositions) sums.push_back(efe.reassemble(d));
    for (std::size_t i = 0; i < sums.size(); ++i)
        for (std::size_t j = i + 1; j < sums.size(); ++j) c.equal("iv", sums[i], sums[j]);
    if (eta == 0.0) c.equal("iv", efe.term("risk"), efe.term("kl_control"));
    if (eta == 0.0 && pref.kind == PreferenceKind::states) {
        double h = 0.0;
        for (std::size_t x = 0; x < raw.S; ++x)
            for (std::size_t o = 0; o < raw.O; ++o)
                if (raw.a(o, x) > 0.0) h -= raw.qx[x] * raw.a(o, x) * std::log(raw.a(o, x));
        c.equal("iv", efe.term("ambiguity"), h);
    }

    // (v)
    c.equal("v", feef.value,
            feef.term("extrinsic") + feef.term("intrinsic") + feef.term("posterior_residual"));
    c.equal("v", feef.term("intrinsic"), -ig);
    c.equal("v", feef.term("extrinsic"), efe.term("extrinsic") - feef.term("likelihood_entropy"));
    if (exact_obs) {
        c.equal("v", feef.term("posterior_residual"), 0.0);
        c.equal("v", feef.value, feef.term("extrinsic") + feef.term("intrinsic"));
    }

    // (vi)
    c.equal("vi", gfe.value, feef.value - mi);
    c.equal("vi", gfe.term("mutual_information"), mi);
    c.at_least("vi", mi, 0.0);

    // (x) the FEF bounds H[q(o)] from above; importance sampling on the prior
    // over-estimates the expected negative log evidence.
    auto const diag = naturalisation_diagnostics(ps, pref, 1e-12);
    c.at_least("x", diag.fef, diag.observation_entropy);
    c.at_least("x", diag.marginal_product_efe, neg_ev);
    c.holds("x", diag.entropy_bound_holds && diag.prior_substitution_bound_holds);
    if (eta == 0.0) {
        if (diag.marginal_product_gap > 0.0) ++out.mp_positive;
        if (diag.marginal_product_gap < 0.0) ++out.mp_negative;
    }
}

/// A one-hot predictive observation: every likelihood column is delta(obar).
inline void check_one_hot(Checker& c, Categorical const& q_x, std::size_t obar,
                          PreferenceModel const& obs_pref, double eta) {
    std::size_t const S = q_x.size();
    std::size_t const O = obs_pref.dist.size();
    Matrix a(O, S);
    for (std::size_t x = 0; x < S; ++x) a(obar, x) = 1.0;
    StochasticMatrix A(std::move(a));
    auto const ps = perturbed_predictive_state(q_x, A, eta);
    double const feef = feef_step(ps, obs_pref).value;

    GenerativeModel const m(A, {StochasticMatrix::identity(S)}, q_x, 1);
    std::vector<double> post(S);
    for (std::size_t x = 0; x < S; ++x) post[x] = ps.posterior()(x, obar);
    Posterior q{Categorical(std::move(post)), ps.posterior_source()};
    auto const v = vfe(q, obar, q_x, m, obs_pref);
    c.equal("vii", feef, v.vfe);
}

inline void check_vfe(Checker& c, GenerativeModel const& m, Categorical const& prior,
                      std::size_t obs, double eta, std::optional<PreferenceModel> const& pref) {
    auto const exact = bayes_posterior(prior, m.likelihood(), obs);
    Posterior const q = eta == 0.0 ? exact
                                   : Posterior{mix_with_uniform_on_support(exact.dist, prior, eta),
                                               PosteriorSource::supplied_approximation};
    auto const r = vfe(q, obs, prior, m, pref);
    c.equal("viii", r.vfe, r.neg_entropy - r.energy);
    c.equal("viii", r.vfe, -r.accuracy + r.complexity);
    c.equal("viii", r.vfe, r.neg_log_evidence + r.posterior_divergence);
    c.at_least("viii", r.vfe, r.neg_log_evidence);
    if (!pref) {
        double ev = 0.0;
        for (std::size_t x = 0; x < prior.size(); ++x) ev += m.likelihood()(obs, x) * prior[x];
        c.equal("viii", r.neg_log_evidence, -std::log(ev));
        if (eta == 0.0) c.equal("viii", r.vfe, -std::log(ev));
    }
}

inline void check_trajectory(Checker& c, Categorical const& belief0, Policy const& policy,
                             GenerativeModel const& m, PreferenceModel const& pref, double eta) {
    auto const steps = rollout(belief0, policy, m, eta);
    bool first = true;
    for (Functional f : kAllFunctionals) {
        auto const traj = trajectory_enumeration(f, belief0, policy, m, pref, eta);
        double sum = 0.0;
        for (auto const& ps : steps) sum += evaluate_step(f, ps, pref).value;
        c.equal("ix", traj.value, sum);
        if (!first) continue;
        first = false;
        for (std::size_t t = 0; t < steps.size(); ++t)
            for (std::size_t x = 0; x < m.num_states(); ++x)
                c.equal("ix", traj.state_marginals[t][x], steps[t].q_x[x]);
        for (std::size_t t = 0; t < steps.size(); ++t)
            for (std::size_t o = 0; o < m.num_obs(); ++o)
                c.equal("ix", traj.obs_marginals[t][o], steps[t].q_o[o]);
    }
}

inline Policy random_policy(Rng& rng, std::size_t A, std::size_t T) {
    Policy p;
    std::vector<double> w(A, 1.0 / static_cast<double>(A));
    for (std::size_t t = 0; t < T; ++t) p.actions.push_back(rng.categorical(w));
    return p;
}

inline SeedResult run_seed(std::uint64_t seed, SuiteDims const& dims, SuiteTolerances tol,
                           std::optional<RandomModel> const& fixed) {
    SeedResult out;
    for (auto const* id : kIdentityIds) out.max_violation[id] = 0.0;
    Checker c(out, seed, tol);

    RandomModel const rm =
        fixed ? *fixed : random_model(dims.states, dims.obs, dims.actions, dims.horizon, seed);
    auto const& m = rm.model;
    std::size_t const S = m.num_states(), O = m.num_obs();
    PreferenceModel const obs_pref = rm.preferences.kind == PreferenceKind::observations
                                         ? rm.preferences
                                         : PreferenceModel{PreferenceKind::observations,
                                                           Categorical::uniform(O)};
    PreferenceModel const state_pref = rm.preferences.kind == PreferenceKind::states
                                           ? rm.preferences
                                           : random_state_preferences(S, seed);
    Rng rng(seed * 0x2545f4914f6cdd1dULL + 7);
    std::size_t const obar = rng.categorical(Categorical::uniform(O).probs());

    auto const policies = enumerate_policies(m.num_actions(), m.horizon());
    for (double eta : {0.0, 0.25, 0.5}) {
        for (auto const& policy : policies)
            for (auto const& ps : rollout(m.initial_prior(), policy, m, eta))
                for (auto const* pref : {&obs_pref, &state_pref}) check_step(c, out, ps, *pref, eta);

        check_one_hot(c, m.initial_prior(), obar, obs_pref, eta);
        auto const q1 = belief_predict(m.initial_prior(), 0, m);
        check_one_hot(c, q1, obar, obs_pref, eta);

        // VFE at a reachable observation under the predicted prior.
        auto const qo = m.likelihood().apply(q1);
        std::size_t const obs = rng.categorical(qo.probs());
        check_vfe(c, m, q1, obs, eta, std::nullopt);
        check_vfe(c, m, q1, obs, eta, obs_pref);
        check_vfe(c, m, q1, obs, eta, state_pref);

        for (std::size_t T = 1; T <= std::min<std::size_t>(3, std::max<std::size_t>(m.horizon(), 1)); ++T) {
            auto const policy = random_policy(rng, m.num_actions(), T);
            for (auto const* pref : {&obs_pref, &state_pref})
                check_trajectory(c, m.initial_prior(), policy, m, *pref, eta);
        }
    }
    return out;
}

}  // namespace oracle_detail

/// Runs every identity family on `num_seeds` random models (or on `fixed`
/// when supplied, varying only the seeded draws). Seeds run concurrently;
/// results are merged in seed order.
inline IdentitySuiteReport identity_suite(std::size_t num_seeds, SuiteDims const& dims = {},
                                          SuiteTolerances tol = {}, std::uint64_t first_seed = 0,
                                          std::optional<RandomModel> const& fixed = std::nullopt,
                                          unsigned threads = 0) {
    if (dims.states == 0 || dims.obs == 0 || dims.actions == 0 || dims.horizon == 0)
        throw error("suite dimensions must be positive");
    std::size_t const A = fixed ? fixed->model.num_actions() : dims.actions;
    std::size_t const T = fixed ? fixed->model.horizon() : dims.horizon;
    std::size_t const O = fixed ? fixed->model.num_obs() : dims.obs;
    std::size_t const S = fixed ? fixed->model.num_states() : dims.states;
    // Reject oversize spaces before starting any worker.
    (void)enumerate_policies(A, T);
    std::size_t const Tt = std::min<std::size_t>(3, T);
    unsigned long long const traj = oracle_detail::checked_power(O, Tt, kMaxTrajectories);
    if (traj > kMaxTrajectories) throw trajectory_space_too_large(traj);
    unsigned long long const paths = oracle_detail::checked_power(S, Tt + 1, kMaxTrajectories);
    if (paths > kMaxTrajectories) throw trajectory_space_too_large(paths);

    std::vector<oracle_detail::SeedResult> results(num_seeds);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < num_seeds; i = next++)
            results[i] = oracle_detail::run_seed(first_seed + i, dims, tol, fixed);
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(num_seeds, 1))));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    IdentitySuiteReport rep;
    rep.seeds_run = num_seeds;
    for (auto const* id : kIdentityIds) rep.max_violation[id] = 0.0;
    for (auto const& r : results) {
        for (auto const& [id, v] : r.max_violation) rep.max_violation[id] = std::max(rep.max_violation[id], v);
        rep.failures.insert(rep.failures.end(), r.failures.begin(), r.failures.end());
        rep.efe_gap_positive += r.efe_gap_positive;
        rep.efe_gap_negative += r.efe_gap_negative;
        rep.max_eta0_post_err = std::max(rep.max_eta0_post_err, r.max_eta0_post_err);
        rep.min_eta_half_fef_gap = std::min(rep.min_eta_half_fef_gap, r.min_eta_half_fef_gap);
        rep.marginal_product_gap_positive += r.mp_positive;
        rep.marginal_product_gap_negative += r.mp_negative;
        rep.clamped_evaluations += r.clamped;
    }
    return rep;
}

}  // namespace efelab
