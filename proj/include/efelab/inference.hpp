#pragma once

// State inference at the current step and the variational free energy.
// The variational family is the whole simplex, so the optimal posterior is
// exact Bayes; perturbed posteriors are available to study the bound away
// from its optimum.

#include <cmath>
#include <optional>

#include "efelab/model.hpp"
#include "efelab/probability.hpp"

namespace efelab {

enum class PosteriorSource { exact_bayes, supplied_approximation };

struct Posterior {
    Categorical dist;
    PosteriorSource source = PosteriorSource::exact_bayes;
};

inline Posterior bayes_posterior(Categorical const& prior, StochasticMatrix const& likelihood,
                                 std::size_t obs) {
    if (prior.size() != likelihood.cols())
        throw dimension_mismatch("bayes_posterior prior", likelihood.cols(), prior.size());
    if (obs >= likelihood.rows()) throw index_out_of_range("observation", obs, likelihood.rows());
    std::vector<double> post(prior.size());
    double evidence = 0.0;
    for (std::size_t x = 0; x < prior.size(); ++x) {
        post[x] = likelihood(obs, x) * prior[x];
        evidence += post[x];
    }
    if (!(evidence > 0.0)) throw impossible_observation(obs);
    for (double& p : post) p /= evidence;
    return {Categorical(std::move(post)), PosteriorSource::exact_bayes};
}

inline Categorical belief_predict(Categorical const& belief, std::size_t action,
                                  GenerativeModel const& m) {
    return m.transition(action).apply(belief);
}

/// (1 - eta) * dist + eta * uniform. eta in [0, 1].
inline Categorical mix_with_uniform(Categorical const& dist, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw error("mixing rate must lie in [0, 1]");
    double const u = 1.0 / static_cast<double>(dist.size());
    std::vector<double> out(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) out[i] = (1.0 - eta) * dist[i] + eta * u;
    return Categorical(std::move(out));
}

inline Posterior perturb(Posterior const& q, double eta) {
    if (eta == 0.0) return q;
    return {mix_with_uniform(q.dist, eta), PosteriorSource::supplied_approximation};
}

/// Column-wise mix of a conditional table with the uniform distribution.
inline StochasticMatrix mix_with_uniform(StochasticMatrix const& cond, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw error("mixing rate must lie in [0, 1]");
    double const u = 1.0 / static_cast<double>(cond.rows());
    Matrix m(cond.rows(), cond.cols());
    for (std::size_t c = 0; c < cond.cols(); ++c)
        for (std::size_t r = 0; r < cond.rows(); ++r) m(r, c) = (1.0 - eta) * cond(r, c) + eta * u;
    return StochasticMatrix(std::move(m));
}

/// (1 - eta) * dist + eta * (uniform over the support of `reference`). Keeps
/// the mixture absolutely continuous with respect to `reference`.
inline Categorical mix_with_uniform_on_support(Categorical const& dist, Categorical const& reference,
                                               double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw error("mixing rate must lie in [0, 1]");
    if (dist.size() != reference.size())
        throw dimension_mismatch("support mixture", reference.size(), dist.size());
    std::size_t n = 0;
    for (double r : reference) n += r > 0.0;
    double const u = 1.0 / static_cast<double>(n);
    std::vector<double> out(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        out[i] = (1.0 - eta) * dist[i] + (reference[i] > 0.0 ? eta * u : 0.0);
    return Categorical(std::move(out));
}

/// Column-wise version: every column mixes with the uniform distribution on
/// the support of `reference`.
inline StochasticMatrix mix_with_uniform_on_support(StochasticMatrix const& cond,
                                                    Categorical const& reference, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw error("mixing rate must lie in [0, 1]");
    if (cond.rows() != reference.size())
        throw dimension_mismatch("support mixture", reference.size(), cond.rows());
    std::size_t n = 0;
    for (double r : reference) n += r > 0.0;
    double const u = 1.0 / static_cast<double>(n);
    Matrix m(cond.rows(), cond.cols());
    for (std::size_t c = 0; c < cond.cols(); ++c)
        for (std::size_t r = 0; r < cond.rows(); ++r)
            m(r, c) = (1.0 - eta) * cond(r, c) + (reference[r] > 0.0 ? eta * u : 0.0);
    return StochasticMatrix(std::move(m));
}

/// Variational free energy at one observation and its three decompositions.
/// Signs follow the fields' names:
///   vfe = neg_entropy - energy                 (neg_entropy = E_q ln q, energy = E_q ln p(o,x))
///       = -accuracy + complexity               (accuracy = E_q ln p(o|x), complexity = KL[q||p(x)])
///       = neg_log_evidence + posterior_divergence
struct VfeReport {
    double vfe = 0.0;
    double energy = 0.0;
    double neg_entropy = 0.0;
    double accuracy = 0.0;
    double complexity = 0.0;
    double neg_log_evidence = 0.0;
    double posterior_divergence = 0.0;
    PosteriorSource source = PosteriorSource::exact_bayes;
    bool biased = false;
};

/// With `pref`, the single-observation row of the biased joint built from
/// prior and likelihood stands in for p(o, x).
inline VfeReport vfe(Posterior const& q, std::size_t obs, Categorical const& prior,
                     GenerativeModel const& m, std::optional<PreferenceModel> const& pref = {}) {
    std::size_t const S = m.num_states();
    if (q.dist.size() != S) throw dimension_mismatch("vfe posterior", S, q.dist.size());
    if (prior.size() != S) throw dimension_mismatch("vfe prior", S, prior.size());
    if (obs >= m.num_obs()) throw index_out_of_range("observation", obs, m.num_obs());

    Joint2 veridical = Joint2::compose(m.likelihood(), prior);
    Joint2 joint = pref ? build_biased_joint(*pref, veridical, m.likelihood()).joint : veridical;
    auto const f = factorize(joint);

    // p(o, x) restricted to the observed row, and its factors.
    std::vector<double> row(S);
    double evidence = 0.0;
    for (std::size_t x = 0; x < S; ++x) {
        row[x] = joint(obs, x);
        evidence += row[x];
    }
    if (!(evidence > 0.0)) throw impossible_observation(obs);
    std::vector<double> exact(S);
    for (std::size_t x = 0; x < S; ++x) exact[x] = row[x] / evidence;

    VfeReport r;
    r.source = q.source;
    r.biased = pref.has_value();
    for (std::size_t x = 0; x < S; ++x) {
        double const w = q.dist[x];
        if (w == 0.0) continue;
        if (row[x] == 0.0) throw absolute_continuity_violation(x);
        r.neg_entropy += w * std::log(w);
        r.energy += w * std::log(row[x]);
        r.accuracy += w * std::log(f.row_given_col(obs, x));
    }
    r.complexity = kl_divergence(q.dist, f.col_marginal);
    r.neg_log_evidence = -std::log(evidence);
    r.posterior_divergence = kl_divergence(q.dist, Categorical(std::move(exact)));
    r.vfe = r.neg_entropy - r.energy;
    return r;
}

}  // namespace efelab
