#include <cmath>

#include <gtest/gtest.h>

#include "efelab/inference.hpp"
#include "support.hpp"

using namespace efelab;

namespace {

GenerativeModel model_with(StochasticMatrix A, Categorical prior) {
    std::size_t const S = prior.size();
    return GenerativeModel(std::move(A), {StochasticMatrix::identity(S)}, std::move(prior), 1);
}

GenerativeModel random_3state(Rng& rng) {
    return GenerativeModel(test::random_stochastic(rng, 3, 3),
                           {test::random_stochastic(rng, 3, 3), test::random_stochastic(rng, 3, 3)},
                           test::random_categorical(rng, 3), 1);
}

}  // namespace

TEST(BayesPosterior, IdentityLikelihoodGivesDelta) {
    Rng rng(1);
    auto prior = test::random_categorical(rng, 3);
    auto q = bayes_posterior(prior, StochasticMatrix::identity(3), 2);
    EXPECT_EQ(q.dist, Categorical::delta(3, 2));
    EXPECT_EQ(q.source, PosteriorSource::exact_bayes);
}

TEST(BayesPosterior, UninformativeLikelihoodKeepsPrior) {
    auto prior = Categorical({0.2, 0.3, 0.5});
    StochasticMatrix A(Matrix(2, 3, {0.4, 0.4, 0.4, 0.6, 0.6, 0.6}));
    auto q = bayes_posterior(prior, A, 1);
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(q.dist[x], prior[x], 1e-15);
}

TEST(BayesPosterior, HandExample) {
    StochasticMatrix A(Matrix(2, 2, {0.8, 0.2, 0.2, 0.8}));
    auto q = bayes_posterior(Categorical({0.5, 0.5}), A, 0);
    EXPECT_NEAR(q.dist[0], 0.8, 1e-15);
    EXPECT_NEAR(q.dist[1], 0.2, 1e-15);
}

TEST(BayesPosterior, Errors) {
    EXPECT_THROW(bayes_posterior(Categorical({1.0, 0.0}), StochasticMatrix::identity(2), 1),
                 impossible_observation);
    EXPECT_THROW(bayes_posterior(Categorical({1.0, 0.0}), StochasticMatrix::identity(2), 2),
                 index_out_of_range);
}

TEST(BeliefPredict, Examples) {
    Categorical b({0.5, 0.5});
    auto id = GenerativeModel(StochasticMatrix::identity(2),
                              {StochasticMatrix::identity(2),
                               StochasticMatrix(Matrix(2, 2, {0.0, 1.0, 1.0, 0.0})),
                               StochasticMatrix(Matrix(2, 2, {0.9, 0.2, 0.1, 0.8}))},
                              b, 1);
    EXPECT_EQ(belief_predict(b, 0, id), b);
    auto swapped = belief_predict(Categorical({0.3, 0.7}), 1, id);
    EXPECT_DOUBLE_EQ(swapped[0], 0.7);
    auto mixed = belief_predict(b, 2, id);
    EXPECT_NEAR(mixed[0], 0.55, 1e-15);
    EXPECT_NEAR(mixed[1], 0.45, 1e-15);
    EXPECT_THROW(belief_predict(b, 3, id), index_out_of_range);
}

TEST(BeliefPredict, PreservesMass) {
    Rng rng(2);
    for (int i = 0; i < 500; ++i) {
        auto m = random_3state(rng);
        auto out = belief_predict(test::random_categorical(rng, 3), i % 2, m);
        double total = 0.0;
        for (double p : out) total += p;
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(MixWithUniform, Endpoints) {
    Categorical p({0.7, 0.2, 0.1});
    EXPECT_EQ(mix_with_uniform(p, 0.0), p);
    for (double v : mix_with_uniform(p, 1.0)) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
    EXPECT_THROW(mix_with_uniform(p, 1.5), error);
    auto q = perturb({p, PosteriorSource::exact_bayes}, 0.25);
    EXPECT_EQ(q.source, PosteriorSource::supplied_approximation);
}

TEST(Vfe, ExactPosteriorIsTight) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        auto m = random_3state(rng);
        std::size_t const o = i % 3;
        auto q = bayes_posterior(m.initial_prior(), m.likelihood(), o);
        auto r = vfe(q, o, m.initial_prior(), m);
        double ev = 0.0;
        for (std::size_t x = 0; x < 3; ++x) ev += m.likelihood()(o, x) * m.initial_prior()[x];
        EXPECT_NEAR(r.posterior_divergence, 0.0, 1e-12);
        EXPECT_NEAR(r.vfe, -std::log(ev), 1e-12);
    }
}

TEST(Vfe, PriorUnderUninformativeLikelihoodHasNoComplexity) {
    Categorical prior({0.2, 0.3, 0.5});
    StochasticMatrix A(Matrix(2, 3, {0.4, 0.4, 0.4, 0.6, 0.6, 0.6}));
    auto r = vfe({prior, PosteriorSource::supplied_approximation}, 0, prior, model_with(A, prior));
    EXPECT_NEAR(r.complexity, 0.0, 1e-15);
    EXPECT_EQ(r.source, PosteriorSource::supplied_approximation);
}

TEST(Vfe, DecompositionsAgreeAndBound) {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        auto m = random_3state(rng);
        std::size_t const o = i % 3;
        auto exact = bayes_posterior(m.initial_prior(), m.likelihood(), o);
        auto q = perturb(exact, rng.uniform_open());
        auto r = vfe(q, o, m.initial_prior(), m);
        EXPECT_NEAR(r.vfe, -r.accuracy + r.complexity, 1e-9);
        EXPECT_NEAR(r.vfe, r.neg_log_evidence + r.posterior_divergence, 1e-9);
        EXPECT_GE(r.vfe, r.neg_log_evidence - 1e-12);
        // Replacing q by the exact posterior never increases the VFE.
        EXPECT_LE(vfe(exact, o, m.initial_prior(), m).vfe, r.vfe + 1e-12);
    }
}

TEST(Vfe, BiasedVariant) {
    Rng rng(5);
    auto m = random_3state(rng);
    PreferenceModel pref{PreferenceKind::observations, test::random_categorical(rng, 3)};
    auto q = perturb(bayes_posterior(m.initial_prior(), m.likelihood(), 1), 0.3);
    auto r = vfe(q, 1, m.initial_prior(), m, pref);
    EXPECT_TRUE(r.biased);
    // The biased row is p~(o) Q(x|o), so its evidence is p~(o).
    EXPECT_NEAR(r.neg_log_evidence, -std::log(pref.dist[1]), 1e-12);
    EXPECT_NEAR(r.vfe, r.neg_log_evidence + r.posterior_divergence, 1e-9);
}

TEST(Vfe, AbsoluteContinuity) {
    Categorical prior({0.5, 0.5, 0.0});
    auto m = model_with(StochasticMatrix::identity(3), Categorical::uniform(3));
    auto q = Posterior{Categorical({0.5, 0.5, 0.0}), PosteriorSource::supplied_approximation};
    EXPECT_THROW(vfe(q, 0, prior, m), absolute_continuity_violation);
}
