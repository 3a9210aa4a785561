#include <cmath>

#include <gtest/gtest.h>

#include "efelab/envs.hpp"
#include "efelab/functionals.hpp"
#include "support.hpp"

using namespace efelab;

namespace {

double const ln2 = std::log(2.0);
double const ln3 = std::log(3.0);

PreferenceModel obs_pref(Categorical p) { return {PreferenceKind::observations, std::move(p)}; }

StochasticMatrix flat(std::size_t O, std::size_t S) {
    return StochasticMatrix(Matrix(O, S, 1.0 / static_cast<double>(O)));
}

void expect_decompositions(FunctionalReport const& r, double tol = 1e-9) {
    for (auto const& d : r.decompositions) EXPECT_NEAR(r.reassemble(d), r.value, tol) << d.name;
}

}  // namespace

TEST(PredictiveState, IdentityLikelihood) {
    auto ps = predictive_state(Categorical::uniform(2), StochasticMatrix::identity(2));
    EXPECT_NEAR(ps.q_o[0], 0.5, 1e-15);
    EXPECT_EQ(ps.q_x_given_o, StochasticMatrix::identity(2));
    EXPECT_EQ(ps.posterior_source(), PosteriorSource::exact_bayes);
}

TEST(PredictiveState, UninformativeLikelihood) {
    Categorical qx({0.1, 0.6, 0.3});
    auto ps = predictive_state(qx, flat(2, 3));
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(ps.q_x_given_o(x, o), qx[x], 1e-15);
}

TEST(PredictiveState, MarginalsAndRecomposition) {
    Rng rng(31);
    for (int i = 0; i < 300; ++i) {
        std::size_t const O = 1 + i % 4, S = 1 + (i / 4) % 4;
        auto A = test::random_stochastic(rng, O, S);
        auto qx = test::random_categorical(rng, S);
        auto ps = predictive_state(qx, A);
        auto back = Joint2::compose_transposed(ps.q_x_given_o, ps.q_o);
        for (std::size_t o = 0; o < O; ++o)
            for (std::size_t x = 0; x < S; ++x) EXPECT_NEAR(back(o, x), ps.joint(o, x), 1e-12);
        auto f = factorize(ps.joint);
        for (std::size_t x = 0; x < S; ++x) EXPECT_NEAR(f.col_marginal[x], qx[x], 1e-12);
    }
}

TEST(PredictiveState, OverrideChecks) {
    auto qx = Categorical::uniform(2);
    EXPECT_THROW(predictive_state(qx, StochasticMatrix::identity(2), StochasticMatrix::identity(3)),
                 dimension_mismatch);
    EXPECT_THROW(predictive_state(Categorical::uniform(3), StochasticMatrix::identity(2)),
                 dimension_mismatch);
    auto ps = perturbed_predictive_state(qx, StochasticMatrix::identity(2), 0.5);
    EXPECT_EQ(ps.posterior_source(), PosteriorSource::supplied_approximation);
    EXPECT_NEAR(ps.posterior()(0, 0), 0.75, 1e-15);
    EXPECT_EQ(ps.joint, predictive_state(qx, StochasticMatrix::identity(2)).joint);
}

TEST(Efe, IdentityLikelihoodSymmetricCase) {
    auto ps = predictive_state(Categorical::uniform(2), StochasticMatrix::identity(2));
    auto r = efe_step(ps, obs_pref(Categorical::uniform(2)));
    EXPECT_NEAR(r.term("extrinsic"), ln2, 1e-15);
    EXPECT_NEAR(r.term("information_gain"), ln2, 1e-15);
    EXPECT_NEAR(r.value, 0.0, 1e-15);
    expect_decompositions(r);
}

TEST(Efe, UninformativeLikelihood) {
    auto ps = predictive_state(Categorical({0.2, 0.8}), flat(3, 2));
    auto r = efe_step(ps, obs_pref(Categorical::uniform(3)));
    EXPECT_NEAR(r.term("information_gain"), 0.0, 1e-15);
    EXPECT_NEAR(r.value, ln3, 1e-15);
    expect_decompositions(r);
}

TEST(Efe, ReportShape) {
    auto ps = predictive_state(Categorical::uniform(2), StochasticMatrix::identity(2));
    auto r = efe_step(ps, obs_pref(Categorical::uniform(2)));
    EXPECT_EQ(r.name, Functional::efe);
    EXPECT_EQ(r.decompositions.size(), 6u);
    EXPECT_FALSE(r.clamped);
    EXPECT_THROW(r.term("nope"), error);
    EXPECT_THROW(r.decomposition("nope"), error);
}

TEST(Efe, RandomModelsAllDecompositionsAgree) {
    Rng rng(32);
    for (int i = 0; i < 300; ++i) {
        auto A = test::random_stochastic(rng, 3, 3);
        auto ps = perturbed_predictive_state(test::random_categorical(rng, 3), A, (i % 3) * 0.25);
        for (auto kind : {PreferenceKind::observations, PreferenceKind::states}) {
            PreferenceModel pref{kind, test::random_categorical(rng, 3)};
            auto r = efe_step(ps, pref);
            expect_decompositions(r);
            EXPECT_NEAR(r.value, r.term("extrinsic") + r.term("post_err") - r.term("information_gain"), 1e-9);
        }
    }
}

TEST(Efe, RiskIsKlControlWithExactConditionals) {
    Rng rng(33);
    for (int i = 0; i < 100; ++i) {
        auto ps = predictive_state(test::random_categorical(rng, 4), test::random_stochastic(rng, 3, 4));
        PreferenceModel pref{PreferenceKind::states, test::random_categorical(rng, 4)};
        auto r = efe_step(ps, pref);
        EXPECT_NEAR(r.term("risk"), r.term("kl_control"), 1e-12);
        EXPECT_NEAR(r.value, r.term("kl_control") + r.term("ambiguity"), 1e-9);
    }
}

TEST(Fef, ExactConditionalsHaveNoPosteriorError) {
    Rng rng(34);
    for (int i = 0; i < 100; ++i) {
        auto ps = predictive_state(test::random_categorical(rng, 3), test::random_stochastic(rng, 3, 3));
        auto pref = obs_pref(test::random_categorical(rng, 3));
        auto r = fef_step(ps, pref);
        EXPECT_NEAR(r.term("post_err"), 0.0, 1e-12);
        double ev = 0.0;
        for (std::size_t o = 0; o < 3; ++o) ev -= ps.q_o[o] * std::log(pref.dist[o]);
        EXPECT_NEAR(r.value, ev, 1e-12);
    }
}

TEST(Fef, IdentityLikelihoodSymmetricCase) {
    auto ps = predictive_state(Categorical::uniform(2), StochasticMatrix::identity(2));
    auto r = fef_step(ps, obs_pref(Categorical::uniform(2)));
    EXPECT_NEAR(r.value, ln2, 1e-15);
    EXPECT_NEAR(r.term("complexity"), ln2, 1e-15);
    expect_decompositions(r);
}

TEST(Fef, MinusInformationGainIsEfeUnderOverrides) {
    Rng rng(35);
    for (int i = 0; i < 300; ++i) {
        auto ps = perturbed_predictive_state(test::random_categorical(rng, 3),
                                             test::random_stochastic(rng, 3, 3), rng.uniform_open() * 0.5);
        auto pref = obs_pref(test::random_categorical(rng, 3));
        auto fef = fef_step(ps, pref);
        auto efe = efe_step(ps, pref);
        EXPECT_NEAR(fef.value - fef.term("information_gain"), efe.value, 1e-9);
        EXPECT_GE(fef.term("post_err"), 0.0);
        expect_decompositions(fef);
    }
}

TEST(Feef, IdenticalJointsGiveZero) {
    Categorical qx({0.3, 0.7});
    auto ps = predictive_state(qx, flat(3, 2));
    auto r = feef_step(ps, obs_pref(ps.q_o));
    EXPECT_NEAR(r.value, 0.0, 1e-15);
}

TEST(Feef, DeterministicLikelihoodHasNoEntropyTerm) {
    Rng rng(36);
    StochasticMatrix A(Matrix(2, 3, {1.0, 0.0, 1.0, 0.0, 1.0, 0.0}));
    auto ps = predictive_state(test::random_categorical(rng, 3), A);
    auto pref = obs_pref(test::random_categorical(rng, 2));
    auto feef = feef_step(ps, pref);
    auto efe = efe_step(ps, pref);
    EXPECT_NEAR(feef.term("likelihood_entropy"), 0.0, 1e-15);
    EXPECT_NEAR(feef.term("extrinsic"), efe.term("extrinsic"), 1e-12);
}

TEST(Feef, StructureOnRandomModels) {
    Rng rng(37);
    for (int i = 0; i < 300; ++i) {
        auto ps = predictive_state(test::random_categorical(rng, 3), test::random_stochastic(rng, 3, 3));
        auto pref = obs_pref(test::random_categorical(rng, 3));
        auto feef = feef_step(ps, pref);
        auto efe = efe_step(ps, pref);
        EXPECT_NEAR(feef.value, feef.term("extrinsic") + feef.term("intrinsic"), 1e-9);
        EXPECT_EQ(feef.term("intrinsic"), efe.term("epistemic"));
        EXPECT_NEAR(feef.term("extrinsic"), efe.term("extrinsic") - feef.term("likelihood_entropy"), 1e-9);
        auto const b = build_biased_joint(pref, ps.joint, ps.likelihood).joint;
        auto flatten = [](Joint2 const& j) {
            return Categorical(std::vector<double>(j.matrix().data().begin(), j.matrix().data().end()));
        };
        EXPECT_NEAR(feef.value, kl_divergence(flatten(ps.joint), flatten(b)), 1e-12);
        expect_decompositions(feef);
    }
}

TEST(Feef, CueTaskGoCue) {
    auto t = cue_task_factory();
    auto ps = predictive_state(Categorical({0.0, 0.5, 0.0, 0.5}), t.model);
    EXPECT_NEAR(feef_step(ps, t.preferences).value, ln3 - ln2, 1e-12);
}

TEST(Gfe, IndependentJointEqualsFeef) {
    auto ps = predictive_state(Categorical({0.25, 0.75}), flat(3, 2));
    auto pref = obs_pref(Categorical({0.2, 0.3, 0.5}));
    EXPECT_NEAR(gfe_step(ps, pref).value, feef_step(ps, pref).value, 1e-12);
}

TEST(Gfe, IdentityLikelihoodMutualInformation) {
    auto ps = predictive_state(Categorical::uniform(2), StochasticMatrix::identity(2));
    auto r = gfe_step(ps, obs_pref(Categorical::uniform(2)));
    EXPECT_NEAR(r.term("mutual_information"), ln2, 1e-15);
    expect_decompositions(r);
}

TEST(Gfe, FeefMinusMutualInformation) {
    Rng rng(38);
    for (int i = 0; i < 300; ++i) {
        auto ps = perturbed_predictive_state(test::random_categorical(rng, 3),
                                             test::random_stochastic(rng, 3, 3), (i % 3) * 0.25);
        PreferenceModel pref{i % 2 ? PreferenceKind::states : PreferenceKind::observations,
                             test::random_categorical(rng, 3)};
        auto g = gfe_step(ps, pref);
        EXPECT_NEAR(g.value, feef_step(ps, pref).value - g.term("mutual_information"), 1e-9);
        EXPECT_GE(g.term("mutual_information"), -1e-12);
    }
}

TEST(Clamping, ZeroPreferenceIsFlagged) {
    auto ps = predictive_state(Categorical::uniform(2), StochasticMatrix::identity(2));
    auto r = efe_step(ps, obs_pref(Categorical({1.0, 0.0})));
    EXPECT_TRUE(r.clamped);
    EXPECT_TRUE(std::isfinite(r.value));
}

TEST(Naturalisation, UninformativeLikelihoodHasNoGap) {
    auto ps = predictive_state(Categorical({0.4, 0.6}), flat(2, 2));
    auto d = naturalisation_diagnostics(ps, obs_pref(Categorical({0.3, 0.7})));
    EXPECT_NEAR(d.marginal_product_gap, 0.0, 1e-12);
    EXPECT_NEAR(d.max_independence_deviation, 0.0, 1e-15);
}

TEST(Naturalisation, IdentityLikelihoodGap) {
    auto ps = predictive_state(Categorical::uniform(2), StochasticMatrix::identity(2));
    auto d = naturalisation_diagnostics(ps, obs_pref(Categorical::uniform(2)));
    // Off-diagonal cells of the biased joint are empty, so the product
    // measure sees clamped logs: the gap is large and positive.
    EXPECT_GT(d.marginal_product_gap, 1.0);
    EXPECT_TRUE(d.clamped);
    EXPECT_NEAR(d.max_posterior_prior_deviation, 0.5, 1e-15);
}

TEST(Naturalisation, EntropyBoundAlwaysHolds) {
    Rng rng(39);
    for (int i = 0; i < 500; ++i) {
        auto ps = perturbed_predictive_state(test::random_categorical(rng, 3),
                                             test::random_stochastic(rng, 3, 3), (i % 3) * 0.25);
        PreferenceModel pref{i % 2 ? PreferenceKind::states : PreferenceKind::observations,
                             test::random_categorical(rng, 3)};
        auto d = naturalisation_diagnostics(ps, pref);
        EXPECT_TRUE(d.entropy_bound_holds);
        EXPECT_TRUE(d.prior_substitution_bound_holds);
    }
}

TEST(Functional, ParseAndName) {
    for (Functional f : kAllFunctionals) EXPECT_EQ(parse_functional(to_string(f)), f);
    EXPECT_FALSE(parse_functional("vfe"));
}
