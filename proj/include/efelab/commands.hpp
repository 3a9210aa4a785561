#pragma once

// The batch commands behind the command-line tool. Each returns an exit code
// (0 success, 1 failure, 2 usage or configuration error) and writes its
// report text to `out` and diagnostics to `err`.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "efelab/envs.hpp"
#include "efelab/functionals.hpp"
#include "efelab/inference.hpp"
#include "efelab/model_io.hpp"
#include "efelab/oracle.hpp"
#include "efelab/planning.hpp"
#include "efelab/report_io.hpp"

namespace efelab {

struct RunConfig {
    std::string model_path;
    Functional functional = Functional::efe;
    std::optional<std::size_t> horizon;  // planning depth; suite horizon for verify
    double gamma = 1.0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    OutputFormat format = OutputFormat::csv;
    // verify
    std::size_t seeds = 100;
    SuiteDims dims{};
    double tolerance = 1e-9;
    // simulate
    std::optional<std::size_t> steps;
    SelectionMode selection = SelectionMode::deterministic;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace cmd_detail {

inline std::string join_actions(Policy const& p) {
    std::string s;
    for (std::size_t i = 0; i < p.actions.size(); ++i)
        s += (i ? "-" : "") + std::to_string(p.actions[i]);
    return s;
}

inline std::optional<std::string> check_common(RunConfig const& c) {
    if (!(c.gamma > 0.0) || !std::isfinite(c.gamma)) return "gamma must be positive";
    if (!(c.eta >= 0.0 && c.eta <= 1.0)) return "eta must lie in [0, 1]";
    if (c.horizon && *c.horizon == 0) return "horizon must be >= 1";
    return std::nullopt;
}

/// Loads the model named in the config; prints the reason and returns
/// nullopt on any problem with the file.
inline std::optional<LoadedModel> load(RunConfig const& c, std::ostream& err) {
    if (c.model_path.empty()) {
        err << "error: --model is required\n";
        return std::nullopt;
    }
    try {
        return load_model(c.model_path);
    } catch (error const& e) {
        err << "error: " << e.what() << '\n';
        return std::nullopt;
    }
}

}  // namespace cmd_detail

/// Runs the identity suite on random models (or on the model file's tables).
inline int run_verify(RunConfig const& c, std::ostream& out, std::ostream& err) {
    if (auto msg = cmd_detail::check_common(c)) {
        err << "error: " << *msg << '\n';
        return kExitUsage;
    }
    if (!(c.tolerance >= 0.0)) {
        err << "error: tolerance must be nonnegative\n";
        return kExitUsage;
    }
    SuiteDims dims = c.dims;
    if (c.horizon) dims.horizon = *c.horizon;
    std::optional<RandomModel> fixed;
    if (!c.model_path.empty()) {
        auto lm = cmd_detail::load(c, err);
        if (!lm) return kExitUsage;
        GenerativeModel m = c.horizon ? lm->model.with_horizon(*c.horizon) : lm->model;
        PreferenceModel pref = lm->preferences
                                   ? *lm->preferences
                                   : PreferenceModel{PreferenceKind::observations,
                                                     Categorical::uniform(m.num_obs())};
        dims = {m.num_states(), m.num_obs(), m.num_actions(), m.horizon()};
        fixed = RandomModel{std::move(m), std::move(pref)};
    }

    IdentitySuiteReport rep;
    try {
        rep = identity_suite(c.seeds, dims, {c.tolerance, std::min(c.tolerance, 1e-12)}, c.seed,
                             fixed);
    } catch (error const& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    FlatReport r;
    r.add("seeds_run", rep.seeds_run);
    r.add("first_seed", std::to_string(c.seed));
    r.add("dims", std::to_string(dims.states) + "x" + std::to_string(dims.obs) + "x" +
                      std::to_string(dims.actions));
    r.add("horizon", dims.horizon);
    r.add("tolerance", c.tolerance);
    for (auto const* id : kIdentityIds) r.add(std::string("max_violation.") + id, rep.max_violation.at(id));
    r.add("efe_gap_positive", rep.efe_gap_positive);
    r.add("efe_gap_negative", rep.efe_gap_negative);
    r.add("max_eta0_post_err", rep.max_eta0_post_err);
    r.add("min_eta_half_fef_gap", rep.min_eta_half_fef_gap);
    r.add("marginal_product_gap_positive", rep.marginal_product_gap_positive);
    r.add("marginal_product_gap_negative", rep.marginal_product_gap_negative);
    r.add("clamped_evaluations", rep.clamped_evaluations);
    r.add("failures", rep.failures.size());
    std::size_t const shown = std::min<std::size_t>(rep.failures.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        auto const& f = rep.failures[i];
        r.add("failure." + std::to_string(i), f.id + " seed " + std::to_string(f.seed) +
                                                  " violation " + format_number(f.violation));
    }
    r.add("status", std::string(rep.ok() ? "pass" : "fail"));
    out << r.render(c.format);
    return rep.ok() ? kExitOk : kExitFailure;
}

/// Evaluates every policy of the loaded model and prints the posterior.
inline int run_plan(RunConfig const& c, std::ostream& out, std::ostream& err) {
    if (auto msg = cmd_detail::check_common(c)) {
        err << "error: " << *msg << '\n';
        return kExitUsage;
    }
    auto lm = cmd_detail::load(c, err);
    if (!lm) return kExitUsage;
    if (!lm->preferences) {
        err << "error: model file has no preferences\n";
        return kExitUsage;
    }
    GenerativeModel const m = c.horizon ? lm->model.with_horizon(*c.horizon) : lm->model;

    PlanResult res;
    try {
        res = plan(c.functional, m.initial_prior(), m, *lm->preferences, c.gamma, c.eta,
                   std::max(1u, std::thread::hardware_concurrency()));
    } catch (error const& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }

    std::ostringstream os;
    auto const& first = res.evaluations.front();
    if (c.format == OutputFormat::csv) {
        os << "policy";
        for (std::size_t t = 0; t < first.per_step.size(); ++t) {
            std::string const p = "t" + std::to_string(t + 1) + ".";
            os << ',' << p << "value";
            for (auto const& kv : first.per_step[t].terms) os << ',' << p << kv.first;
        }
        os << ",total,probability\n";
        for (std::size_t i = 0; i < res.evaluations.size(); ++i) {
            auto const& ev = res.evaluations[i];
            os << cmd_detail::join_actions(ev.policy);
            for (auto const& step : ev.per_step) {
                os << ',' << format_number(step.value);
                for (auto const& kv : step.terms) os << ',' << format_number(kv.second);
            }
            os << ',' << format_number(ev.total) << ',' << format_number(res.posterior[i]) << '\n';
        }
    } else {
        os << "functional " << to_string(c.functional) << "\ngamma " << format_number(c.gamma)
           << "\neta " << format_number(c.eta) << "\n";
        for (std::size_t i = 0; i < res.evaluations.size(); ++i) {
            auto const& ev = res.evaluations[i];
            os << "\npolicy " << cmd_detail::join_actions(ev.policy) << "\n";
            for (std::size_t t = 0; t < ev.per_step.size(); ++t) {
                FlatReport const flat = flatten(ev.per_step[t]);
                for (auto const& [k, v] : flat.rows()) os << "  t" << t + 1 << '.' << k << ' ' << v << '\n';
            }
            os << "  total " << format_number(ev.total) << "\n  probability "
               << format_number(res.posterior[i]) << '\n';
        }
    }
    out << os.str();
    return kExitOk;
}

/// Closed loop on the model file's environment: plan, act, observe, update.
inline int run_simulate(RunConfig const& c, std::ostream& out, std::ostream& err) {
    if (auto msg = cmd_detail::check_common(c)) {
        err << "error: " << *msg << '\n';
        return kExitUsage;
    }
    auto lm = cmd_detail::load(c, err);
    if (!lm) return kExitUsage;
    if (!lm->preferences) {
        err << "error: model file has no preferences\n";
        return kExitUsage;
    }
    if (c.steps && *c.steps == 0) {
        err << "error: steps must be >= 1\n";
        return kExitUsage;
    }
    GenerativeModel const world = lm->model;
    GenerativeModel const agent = c.horizon ? world.with_horizon(*c.horizon) : world;
    std::size_t const steps = c.steps.value_or(world.horizon());
    auto const& pref = *lm->preferences;

    Rng select_rng(c.seed ^ 0x5851f42d4c957f2dULL);
    std::size_t start = 0;
    if (lm->true_state) {
        start = *lm->true_state;
    } else {
        Rng init(c.seed ^ 0x14057b7ef767814fULL);
        start = init.categorical(world.initial_prior().probs());
    }
    Environment env(world, start, c.seed);

    std::ostringstream os;
    std::size_t const S = world.num_states();
    if (c.format == OutputFormat::csv) {
        os << "time,action,observation";
        for (std::size_t x = 0; x < S; ++x) os << ",belief_" << x;
        os << ",efe_total,fef_total,feef_total,gfe_total\n";
    }
    Categorical belief = world.initial_prior();
    for (std::size_t t = 1; t <= steps; ++t) {
        try {
            auto const res = plan(c.functional, belief, agent, pref, c.gamma, c.eta);
            std::size_t const chosen = select_policy(res.posterior, c.selection, &select_rng);
            Policy const& policy = res.policies[chosen];
            double totals[4];
            for (Functional f : kAllFunctionals)
                totals[static_cast<int>(f)] = evaluate_policy(policy, f, belief, agent, pref, c.eta).total;
            std::size_t const action = policy.actions.front();
            std::size_t const obs = env.step(action);
            belief = bayes_posterior(belief_predict(belief, action, agent), agent.likelihood(), obs).dist;

            if (c.format == OutputFormat::csv) {
                os << t << ',' << action << ',' << obs;
                for (double b : belief) os << ',' << format_number(b);
                for (double v : totals) os << ',' << format_number(v);
                os << '\n';
            } else {
                os << "step " << t << "\n  action " << action << "\n  observation " << obs
                   << "\n  belief";
                for (double b : belief) os << ' ' << format_number(b);
                os << '\n';
                for (Functional f : kAllFunctionals)
                    os << "  " << to_string(f) << "_total " << format_number(totals[static_cast<int>(f)])
                       << '\n';
            }
        } catch (error const& e) {
            out << os.str();
            err << "error at step " << t << ": " << e.what() << '\n';
            return kExitFailure;
        }
    }
    out << os.str();
    return kExitOk;
}

/// Writes a shipped task as a model file.
inline int run_emit_fixture(std::string const& task, std::ostream& out, std::ostream& err) {
    if (task == "cue_task") {
        out << task_fixture(cue_task_factory());
    } else if (task == "bandit") {
        out << task_fixture(bandit_factory());
    } else {
        err << "error: unknown task '" << task << "' (expected cue_task or bandit)\n";
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace efelab
