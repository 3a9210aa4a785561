// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit code
// is nonzero if any selected criterion fails.
//
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "efelab/efelab.hpp"
#include "process.hpp"

using namespace efelab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

IdentitySuiteReport const& suite() {
    static IdentitySuiteReport const rep = identity_suite(100, {3, 3, 3, 2});
    return rep;
}

bool no_failures(IdentitySuiteReport const& rep, char const* id) {
    for (auto const& f : rep.failures)
        if (f.id == id) return false;
    return true;
}

Outcome identity(std::initializer_list<char const*> ids) {
    auto const& rep = suite();
    Outcome o{true, ""};
    for (auto const* id : ids) {
        double const v = rep.max_violation.at(id);
        o.pass = o.pass && no_failures(rep, id) && v <= 1e-9;
        o.detail += std::string(o.detail.empty() ? "" : ", ") + "max violation (" + id + ") " + num(v);
    }
    return o;
}

Outcome criterion_1() {
    auto const start = std::chrono::steady_clock::now();
    auto const rep = identity_suite(100, {3, 3, 3, 2});
    double const secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double worst = 0.0;
    for (auto const& [id, v] : rep.max_violation) worst = std::max(worst, v);
    return {rep.ok() && rep.seeds_run == 100 && worst <= 1e-9 && secs < 10.0,
            std::to_string(rep.failures.size()) + " failures over " + std::to_string(rep.seeds_run) +
                " seeds, worst violation " + num(worst) + ", " + num(secs) + " s"};
}

Outcome criterion_2() { return identity({"i"}); }

Outcome criterion_3() {
    auto const& rep = suite();
    auto o = identity({"ii"});
    o.pass = o.pass && rep.efe_gap_positive > 0 && rep.efe_gap_negative > 0 &&
             rep.min_eta_half_fef_gap > 0.0;
    o.detail += "; EFE gap signs with overrides: " + std::to_string(rep.efe_gap_positive) +
                " above, " + std::to_string(rep.efe_gap_negative) + " below";
    return o;
}

Outcome criterion_4() { return identity({"iv"}); }
Outcome criterion_5() { return identity({"v", "vii"}); }

Outcome criterion_6() {
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (std::size_t T = 1; T <= 3; ++T) {
            auto const r = random_model(3, 3, 2, T, 1000 + seed);
            auto const b0 = r.model.initial_prior();
            for (auto const& p : enumerate_policies(2, T)) {
                for (double eta : {0.0, 0.5}) {
                    double const traj = trajectory_fef_exact(b0, p, r.model, r.preferences, eta);
                    double const sum = evaluate_policy(p, Functional::fef, b0, r.model, r.preferences, eta).total;
                    worst = std::max(worst, std::abs(traj - sum));
                    ++cases;
                }
            }
        }
    }
    return {worst <= 1e-9, std::to_string(cases) + " policies, max |trajectory - per-step sum| " + num(worst)};
}

Outcome criterion_7() {
    auto const t = cue_task_factory();
    struct Target {
        Functional f;
        double mass;
        char const* label;
    };
    Target const targets[] = {{Functional::efe, 2.0 / 3.0, "2/3"},
                              {Functional::feef, 2.0 / 3.0, "2/3"},
                              {Functional::fef, 1.0 / 3.0, "1/3"}};
    Outcome o{true, ""};
    for (auto const& tg : targets) {
        auto const res = plan(tg.f, t.model.initial_prior(), t.model, t.preferences, 1.0);
        double const got = res.posterior[1];  // policy [go-cue]
        bool const ok = std::abs(got - tg.mass) <= 1e-9;
        o.pass = o.pass && ok;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s go-cue %.12g (want %s)%s", to_string(tg.f), got, tg.label,
                      ok ? "" : " MISMATCH");
        o.detail += std::string(o.detail.empty() ? "" : "; ") + buf;
    }
    return o;
}

Outcome criterion_8() {
    Outcome o{true, ""};
    auto const t = bandit_factory();
    for (Functional f : kAllFunctionals) {
        auto const res = plan(f, t.model.initial_prior(), t.model, t.preferences);
        bool const ok = res.posterior[0] > res.posterior[1];
        o.pass = o.pass && ok;
        if (!ok) o.detail += std::string(to_string(f)) + " prefers arm 1; ";
    }
    auto const flat = bandit_factory(0.9, 0.1, PreferenceModel{PreferenceKind::observations, Categorical::uniform(2)});
    double worst = 0.0;
    for (Functional f : kAllFunctionals) {
        auto const res = plan(f, flat.model.initial_prior(), flat.model, flat.preferences);
        worst = std::max(worst, std::abs(res.evaluations[0].total - res.evaluations[1].total));
    }
    o.pass = o.pass && worst <= 1e-12;
    o.detail += "arm 0 ranked first under all four functionals; uniform-preference tie gap " + num(worst);
    return o;
}

Outcome criterion_9() { return identity({"vi"}); }

Outcome criterion_10() {
    std::string const cue = test::fixture("cue_task.json");
    std::string const bandit = test::fixture("bandit.json");
    std::vector<std::string> const commands = {
        "verify --seeds 10 --seed 4",
        "verify --seeds 5 --format text --eta 0.5",
        "plan --model " + cue + " --functional efe",
        "plan --model " + cue + " --functional fef --format text",
        "plan --model " + bandit + " --functional feef --horizon 4 --eta 0.25",
        "plan --model " + bandit + " --functional gfe --gamma 2.5",
        "simulate --model " + cue + " --steps 5 --select sample --seed 11",
        "simulate --model " + bandit + " --steps 30 --select sample --seed 12 --functional fef",
        "emit-fixture bandit",
    };
    for (auto const& c : commands) {
        auto const a = test::run_cli(c);
        auto const b = test::run_cli(c);
        if (a.exit_code != 0 || a.out.empty()) return {false, "'" + c + "' exited " + std::to_string(a.exit_code)};
        if (a.out != b.out || a.exit_code != b.exit_code) return {false, "'" + c + "' differs between runs"};
    }
    return {true, std::to_string(commands.size()) + " commands byte-identical across repeated runs"};
}

std::vector<std::function<Outcome()>> const kCriteria = {
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
};

char const* const kTitles[] = {
    "identity suite green",
    "FEF - IG = EFE",
    "bound directions",
    "decomposition concordance",
    "FEEF structure",
    "trajectory factorization",
    "behavioural separation on the cue task",
    "bandit extrinsic value",
    "GFE = FEEF - MI",
    "determinism",
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            long const n = std::strtol(argv[++i], nullptr, 10);
            if (n < 1 || n > static_cast<long>(kCriteria.size())) {
                std::fprintf(stderr, "criterion must be 1..%zu\n", kCriteria.size());
                return 2;
            }
            selected.push_back(static_cast<std::size_t>(n));
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
            return 2;
        }
    }
    if (selected.empty())
        for (std::size_t n = 1; n <= kCriteria.size(); ++n) selected.push_back(n);

    bool all = true;
    for (std::size_t n : selected) {
        Outcome o;
        try {
            o = kCriteria[n - 1]();
        } catch (std::exception const& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("criterion %zu (%s): %s: %s\n", n, kTitles[n - 1], o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
    }
    return all ? 0 : 1;
}
