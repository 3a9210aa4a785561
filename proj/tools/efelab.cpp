// efelab command-line tool: verify, plan, simulate, emit-fixture.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "efelab/commands.hpp"

namespace {

bool parse_dims(std::string const& text, efelab::SuiteDims& dims) {
    std::size_t s = 0, o = 0, a = 0;
    char x1 = 0, x2 = 0;
    std::istringstream is(text);
    if (!(is >> s >> x1 >> o >> x2 >> a) || x1 != 'x' || x2 != 'x' || !is.eof()) return false;
    if (s == 0 || o == 0 || a == 0) return false;
    dims.states = s;
    dims.obs = o;
    dims.actions = a;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact evaluation of expected free energy and related objectives on discrete POMDPs"};
    app.require_subcommand(1);

    efelab::RunConfig cfg;
    std::string functional = "efe";
    std::string format = "csv";
    std::string dims = "3x3x3";
    std::string out_path;
    std::string select = "argmax";
    std::size_t horizon = 0;
    std::size_t steps = 0;
    std::string task;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model_path, "Model file (JSON)");
        sub->add_option("--functional", functional, "efe | fef | feef | gfe");
        sub->add_option("--horizon", horizon, "Planning horizon (overrides the model's)");
        sub->add_option("--gamma", cfg.gamma, "Policy precision");
        sub->add_option("--eta", cfg.eta, "Posterior override mixture with the uniform");
        sub->add_option("--seed", cfg.seed, "Seed");
        sub->add_option("--out", out_path, "Output file (default: stdout)");
        sub->add_option("--format", format, "csv | text");
    };

    auto* verify = app.add_subcommand("verify", "Run the identity suite");
    add_common(verify);
    verify->add_option("--seeds", cfg.seeds, "Number of random models");
    verify->add_option("--dims", dims, "SxOxA");
    verify->add_option("--tolerance", cfg.tolerance, "Tolerance for equalities");

    auto* plan = app.add_subcommand("plan", "Policy posterior for a model file");
    add_common(plan);

    auto* simulate = app.add_subcommand("simulate", "Closed-loop run against a model file");
    add_common(simulate);
    simulate->add_option("--steps", steps, "Environment steps (default: the model's horizon)");
    simulate->add_option("--select", select, "argmax | sample");

    auto* emit = app.add_subcommand("emit-fixture", "Print a shipped task as a model file");
    emit->add_option("task", task, "cue_task | bandit")->required();
    emit->add_option("--out", out_path, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? 0 : efelab::kExitUsage;
    }

    auto usage = [](std::string const& msg) {
        std::cerr << "error: " << msg << '\n';
        return efelab::kExitUsage;
    };
    if (auto f = efelab::parse_functional(functional)) cfg.functional = *f;
    else return usage("unknown functional '" + functional + "'");
    if (format == "csv") cfg.format = efelab::OutputFormat::csv;
    else if (format == "text") cfg.format = efelab::OutputFormat::text;
    else return usage("unknown format '" + format + "'");
    if (!parse_dims(dims, cfg.dims)) return usage("--dims must look like 3x3x3");
    if (select == "argmax") cfg.selection = efelab::SelectionMode::deterministic;
    else if (select == "sample") cfg.selection = efelab::SelectionMode::stochastic;
    else return usage("unknown selection '" + select + "'");
    if (verify->count("--horizon") || plan->count("--horizon") || simulate->count("--horizon")) {
        if (horizon == 0) return usage("horizon must be >= 1");
        cfg.horizon = horizon;
    }
    if (simulate->count("--steps")) cfg.steps = steps;

    std::ostringstream out;
    int code = efelab::kExitOk;
    if (*verify) code = efelab::run_verify(cfg, out, std::cerr);
    else if (*plan) code = efelab::run_plan(cfg, out, std::cerr);
    else if (*simulate) code = efelab::run_simulate(cfg, out, std::cerr);
    else code = efelab::run_emit_fixture(task, out, std::cerr);

    if (out_path.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) return usage("cannot write '" + out_path + "'");
        f << out.str();
    }
    return code;
}
