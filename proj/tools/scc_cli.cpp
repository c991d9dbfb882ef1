#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scc/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"successive cache-channel coding over packet erasure broadcast channels"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string grid_text;
    std::string idx_text;
    std::string plan_out_path;
    std::string policy_name = "worst_case_scan";
    std::uint64_t seed = 1;
    std::int64_t n = 200000;
    int trials = 200;
    double rate_fraction = 0.9;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config/preset JSON")->required();
        sub->add_option("--out", out_path, "output path")->required();
        sub->add_option("--seed", seed, "rng seed");
    };

    CLI::App* tradeoff = app.add_subcommand(
        "tradeoff", "memory-rate trade-off CSV: SCC envelope, STW envelope, upper bound");
    add_common(tradeoff);
    tradeoff->add_option("--grid", grid_text, "memory grid start:stop:count");

    CLI::App* bound = app.add_subcommand("bound", "converse upper bound CSV");
    add_common(bound);
    bound->add_option("--grid", grid_text, "memory grid start:stop:count");

    CLI::App* study = app.add_subcommand(
        "allocation-study", "rate vs. total cache budget for each weak-receiver count");
    add_common(study);
    study->add_option("--grid", grid_text, "budget grid start:stop:count");

    CLI::App* simulate = app.add_subcommand(
        "simulate", "Monte Carlo placement/delivery/decoding over the erasure channel");
    add_common(simulate);
    simulate->add_option("--idx", idx_text, "scheme index p,q")->required();
    simulate->add_option("--n", n, "blocklength in packets");
    simulate->add_option("--trials", trials, "number of trials");
    simulate->add_option("--rate-fraction", rate_fraction, "operating rate / R_(p,q)");
    simulate->add_option("--demand-policy", policy_name,
                         "worst_case_scan | uniform_random");
    simulate->add_option("--plan-out", plan_out_path,
                         "also dump the all-distinct-demand delivery plan (JSONL)");

    CLI11_PARSE(app, argc, argv);

    try {
        scc::LoadedSpec spec = scc::load_spec(config_path);
        if (!grid_text.empty()) spec.grid = scc::parse_grid(grid_text);

        if (tradeoff->parsed()) {
            scc::cmd_tradeoff(spec, out_path);
        } else if (bound->parsed()) {
            scc::cmd_bound(spec, out_path);
        } else if (study->parsed()) {
            if (!grid_text.empty()) spec.raw["budgets"] = grid_text;
            scc::cmd_cache_allocation_study(spec, out_path);
        } else if (simulate->parsed()) {
            const scc::SchemeIndex idx = scc::parse_index(idx_text);
            const scc::SimulationReport rep = scc::cmd_simulate(
                spec, idx, rate_fraction, n, trials,
                scc::demand_policy_from_name(policy_name), seed, out_path, plan_out_path);
            if (rep.p_e_defined)
                std::cout << "p_e " << scc::fmt_g(rep.p_e) << " over " << rep.trials
                          << " trials\n";
            else
                std::cout << "no trials run; p_e undefined\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
