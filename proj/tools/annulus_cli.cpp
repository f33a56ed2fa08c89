// Scenario runner: annulus <subcommand> [--config FILE] [--seed N] [--out DIR] [--workers N]

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

#include "annulus/errors.hpp"
#include "annulus/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Annulus homeomorphism toolkit"};
    app.require_subcommand(1);

    std::string config_path, out;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool seed_set = false, workers_set = false;

    for (const std::string& name : annulus::pipeline_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " pipeline");
        sub->add_option("--config", config_path, "scenario file (key = value with [sections])");
        sub->add_option("--out", out, "output directory");
        sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
            seed = s;
            seed_set = true;
        }, "random seed");
        sub->add_option_function<unsigned>("--workers", [&](const unsigned& w) {
            workers = w;
            workers_set = true;
        }, "worker threads (0 = hardware)");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        annulus::ScenarioConfig cfg;
        if (!config_path.empty()) cfg = annulus::load_config(config_path);
        cfg.pipeline = app.get_subcommands().front()->get_name();
        if (!out.empty()) cfg.out = out;
        if (seed_set) cfg.seed = seed;
        if (workers_set) cfg.workers = workers;

        const annulus::RunReport r = annulus::run_scenario(cfg);
        std::cout << "pipeline " << r.pipeline << "\n";
        for (const auto& t : r.timings)
            std::cout << "  stage " << std::left << std::setw(14) << t.stage << std::fixed << std::setprecision(3)
                      << t.seconds << " s\n";
        for (const auto& v : r.verdicts) std::cout << "  " << v << "\n";
        std::cout << "  " << r.manifest.size() << " artefacts under " << cfg.out << "\n";
        std::cout << "exit " << r.exit_code << "\n";
        return r.exit_code;
    } catch (const annulus::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
