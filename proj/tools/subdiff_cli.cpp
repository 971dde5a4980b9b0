#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subdiff/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"age-structured subdiffusion solvers and experiments"};
    std::string subcommand, config_path, out_dir;
    std::optional<unsigned long long> seed;
    std::vector<std::string> sets;
    bool print_only = false;
    app.add_option("subcommand", subcommand,
                   "solve-renewal | solve-agepde | simulate-ctrw | solve-fracpde | experiment-convergence | "
                   "experiment-msd | experiment-renewal | validate (aliases: msd, convergence, renewal)");
    app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--out", out_dir, "output root; runs go to <out>/<config digest>/");
    app.add_option("--set", sets, "key=value override (repeatable)");
    app.add_flag("--print-config", print_only, "print the resolved config and exit");

    auto usage = [](const std::string& msg) {
        nlohmann::json j{{"status", "error"}, {"exit", 2}, {"kind", "usage"}, {"message", msg}};
        std::cerr << j.dump() << "\n";
        return 2;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage(e.what());
    }

    try {
        subdiff::Overrides ov;
        for (const auto& s : sets) ov.push_back(subdiff::split_assignment(s));
        if (!subcommand.empty()) ov.emplace_back("subcommand", subcommand);
        if (seed) ov.emplace_back("seed", std::to_string(*seed));
        if (!out_dir.empty()) ov.emplace_back("out", out_dir);
        auto cfg = subdiff::load_config(config_path.empty() ? std::nullopt : std::optional<std::string>(config_path), ov);
        if (print_only) {
            std::cout << cfg.resolved_text() << "out=" << cfg.str("out") << "\n";
            return 0;
        }
        return subdiff::dispatch(cfg, std::cout, std::cerr);
    } catch (const subdiff::UsageError& e) {
        return usage(e.what());
    } catch (const std::exception& e) {
        nlohmann::json j{{"status", "error"}, {"exit", 3}, {"kind", "internal"}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 3;
    }
}
