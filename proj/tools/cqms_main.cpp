// cqms — batch runner for the operator-system metric experiments

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "cqms/suites.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cqms — matrix state space metrics, bridges, and approximation sweeps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed_override = -1;

    const std::vector<std::string> suites = {"validate", "distance", "berezin", "nctorus",
                                             "report"};
    for (const std::string& name : suites) {
        auto* sub = app.add_subcommand(name, name + " suite");
        sub->add_option("--config", config_path, "configuration JSON")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string suite = app.get_subcommands().front()->get_name();

    try {
        cqms::io::json config = cqms::io::load_json(config_path);
        if (config.value("suite", suite) != suite) {
            std::cerr << "config suite does not match the subcommand\n";
            return cqms::suites::exit_config;
        }
        config["suite"] = suite;
        if (seed_override >= 0) config["seed"] = static_cast<std::uint64_t>(seed_override);

        const auto t0 = std::chrono::steady_clock::now();
        auto result = cqms::suites::run(config, out_dir);
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        // timing goes to the console only, keeping result.json bit-reproducible
        std::cerr << suite << " finished in " << ms << " ms, exit "
                  << result.exit_code << "\n";
        for (const auto& p : result.outputs) std::cout << p.string() << "\n";
        return result.exit_code;
    } catch (const cqms::input_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cqms::suites::exit_config;
    } catch (const cqms::validation_error& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return cqms::suites::exit_validation;
    } catch (const cqms::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return cqms::suites::exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cqms::suites::exit_numerical;
    }
}
