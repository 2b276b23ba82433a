#include "cli.hpp"

#include "hyperwalk/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    using namespace hyperwalk;

    CLI::App app{"hyperwalk: random walks and hyperbolicity diagnostics on Cayley graphs"};
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool validate_only = false;
    app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory (overrides config.output)");
    app.add_option("--seed", seed, "seed for sampled commands (overrides config.seed)");
    app.add_option("--threads", threads, "worker threads (overrides config.threads)")->check(CLI::PositiveNumber);
    app.add_flag("--validate-only", validate_only, "check the config and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    cli::RunConfig config;
    try {
        std::ifstream in(config_path);
        const auto doc = cli::json::parse(in);
        config = cli::parse_config(doc);
    } catch (const cli::json::exception& e) {
        std::cerr << "error: malformed config: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (seed) config.seed = seed;
    if (threads > 0) config.threads = threads;
    if (!out.empty()) config.output = out;

    if (validate_only) {
        const auto diags = cli::validate(config);
        for (const auto& d : diags) std::cerr << "diagnostic: " << d << "\n";
        if (diags.empty()) std::cout << "config ok\n";
        return diags.empty() ? 0 : 2;
    }

    const auto result = cli::run(config, config.output);
    const auto& report = result.report;
    if (report.contains("diagnostics"))
        for (const auto& d : report.at("diagnostics")) std::cerr << "diagnostic: " << d.get<std::string>() << "\n";
    if (report.contains("error")) std::cerr << "error: " << report.at("error").get<std::string>() << "\n";
    std::cout << report.at("status").get<std::string>() << ": " << config.command << " -> "
              << (std::filesystem::path(config.output) / "report.json").string() << "\n";
    return result.exit_code;
}
