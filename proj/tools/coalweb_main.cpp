#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "coalweb/acceptance.hpp"
#include "coalweb/config.hpp"
#include "coalweb/lattice.hpp"
#include "coalweb/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"coalescing path web: experiments, acceptance suites, path export"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string format = "pathset";
    std::string suite;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir = ".";

    auto* seed_opt = app.add_option("--seed", seed, "root seed override");
    auto* thr_opt = app.add_option("--threads", threads, "worker threads (0 = auto)");
    app.add_option("--out", out_dir, "output directory");

    auto* run = app.add_subcommand("run", "execute one experiment config");
    run->add_option("config", config_path, "config file")->required();

    auto* acc = app.add_subcommand("acceptance", "run an acceptance suite or 'all'");
    acc->add_option("suite", suite, "suite name or 'all'")->required();

    auto* exp = app.add_subcommand("export-paths", "write the configured paths to paths.txt");
    exp->add_option("config", config_path, "config file")->required();
    exp->add_option("--format", format, "output format (only 'pathset')");

    CLI11_PARSE(app, argc, argv);

    coalweb::RunOptions opt;
    if (*seed_opt) opt.seed = seed;
    if (*thr_opt) opt.threads = threads;
    opt.out_dir = out_dir;

    try {
        if (run->parsed()) return coalweb::run_and_write(config_path, opt);
        if (acc->parsed()) {
            coalweb::AcceptanceOptions ao;
            if (*seed_opt) ao.root_seed = seed;
            if (*thr_opt) ao.threads = threads;
            return coalweb::acceptance_main(suite, ao, std::cout);
        }
        if (exp->parsed()) return coalweb::export_paths(config_path, format, opt);
    } catch (const coalweb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const coalweb::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
