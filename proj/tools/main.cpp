#include <cstdint>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "banknet/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"banknet: endogenous interbank network formation and clearing simulator"};

    banknet::cli::RunOptions opts;
    std::string command;
    std::uint64_t seed = 0;
    std::size_t draws = 0;
    int threads = 0;

    app.add_option("--command", command,
                   "calibrate | optimize-single | form | welfare | clear")
        ->required();
    app.add_option("--config", opts.config_path, "experiment configuration file")->required();
    app.add_option("--out", opts.out_dir, "output directory for CSVs, manifest and report")
        ->required();
    auto* seed_opt = app.add_option("--seed", seed, "override [simulation].seed");
    auto* draws_opt = app.add_option("--draws", draws, "override [simulation].draws");
    app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

    CLI11_PARSE(app, argc, argv);

    opts.command = command;
    if (*seed_opt) opts.seed = seed;
    if (*draws_opt) opts.draws = draws;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    opts.threads = threads > 0 ? threads : 1;

    return banknet::cli::run(opts);
}
