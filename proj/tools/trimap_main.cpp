#include "trimap/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<std::size_t> parse_grid(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        const unsigned long v = std::stoul(part, &used);
        if (used != part.size()) throw std::invalid_argument("--grid expects N or N,N");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("--grid expects N or N,N");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using trimap::commands::Command;
    using trimap::commands::ExitCode;

    CLI::App app{"Periodic triangular maps: orbits, cycles, stability and global convergence"};
    app.require_subcommand(1);

    struct Flags {
        std::string config;
        std::string out;
        std::string format;
        std::string grid;
        std::uint64_t seed = 0;
        std::size_t max_iters = 0;
        double tol = 0.0;
    } flags;

    std::vector<std::pair<CLI::App*, Command>> subs;
    for (auto [name, cmd, help] : {std::tuple{"simulate", Command::Simulate, "Iterate one orbit and estimate its omega-limit set"},
                                   std::tuple{"analyze", Command::Analyze, "Locate and classify fixed points and cycles"},
                                   std::tuple{"region-scan", Command::RegionScan, "Scan two model parameters over a raster"},
                                   std::tuple{"verify-global", Command::VerifyGlobal, "Period-2 test plus sampled global convergence"}}) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON config file");
        sub->add_option("--out", flags.out, "Output path (stdout when omitted)");
        sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", flags.seed, "Seed for sample jitter");
        sub->add_option("--grid", flags.grid, "Grid density N or N,N");
        sub->add_option("--max-iters", flags.max_iters, "Iteration cap");
        sub->add_option("--tol", flags.tol, "Tolerance override")->check(CLI::PositiveNumber);
        subs.emplace_back(sub, cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::ValidationError);
    }

    Command cmd = Command::Simulate;
    CLI::App* chosen = nullptr;
    for (auto& [sub, c] : subs) {
        if (sub->parsed()) {
            chosen = sub;
            cmd = c;
        }
    }

    trimap::config::RunConfig cfg;
    try {
        cfg = flags.config.empty() ? trimap::config::RunConfig{} : trimap::config::load_config(flags.config);
        trimap::commands::Overrides o;
        if (chosen->count("--out")) o.out = flags.out;
        if (chosen->count("--format")) o.format = trimap::report::parse_format(flags.format);
        if (chosen->count("--seed")) o.seed = flags.seed;
        if (chosen->count("--grid")) o.grid = parse_grid(flags.grid);
        if (chosen->count("--max-iters")) o.max_iters = flags.max_iters;
        if (chosen->count("--tol")) o.tol = flags.tol;
        trimap::commands::apply(cfg, o, cmd);
    } catch (const trimap::config::ConfigError& e) {
        trimap::commands::print_error(std::cerr, "validation", e.field(), e.what());
        return static_cast<int>(ExitCode::ValidationError);
    } catch (const std::ios_base::failure& e) {
        trimap::commands::print_error(std::cerr, "io", "--config", e.what());
        return static_cast<int>(ExitCode::IoError);
    } catch (const std::exception& e) {
        trimap::commands::print_error(std::cerr, "validation", "", e.what());
        return static_cast<int>(ExitCode::ValidationError);
    }
    return static_cast<int>(trimap::commands::run(cmd, cfg, std::cerr));
}
