// pucci thresholds|solve|multiplicity|sweep --config FILE [--mu X] [--a A --b B] [--out PATH] [--no-meta]

#include "pucci/commands.hpp"
#include "pucci/config.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Args {
    std::string config;
    std::optional<double> mu, a, b;
    std::optional<double> mu_min, mu_max;
    std::optional<int> steps;
    std::string out;
    std::string profiles;
    bool no_meta = false;
};

void common(CLI::App* cmd, Args& args) {
    cmd->add_option("--config", args.config, "JSON configuration file")->required();
    cmd->add_option("--out", args.out, "write the report here instead of stdout");
    cmd->add_flag("--no-meta", args.no_meta, "omit the meta block (version, timestamp)");
}

int missing(const char* what) {
    std::cerr << "pucci: " << what << " is required\n";
    return pucci::exit_code::usage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Barrier construction and monotone solves for weakly coupled Pucci systems"};
    app.require_subcommand(1);
    Args args;

    auto* thr = app.add_subcommand("thresholds", "mu0, mu_star, mu_lower and the C4 check");
    common(thr, args);
    thr->add_option("--a", args.a, "lower level a");
    thr->add_option("--b", args.b, "upper level b");

    auto* solve = app.add_subcommand("solve", "minimal and maximal solutions between psi and m~ e");
    common(solve, args);
    solve->add_option("--mu", args.mu, "parameter mu > 0");
    solve->add_option("--profiles", args.profiles, "profile CSV (default: --out with extension .csv)");

    auto* mult = app.add_subcommand("multiplicity", "certify two ordered barrier pairs and solve in both");
    common(mult, args);
    mult->add_option("--mu", args.mu, "parameter mu");
    mult->add_option("--a", args.a, "lower level a");
    mult->add_option("--b", args.b, "upper level b");

    auto* sweep = app.add_subcommand("sweep", "minimal solution norms on a geometric mu grid");
    common(sweep, args);
    sweep->add_option("--mu-min", args.mu_min, "smallest mu");
    sweep->add_option("--mu-max", args.mu_max, "largest mu");
    sweep->add_option("--steps", args.steps, "number of mu values (>= 2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pucci::exit_code::usage;
    }

    pucci::Config cfg;
    try {
        cfg = pucci::load_config(args.config);
    } catch (const pucci::Error& e) {
        std::cerr << "pucci: " << e.what() << '\n';
        return pucci::exit_code::usage;
    }

    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out, std::ios::binary);
        if (!file) {
            std::cerr << "pucci: cannot write " << args.out << '\n';
            return pucci::exit_code::usage;
        }
    }
    std::ostream& out = args.out.empty() ? std::cout : file;
    pucci::RunOptions options;
    options.meta = !args.no_meta;

    if (thr->parsed()) {
        if (!args.a || !args.b) return missing("--a and --b");
        return pucci::cmd_thresholds(cfg, *args.a, *args.b, out, std::cerr, options);
    }
    if (solve->parsed()) {
        if (!args.mu) return missing("--mu");
        std::string path = args.profiles;
        if (path.empty() && !args.out.empty()) path = std::filesystem::path(args.out).replace_extension(".csv").string();
        std::ofstream prof;
        if (!path.empty()) {
            prof.open(path, std::ios::binary);
            if (!prof) {
                std::cerr << "pucci: cannot write " << path << '\n';
                return pucci::exit_code::usage;
            }
        }
        return pucci::cmd_solve(cfg, *args.mu, out, path.empty() ? nullptr : &prof, std::cerr, options);
    }
    if (mult->parsed()) {
        if (!args.mu) return missing("--mu");
        if (!args.a || !args.b) return missing("--a and --b");
        return pucci::cmd_multiplicity(cfg, *args.mu, *args.a, *args.b, out, std::cerr, options);
    }
    if (!args.mu_min || !args.mu_max || !args.steps) return missing("--mu-min, --mu-max and --steps");
    return pucci::cmd_sweep(cfg, *args.mu_min, *args.mu_max, *args.steps, out, std::cerr, options);
}
