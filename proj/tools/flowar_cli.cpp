// Command-line harness for the scale-wise flow-matching pipeline: runtime
// scaling benchmarks, exact-vs-approximate error measurements, perturbation
// amplification checks, and single generation runs, all emitting one CSV
// schema. Exit codes: 0 success, 1 assertion failure, 2 usage error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowar/errors.hpp"
#include "flowar/harness.hpp"

namespace {

using flowar::HarnessConfig;
using flowar::HarnessResult;

constexpr int kExitOk = 0;
constexpr int kExitAssertionFailure = 1;
constexpr int kExitUsage = 2;

// JSON config values become defaults; explicitly passed flags override them.
void apply_config_file(const std::string& path, HarnessConfig& hc, std::string& mode,
                       std::string& interpolant) {
    std::ifstream in(path);
    if (!in) throw flowar::IoError(path, "cannot open config file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw flowar::ParameterError("config file '" + path + "': " + e.what());
    }

    if (j.contains("sizes")) hc.sizes = j["sizes"].get<std::vector<int>>();
    if (j.contains("scales")) hc.scales = j["scales"].get<int>();
    if (j.contains("base")) hc.base = j["base"].get<int>();
    if (j.contains("trials")) hc.trials = j["trials"].get<int>();
    if (j.contains("seed")) hc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("delta")) hc.delta = j["delta"].get<double>();
    if (j.contains("degree_cap")) hc.degree_cap = j["degree_cap"].get<int>();
    if (j.contains("channels")) hc.channels = j["channels"].get<int>();
    if (j.contains("weight_bound")) hc.weight_bound = j["weight_bound"].get<double>();
    if (j.contains("epsilon")) hc.epsilon = j["epsilon"].get<double>();
    if (j.contains("entry_bound")) hc.perturb_entry_bound = j["entry_bound"].get<double>();
    if (j.contains("budget")) hc.error_budget = j["budget"].get<double>();
    if (j.contains("class_id")) hc.class_id = j["class_id"].get<int>();
    if (j.contains("euler_update")) hc.euler_update = j["euler_update"].get<bool>();
    if (j.contains("out")) hc.out = j["out"].get<std::string>();
    if (j.contains("mode")) mode = j["mode"].get<std::string>();
    if (j.contains("interpolant")) interpolant = j["interpolant"].get<std::string>();
}

std::vector<int> parse_sizes(const std::string& csv) {
    std::vector<int> sizes;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string tok =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (tok.empty()) throw flowar::ParameterError("--sizes: empty entry in '" + csv + "'");
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw flowar::ParameterError("--sizes: bad entry '" + tok + "'");
        sizes.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return sizes;
}

int report_outcome(const HarnessResult& res) {
    for (const auto& check : res.checks) {
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name;
        if (!check.detail.empty()) std::cout << " -- " << check.detail;
        std::cout << '\n';
    }
    for (const auto& note : res.notes) {
        std::cout << "[info] " << note << '\n';
    }
    return res.ok() ? kExitOk : kExitAssertionFailure;
}

}  // namespace

int main(int argc, char** argv) {
    HarnessConfig hc;
    std::string mode = "both";
    std::string interpolant = "linear";
    std::string config_path;
    std::string sizes_csv;

    // First pass: load --config so its values act as defaults under the
    // flags parsed below.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        try {
            if (arg == "--config" && i + 1 < argc) {
                apply_config_file(argv[i + 1], hc, mode, interpolant);
            } else if (arg.rfind("--config=", 0) == 0) {
                apply_config_file(arg.substr(9), hc, mode, interpolant);
            }
        } catch (const std::exception& e) {
            std::cerr << "usage error: " << e.what() << '\n';
            return kExitUsage;
        }
    }

    CLI::App app{"scale-wise flow-matching inference harness"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its values");
        cmd->add_option("--sizes", sizes_csv, "comma-separated image sides, e.g. 16,32,64");
        cmd->add_option("--scales", hc.scales, "number of scales K");
        cmd->add_option("--base", hc.base, "base scale factor a");
        cmd->add_option("--delta", hc.delta, "approximation tolerance");
        cmd->add_option("--degree-cap", hc.degree_cap, "largest admissible polynomial degree");
        cmd->add_option("--seed", hc.seed, "RNG seed");
        cmd->add_option("--trials", hc.trials, "trials per measurement");
        cmd->add_option("--mode", mode, "exact | fast | both")
            ->check(CLI::IsMember({"exact", "fast", "both"}));
        cmd->add_option("--interpolant", interpolant, "linear | bezier")
            ->check(CLI::IsMember({"linear", "bezier"}));
        cmd->add_flag("--euler-update", hc.euler_update,
                      "emit f^t + (1-t)*velocity instead of the raw block output");
        cmd->add_option("--channels", hc.channels, "channel width (0 = per-experiment default)");
        cmd->add_option("--weight-bound", hc.weight_bound, "weight entry bound R");
        cmd->add_option("--class-id", hc.class_id, "class id for the initial token map");
        cmd->add_option("--out", hc.out, "CSV report path");
    };

    CLI::App* bench = app.add_subcommand("bench", "runtime scaling across sizes");
    add_common(bench);

    CLI::App* mode_error = app.add_subcommand("mode-error", "exact vs fast output gap");
    add_common(mode_error);
    mode_error->add_option("--budget", hc.error_budget, "admissible final-output gap");

    CLI::App* perturb = app.add_subcommand("perturb", "per-layer perturbation amplification");
    add_common(perturb);
    perturb->add_option("--epsilon", hc.epsilon, "perturbation magnitude in [0, 0.1)");
    perturb->add_option("--entry-bound", hc.perturb_entry_bound,
                        "entry bound R for the exact-constant checks");

    CLI::App* infer = app.add_subcommand("infer", "single generation run; prints output stats");
    add_common(infer);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints message or help text
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        hc.run_exact = mode == "exact" || mode == "both";
        hc.run_fast = mode == "fast" || mode == "both";
        hc.interpolant = interpolant == "bezier" ? flowar::Interpolant::bezier
                                                 : flowar::Interpolant::linear;
        if (!sizes_csv.empty()) hc.sizes = parse_sizes(sizes_csv);

        if (bench->parsed()) return report_outcome(flowar::bench_runtime(hc));
        if (mode_error->parsed()) return report_outcome(flowar::measure_mode_error(hc));
        if (perturb->parsed()) {
            if (perturb->count("--trials") == 0) hc.trials = 100;
            return report_outcome(flowar::measure_perturbation_bounds(hc));
        }
        if (infer->parsed()) {
            if (infer->count("--mode") == 0) {
                hc.run_exact = true;
                hc.run_fast = false;
            }
            return report_outcome(flowar::run_single_infer(hc));
        }
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAssertionFailure;
    }
}
