// Benchmark driver for the hybrid spectral-difference / embedded
// finite-volume solver. Subcommands:
//   run    --config <file> [--override key=value ...]
//   sweep  --case <name> --meshes a,b,c [--out dir] [--override key=value ...]
//   table  --from <dir>
// Exit codes: 0 success, 1 configuration error, 2 solver abort.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "sdfv/output.hpp"

using namespace sdfv;

namespace {

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--override expects key=value, got '" + ov + "'");
        apply_key(cfg, ov.substr(0, eq), ov.substr(eq + 1), "", 0);
    }
}

std::vector<int> parse_meshes(const std::string& arg) {
    std::vector<int> meshes;
    std::stringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        int m = std::atoi(tok.c_str());
        if (m < 1) throw ConfigError("--meshes expects positive integers, got '" + tok + "'");
        meshes.push_back(m);
    }
    if (meshes.empty()) throw ConfigError("--meshes is empty");
    return meshes;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    RunConfig cfg = parse_config_file(config_path);
    apply_overrides(cfg, overrides);
    apply_env(cfg);
    RunResult r = run_case(cfg);
    if (r.exit_code != 0) {
        std::cerr << "solver aborted: " << r.status.message << "\n";
        std::cerr << "artifacts in " << r.out_dir << "\n";
        return 2;
    }
    std::cout << "completed " << r.status.steps << " steps";
    if (!r.status.message.empty()) std::cout << " (" << r.status.message << ")";
    std::cout << "; artifacts in " << r.out_dir << "\n";
    if (r.has_norms)
        std::cout << "density norms: L1=" << r.norms.l1 << " L2=" << r.norms.l2
                  << " Linf=" << r.norms.linf << "\n";
    return 0;
}

int cmd_sweep(const std::string& case_name, const std::string& meshes_arg, std::string out_dir,
              const std::vector<std::string>& overrides) {
    RunConfig cfg;
    apply_key(cfg, "case", case_name, "", 0);
    apply_overrides(cfg, overrides);
    cfg.output_dir = out_dir.empty() ? ("sweep_" + case_name) : out_dir;
    apply_env(cfg);
    auto rows = run_sweep(cfg, parse_meshes(meshes_arg));
    std::cout << convergence_table(rows);
    std::cout << "table written to " << cfg.output_dir << "/convergence_table.txt\n";
    return 0;
}

int cmd_table(const std::string& from_dir) {
    namespace fs = std::filesystem;
    std::vector<NormRow> rows;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(from_dir))
        if (entry.path().filename() == "norms.json") files.push_back(entry.path());
    if (files.empty()) throw ConfigError("no norms.json files under " + from_dir);
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        std::ifstream f(p);
        nlohmann::json j;
        f >> j;
        NormRow row;
        row.resolution = j["resolution"].get<int>();
        row.label = std::to_string(j["mesh"]["nx"].get<int>()) + "x" +
                    std::to_string(j["mesh"]["ny"].get<int>()) + "x" +
                    std::to_string(j["mesh"]["nz"].get<int>());
        row.norms.l1 = j["L1"].get<double>();
        row.norms.l2 = j["L2"].get<double>();
        row.norms.linf = j["Linf"].get<double>();
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(),
              [](const NormRow& a, const NormRow& b) { return a.resolution < b.resolution; });
    std::cout << convergence_table(rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid spectral-difference / embedded finite-volume Euler benchmark driver"};
    app.require_subcommand(1);

    std::string config_path, case_name, meshes_arg, out_dir, from_dir;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "execute one configured case");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--override", overrides, "key=value configuration overrides");

    auto* sweep = app.add_subcommand("sweep", "run a mesh-refinement sweep");
    sweep->add_option("--case", case_name, "case name")->required();
    sweep->add_option("--meshes", meshes_arg, "comma-separated element counts")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--override", overrides, "key=value configuration overrides");

    auto* table = app.add_subcommand("table", "assemble a convergence table from run artifacts");
    table->add_option("--from", from_dir, "directory containing norms.json files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, overrides);
        if (sweep->parsed()) return cmd_sweep(case_name, meshes_arg, out_dir, overrides);
        if (table->parsed()) return cmd_table(from_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const SolverAbort& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
