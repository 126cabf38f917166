#include "mopo/engine.hpp"
#include "mopo/errors.hpp"
#include "mopo/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const mopo::ConfigError& e) {
        std::cerr << "mopo: " << e.what() << "\n";
        return 2;
    } catch (const mopo::BackendError& e) {
        std::cerr << "mopo: backend failure (run directory is resumable): " << e.what() << "\n";
        return 3;
    } catch (const mopo::CorruptState& e) {
        std::cerr << "mopo: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "mopo: " << e.what() << "\n";
        return 1;
    }
}

mopo::RunConfig read_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mopo::ConfigError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return mopo::load_config(buffer.str());
}

bool run_dir_populated(const std::string& dir) {
    return fs::exists(dir + "/config.json") || fs::exists(mopo::generation_file(dir, 0)) ||
           fs::exists(dir + "/final.json");
}

void clear_run_dir(const std::string& dir) {
    if (!fs::exists(dir)) return;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name == "config.json" || name == "final.json" ||
            (name.rfind("gen-", 0) == 0 && name.size() > 6 &&
             name.substr(name.size() - 6) == ".jsonl"))
            fs::remove(entry.path());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective genetic prompt optimizer"};
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    auto* cmd_run = app.add_subcommand("run", "Run an optimization (or resume one)");
    std::string config_path, out_dir, resume_dir;
    std::uint64_t seed_override = 0;
    bool has_seed = false, mock = false, no_combine = false, no_paraphrase = false, force = false;
    auto* config_opt = cmd_run->add_option("--config", config_path, "Run configuration JSON");
    auto* resume_opt =
        cmd_run->add_option("--resume", resume_dir, "Resume a persisted run directory");
    cmd_run->add_option("--out", out_dir, "Run directory to create");
    cmd_run->add_option("--seed", seed_override, "Override the configured rng seed")
        ->each([&](const std::string&) { has_seed = true; });
    cmd_run->add_flag("--mock", mock, "Replace every backend with its deterministic mock");
    cmd_run->add_flag("--no-combine", no_combine, "Disable the combine operator");
    cmd_run->add_flag("--no-paraphrase", no_paraphrase, "Disable the paraphrase operator");
    cmd_run->add_flag("--force", force, "Overwrite an existing run directory");
    config_opt->excludes(resume_opt);

    cmd_run->callback([&]() {
        std::exit(guarded([&]() -> int {
            if (!resume_dir.empty()) {
                if (has_seed || mock || no_combine || no_paraphrase || !out_dir.empty())
                    throw mopo::ConfigError(
                        "--resume continues with the stored config; it cannot be combined "
                        "with --seed/--mock/--no-combine/--no-paraphrase/--out");
                mopo::resume(resume_dir, &std::cout);
                return 0;
            }
            if (config_path.empty())
                throw mopo::ConfigError("either --config or --resume is required");
            if (out_dir.empty()) throw mopo::ConfigError("--out is required for a new run");

            mopo::RunConfig config = read_config(config_path);
            if (has_seed) config.rng_seed = seed_override;
            if (mock) {
                config.generator = {"mock", ""};
                config.suggester = {"mock", ""};
                // Mocked objectives get distinct styles so they still conflict.
                const char* styles[] = {"diary", "headline", "social"};
                std::size_t next_style = 0;
                for (auto& o : config.objectives) {
                    if (o.kind == "http" || o.style.empty())
                        o.style = styles[next_style++ % 3];
                    o.kind = "lexicon";
                    o.endpoint.clear();
                }
            }
            if (no_combine) config = mopo::ablate(config, "no_combine");
            if (no_paraphrase) config = mopo::ablate(config, "no_paraphrase");

            const auto violations = mopo::validate_config(config);
            if (!violations.empty()) {
                for (const auto& v : violations) std::cerr << "mopo: config: " << v << "\n";
                return 2;
            }

            if (run_dir_populated(out_dir)) {
                if (!force)
                    throw mopo::ConfigError("run directory " + out_dir +
                                            " already holds a run; pass --force to overwrite");
                clear_run_dir(out_dir);
            }
            mopo::run(config, out_dir, &std::cout);
            return 0;
        }));
    });

    // front ----------------------------------------------------------------
    auto* cmd_front = app.add_subcommand("front", "Print the final Pareto front");
    std::string front_dir, format = "tsv", objective;
    bool balanced = false;
    cmd_front->add_option("dir", front_dir, "Run directory")->required();
    cmd_front->add_option("--format", format, "Output format: tsv, csv, json")
        ->check(CLI::IsMember({"tsv", "csv", "json"}));
    auto* objective_opt =
        cmd_front->add_option("--objective", objective, "Sort by one objective, descending");
    auto* balanced_opt = cmd_front->add_flag(
        "--balanced", balanced, "Sort by minimum objective score, descending");
    objective_opt->excludes(balanced_opt);

    cmd_front->callback([&]() {
        std::exit(guarded([&]() -> int {
            const auto result = mopo::load_run(front_dir);
            const auto table = mopo::front_table(result, objective, balanced);
            if (format == "json")
                std::cout << mopo::table_to_json(table);
            else
                std::cout << mopo::table_to_csv(table, format == "csv" ? ',' : '\t');
            return 0;
        }));
    });

    // stats ------------------------------------------------------------------
    auto* cmd_stats = app.add_subcommand("stats", "Export run statistics as CSV");
    std::string stats_dir;
    cmd_stats->add_option("dir", stats_dir, "Run directory")->required();
    cmd_stats->callback([&]() {
        std::exit(guarded([&]() -> int {
            const auto result = mopo::load_run(stats_dir);
            std::cout << mopo::stats_csv(result);
            return 0;
        }));
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
