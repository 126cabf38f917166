#include "mopo/core.hpp"
#include "mopo/engine.hpp"
#include "mopo/text.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommandResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

CommandResult run_cli(const std::string& args, const std::string& scratch) {
    const std::string out_path = scratch + "/cli.out";
    const std::string err_path = scratch + "/cli.err";
    const std::string command =
        std::string(MOPO_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(command.c_str());
    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

std::string write_config(const std::string& dir, const mopo::RunConfig& config) {
    const std::string path = dir + "/config-input.json";
    std::ofstream out(path, std::ios::binary);
    out << mopo::store_config(config);
    return path;
}

} // namespace

TEST_CASE("run: identical seeds produce identical final fronts") {
    const auto scratch = support::temp_dir("cli-run");
    auto config = support::base_config();
    config.generations = 2;
    const auto config_path = write_config(scratch, config);

    const auto first = run_cli("run --config " + config_path + " --mock --seed 7 --out " +
                                   scratch + "/a",
                               scratch);
    REQUIRE(first.exit_code == 0);
    CHECK(first.out.find("gen 0") != std::string::npos); // progress lines on stdout

    const auto second = run_cli("run --config " + config_path + " --mock --seed 7 --out " +
                                    scratch + "/b",
                                scratch);
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(scratch + "/a/final.json") == slurp(scratch + "/b/final.json"));
}

TEST_CASE("run: refuses to overwrite without --force") {
    const auto scratch = support::temp_dir("cli-force");
    auto config = support::base_config();
    config.generations = 1;
    const auto config_path = write_config(scratch, config);
    const std::string out_dir = scratch + "/run";

    REQUIRE(run_cli("run --config " + config_path + " --out " + out_dir, scratch).exit_code == 0);
    const auto refused = run_cli("run --config " + config_path + " --out " + out_dir, scratch);
    CHECK(refused.exit_code == 2);
    CHECK(refused.err.find("--force") != std::string::npos);
    const auto forced =
        run_cli("run --config " + config_path + " --out " + out_dir + " --force", scratch);
    CHECK(forced.exit_code == 0);
}

TEST_CASE("run: disabling both operators is a config error") {
    const auto scratch = support::temp_dir("cli-ablate");
    auto config = support::base_config();
    config.generations = 1;
    const auto config_path = write_config(scratch, config);
    const auto result = run_cli("run --config " + config_path + " --no-combine --no-paraphrase "
                                "--out " + scratch + "/x",
                                scratch);
    CHECK(result.exit_code == 2);
}

TEST_CASE("run: resume completes an interrupted run") {
    const auto scratch = support::temp_dir("cli-resume");
    auto config = support::base_config();
    config.generations = 3;
    const auto config_path = write_config(scratch, config);

    REQUIRE(run_cli("run --config " + config_path + " --out " + scratch + "/ref", scratch)
                .exit_code == 0);

    fs::create_directories(scratch + "/cut");
    fs::copy_file(scratch + "/ref/config.json", scratch + "/cut/config.json");
    fs::copy_file(mopo::generation_file(scratch + "/ref", 0),
                  mopo::generation_file(scratch + "/cut", 0));

    const auto resumed = run_cli("run --resume " + scratch + "/cut", scratch);
    REQUIRE(resumed.exit_code == 0);
    CHECK(slurp(scratch + "/cut/final.json") == slurp(scratch + "/ref/final.json"));
}

TEST_CASE("front: formats, orderings, byte stability, failure modes") {
    const auto scratch = support::temp_dir("cli-front");
    auto config = support::base_config();
    config.generations = 2;
    const auto config_path = write_config(scratch, config);
    const std::string run_dir = scratch + "/run";
    REQUIRE(run_cli("run --config " + config_path + " --out " + run_dir, scratch).exit_code == 0);

    const auto tsv = run_cli("front " + run_dir, scratch);
    REQUIRE(tsv.exit_code == 0);
    CHECK(tsv.out.rfind("id\ttext", 0) == 0);

    const auto tsv_again = run_cli("front " + run_dir, scratch);
    CHECK(tsv.out == tsv_again.out); // byte-stable export

    const auto csv = run_cli("front " + run_dir + " --format csv", scratch);
    CHECK(csv.out.rfind("id,text", 0) == 0);

    const auto as_json = run_cli("front " + run_dir + " --format json", scratch);
    REQUIRE(as_json.exit_code == 0);
    const json parsed = json::parse(as_json.out);
    const std::size_t tsv_rows = std::count(tsv.out.begin(), tsv.out.end(), '\n') - 1;
    CHECK(parsed.at("rows").size() == tsv_rows);
    // Reloading the export and re-serializing reproduces it byte-for-byte.
    CHECK(parsed.dump(1) + "\n" == as_json.out);

    // --balanced sorts by minimum objective score, descending.
    const auto balanced = run_cli("front " + run_dir + " --format json --balanced", scratch);
    const json balanced_rows = json::parse(balanced.out).at("rows");
    for (std::size_t i = 1; i < balanced_rows.size(); ++i)
        CHECK(balanced_rows[i - 1].at("min_score").get<double>() >=
              balanced_rows[i].at("min_score").get<double>());

    // --objective sorts by that objective, descending.
    const auto by_headline =
        run_cli("front " + run_dir + " --format json --objective headline", scratch);
    const json headline_rows = json::parse(by_headline.out).at("rows");
    for (std::size_t i = 1; i < headline_rows.size(); ++i)
        CHECK(headline_rows[i - 1].at("scores")[1].get<double>() >=
              headline_rows[i].at("scores")[1].get<double>());

    CHECK(run_cli("front " + scratch + "/nowhere", scratch).exit_code == 4);
    fs::create_directories(scratch + "/empty");
    CHECK(run_cli("front " + scratch + "/empty", scratch).exit_code == 4);
}

TEST_CASE("run: scorer outage exits 3, leaving a resumable directory") {
    const auto scratch = support::temp_dir("cli-abort");
    auto config = support::base_config();
    config.generations = 1;
    // Nothing listens on the discard port: every score call fails after the
    // retry budget, which aborts the run.
    config.objectives = {{"dead", "http", "http://127.0.0.1:9", "", {}}};
    const auto config_path = write_config(scratch, config);

    const auto result =
        run_cli("run --config " + config_path + " --out " + scratch + "/run", scratch);
    CHECK(result.exit_code == 3);
    CHECK(result.err.find("resumable") != std::string::npos);
    CHECK(fs::exists(scratch + "/run/config.json"));
    CHECK_FALSE(fs::exists(scratch + "/run/final.json"));
}

TEST_CASE("stats: long-format csv with partition shares") {
    const auto scratch = support::temp_dir("cli-stats");
    auto config = support::base_config();
    config.generations = 2;
    const auto config_path = write_config(scratch, config);
    const std::string run_dir = scratch + "/run";
    REQUIRE(run_cli("run --config " + config_path + " --out " + run_dir, scratch).exit_code == 0);

    const auto stats = run_cli("stats " + run_dir, scratch);
    REQUIRE(stats.exit_code == 0);
    REQUIRE(stats.out.rfind("table,generation,key,value", 0) == 0);

    // Per-generation contribution shares sum to 1 +- 1e-9.
    std::map<std::string, double> sums;
    std::istringstream lines(stats.out);
    std::string line;
    std::vector<double> hypervolume_series;
    std::getline(lines, line); // header
    while (std::getline(lines, line)) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream row(line);
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() < 4) continue;
        if (fields[0] == "contribution" && !fields[1].empty())
            sums[fields[1]] += std::stod(fields[3]);
        if (fields[0] == "hypervolume") hypervolume_series.push_back(std::stod(fields[3]));
    }
    REQUIRE(sums.size() == 2);
    for (const auto& [generation, total] : sums)
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(hypervolume_series.size() == 2);
    CHECK(hypervolume_series[1] >= hypervolume_series[0]);

    CHECK(run_cli("stats " + scratch + "/missing", scratch).exit_code == 4);
}
