#pragma once

#include "mopo/backends.hpp"
#include "mopo/core.hpp"
#include "mopo/genetic.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mopo {

struct SelectedRef {
    PromptId id;
    int pareto_rank = 0;
    double crowding = 0.0;

    bool operator==(const SelectedRef&) const = default;
};

/// Deterministic per-generation state. Everything here replays identically on
/// resume; wall_ms is telemetry and excluded from replay comparisons.
struct GenerationMeta {
    int generation = 0;
    std::string config_digest;
    int population_size = 0;
    std::vector<SelectedRef> selected; // P_opt in selection order
    std::map<std::string, std::vector<PromptId>> best_per_objective;
    std::vector<Prompt> combine_pool;    // after selection
    std::vector<Prompt> paraphrase_pool; // after selection
    Layer2Ledger ledger;                 // effective scores carried into the next generation
    std::string rng_state;               // generation stream state at the end of the pass
    double front_metric = 0.0;           // hypervolume of the accumulated candidate front
    std::vector<double> best_scores;     // per objective, max within P_opt
    std::map<std::string, long> backend_calls;
    long wall_ms = 0;
    int offspring_combine = 0;
    int offspring_sentence = 0;
    int offspring_word = 0;
    int combine_pool_used = 0;    // pool size during the operator pass (after mutation)
    int paraphrase_pool_used = 0;
    int pair_count = 0;
    bool cap_triggered = false;
};

struct GenerationRecord {
    GenerationMeta meta;
    std::vector<EvaluatedPrompt> population; // evaluation order, full snapshot
};

struct RunResult {
    RunConfig config;
    std::vector<GenerationRecord> records;
    std::vector<EvaluatedPrompt> final_front; // final selection over deduplicated P_cands
};

/// Executes the full optimization loop against the configured backends,
/// persisting every generation into `run_dir` before the next begins.
/// Progress lines (one per generation) go to `progress` when non-null.
RunResult run(const RunConfig& config, const std::string& run_dir,
              std::ostream* progress = nullptr);

/// As `run`, but with caller-supplied capabilities (tests script these).
RunResult run(const RunConfig& config, Backends backends, const std::string& run_dir,
              std::ostream* progress = nullptr);

/// Continues a persisted run from the last complete generation. The stored
/// config is authoritative; a digest mismatch against the recorded generations
/// is refused.
RunResult resume(const std::string& run_dir, std::ostream* progress = nullptr);

/// Read-only load of a completed run directory.
RunResult load_run(const std::string& run_dir);

/// Returns the config with one operator disabled. Disabling the last enabled
/// operator is rejected.
RunConfig ablate(RunConfig config, const std::string& which); // "no_combine" | "no_paraphrase"

std::string generation_file(const std::string& run_dir, int generation);

} // namespace mopo
