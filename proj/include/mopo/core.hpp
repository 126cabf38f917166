#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mopo {

enum class PromptLayer { Layer1, Layer2Combine, Layer2Paraphrase, Layer3Fixed };

enum class OperatorKind { Seed, SentenceParaphrase, WordAdd, WordRemove, WordReplace, Combine };

const char* to_string(PromptLayer layer);
const char* to_string(OperatorKind kind);
PromptLayer layer_from_string(const std::string& s);
OperatorKind kind_from_string(const std::string& s);

/// 16 hex characters; lexicographic order equals numeric order.
using PromptId = std::string;

/// A text genome. Immutable once constructed; Layer3Fixed prompts are never
/// rewritten after load.
struct Prompt {
    PromptId id;
    PromptLayer layer = PromptLayer::Layer1;
    std::string text;
    int generation_born = 0;
    std::vector<PromptId> lineage;          // 0 parents for seeds, 1 paraphrase, 2 combine
    std::optional<PromptId> operator_id;    // Layer-2/3 prompt that produced this one
    OperatorKind operator_kind = OperatorKind::Seed;

    bool operator==(const Prompt&) const = default;
};

/// Expected lineage arity for an operator kind.
std::size_t lineage_arity(OperatorKind kind);

/// One fitness score per configured objective, each in [0,1].
struct ObjectiveVector {
    std::vector<double> scores;
    std::vector<std::string> objective_ids;

    bool operator==(const ObjectiveVector&) const = default;

    double mean() const;
    double min_score() const;
};

struct TextSample {
    PromptId prompt_id;
    std::string emotion;
    int index = 0;
    std::string text;
    double echo_bleu = 0.0;
    bool filtered = false;

    bool operator==(const TextSample&) const = default;
};

struct EvaluatedPrompt {
    Prompt prompt;
    ObjectiveVector fitness;
    std::vector<TextSample> samples;
    std::optional<int> pareto_rank;   // set by selection; 0 = non-dominated
    std::optional<double> crowding;   // may be the infinity sentinel

    bool operator==(const EvaluatedPrompt&) const = default;
};

/// Objective scorer spec: a live HTTP classifier endpoint or a deterministic
/// lexicon mock.
struct ObjectiveSpec {
    std::string name;
    std::string kind = "lexicon";   // "lexicon" | "http"
    std::string endpoint;           // http only
    std::string style = "neutral";  // lexicon only: neutral|diary|headline|social
    std::map<std::string, std::vector<std::string>> lexicon; // optional per-label override

    bool operator==(const ObjectiveSpec&) const = default;
};

struct BackendSpec {
    std::string kind = "mock"; // "mock" | "http"
    std::string endpoint;

    bool operator==(const BackendSpec&) const = default;
};

struct AblationFlags {
    bool enable_combine = true;
    bool enable_paraphrase = true;

    bool operator==(const AblationFlags&) const = default;
};

struct RunConfig {
    std::vector<std::string> seed_prompts;
    std::vector<std::string> combine_prompts;
    std::vector<std::string> paraphrase_prompts;
    std::vector<std::string> fixed_prompts;
    int generations = 10;           // I
    int generation_size = 10;       // G
    int offspring_per_operator = 3; // C
    int texts_per_prompt = 5;       // n
    std::vector<std::string> emotions = {"anger", "disgust", "fear", "joy", "sadness"};
    std::vector<ObjectiveSpec> objectives;
    double bleu_threshold = 0.2;
    int top_n_per_objective = 1;
    std::uint64_t rng_seed = 1;
    AblationFlags ablation;
    int best_per_objective_k = 1;
    int population_cap = 512;
    int parallelism = 1;
    int combine_pool_cap = 0;    // 0 → initial pool size
    int paraphrase_pool_cap = 0; // 0 → initial pool size
    BackendSpec generator;
    BackendSpec suggester;

    bool operator==(const RunConfig&) const = default;
};

/// Returns every violated invariant; empty means the config is runnable.
std::vector<std::string> validate_config(const RunConfig& config);

std::string store_config(const RunConfig& config);
RunConfig load_config(const std::string& json_text);

/// Stable digest of the canonical serialized form.
std::string config_digest(const RunConfig& config);

/// Deterministic prompt id from the creation context.
PromptId derive_prompt_id(std::uint64_t run_seed, int generation, const std::string& operator_id,
                          const std::vector<PromptId>& parents, int offspring_index);

std::string store_evaluated(const EvaluatedPrompt& ep);
EvaluatedPrompt load_evaluated(const std::string& json_line);

} // namespace mopo
