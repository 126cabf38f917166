#pragma once

#include "mopo/backends.hpp"
#include "mopo/core.hpp"
#include "mopo/rng.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mopo {

/// Per Layer-2 prompt bookkeeping for one generation. offspring_selected never
/// exceeds offspring_produced; a prompt with no production this generation
/// keeps its previous stats for ranking.
struct Layer2Stats {
    int offspring_produced = 0;
    int offspring_selected = 0;
    double mean_offspring_fitness = 0.0;

    bool operator==(const Layer2Stats&) const = default;
};

using Layer2Ledger = std::map<PromptId, Layer2Stats>;

/// Layer-3-driven mutation: for each pool member one fixed prompt is sampled,
/// its SENTENCE_1 slot filled with the member's text, and the generator's
/// single response appended as a new Layer-2 prompt (originals retained).
/// Responses lacking the member's slot markers or duplicating a pool text are
/// discarded. Returns the number of appended mutants.
int mutate_layer2(std::vector<Prompt>& pool, const std::vector<Prompt>& fixed,
                  TextGenerator& generator, SplitMix64& rng, std::uint64_t run_seed,
                  int generation);

/// All unordered cross-objective pairs of best prompts with distinct ids, in
/// deterministic order (objective pair order, then member order). Fewer than
/// two distinct prompts yields an empty list.
std::vector<std::pair<Prompt, Prompt>> pair_sample(
    const std::map<std::string, std::vector<Prompt>>& best_per_objective,
    const std::vector<std::string>& objective_order);

/// Crossover: for each pair and combine prompt, fills SENTENCE_1/SENTENCE_2
/// and requests C completions. Valid completions (non-empty, contain <em>, not
/// a known Layer-1 text) become new Layer-1 prompts with both parents as
/// lineage. `known_texts` holds normalized texts and is extended as offspring
/// are accepted.
std::vector<Prompt> combine(const std::vector<std::pair<Prompt, Prompt>>& pairs,
                            const std::vector<Prompt>& combine_prompts, int offspring_count,
                            TextGenerator& generator, std::uint64_t run_seed, int generation,
                            std::set<std::string>& known_texts, Layer2Ledger& ledger);

/// Sentence-level paraphrase of one parent under every paraphrase prompt.
std::vector<Prompt> sentence_paraphrase(const Prompt& parent,
                                        const std::vector<Prompt>& paraphrase_prompts,
                                        int offspring_count, TextGenerator& generator,
                                        std::uint64_t run_seed, int generation,
                                        std::set<std::string>& known_texts,
                                        Layer2Ledger& ledger);

/// Word-level paraphrase: C variants, each one Add/Remove/Replace operation
/// drawn uniformly. Add and Replace mask a position and take the suggester's
/// top token; the <em> placeholder is never removed or replaced; a suggester
/// failure falls back to Remove; variants that would drop below two tokens are
/// rejected.
std::vector<Prompt> word_paraphrase(const Prompt& parent, int offspring_count,
                                    TokenSuggester& suggester, SplitMix64& rng,
                                    std::uint64_t run_seed, int generation,
                                    std::set<std::string>& known_texts);

/// End-of-generation Layer-2 selection: rank by (offspring_selected desc,
/// mean_offspring_fitness desc, id asc) using the effective ledger and keep
/// the top m.
std::vector<Prompt> select_layer2(const std::vector<Prompt>& pool, const Layer2Ledger& ledger,
                                  int keep);

} // namespace mopo
