#pragma once

#include "mopo/backends.hpp"
#include "mopo/core.hpp"

#include <string>
#include <vector>

namespace mopo {

/// A Layer-1 prompt with its emotion slot filled in.
struct InstantiatedPrompt {
    PromptId parent_prompt_id;
    std::string emotion;
    std::string text; // no remaining <em> marker
};

/// One instantiation per emotion; every `<em>` occurrence is replaced.
std::vector<InstantiatedPrompt> instantiate(const Prompt& prompt,
                                            const std::vector<std::string>& emotions);

/// Scores each text against its own generation prompt and flags echoes:
/// filtered = sentence_bleu(text, source.text) strictly above the threshold.
/// All samples are returned; filtered ones are kept for the logs but excluded
/// from scoring.
std::vector<TextSample> echo_filter(const InstantiatedPrompt& source,
                                    const std::vector<std::string>& texts, double threshold);

/// Per-objective fitness from logged samples: mean over emotions of the mean
/// score over that emotion's surviving texts (an all-filtered emotion
/// contributes 0).
ObjectiveVector fitness_from_samples(const std::vector<TextSample>& samples,
                                     const std::vector<std::string>& emotions,
                                     const Backends& backends, const RunConfig& config);

/// Generates n texts per instantiation, applies the echo filter, and
/// aggregates classifier scores into the prompt's objective vector. Generator
/// failures leave that emotion scored over whatever texts exist; scorer
/// failures propagate.
EvaluatedPrompt evaluate(const Prompt& prompt, const Backends& backends, const RunConfig& config);

/// Seed for the generation request of one (prompt text, emotion) pair. A pure
/// function of the run seed and normalized prompt text, so identical texts get
/// identical transcripts.
std::int64_t evaluation_seed(std::uint64_t run_seed, const std::string& prompt_text,
                             const std::string& emotion);

} // namespace mopo
