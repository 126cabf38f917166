#pragma once

#include "mopo/backends.hpp"
#include "mopo/core.hpp"
#include "mopo/errors.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace support {

/// Small desk-scale config over the default seed catalog; mock backends,
/// three conflicting lexicon objectives.
inline mopo::RunConfig base_config() {
    mopo::RunConfig c;
    c.seed_prompts = {
        "Describe a situation where a person felt <em>",
        "Write a text that expresses <em>",
        "Phrases that express <em>",
        "What is a sentence example for <em> ?",
        "Can you provide an example of a situation where someone experienced <em>?",
        "What is an example of a <em> sentence?",
        "<em> sentence",
        "Experience for <em>?",
        "Please describe a situation or event — in as much detail as possible — in which a "
        "reader felt <em>",
        "Please complete the sentence: I felt <em> when/because",
    };
    c.combine_prompts = {
        "Mix the two prompts: \"SENTENCE_1\" \"SENTENCE_2\" Into a new single sentence.",
        "Combine \"SENTENCE_1\" and \"SENTENCE_2\" to create a new, cohesive sentence that "
        "retains elements from both.",
        "Merge the themes of \"SENTENCE_1\" and \"SENTENCE_2\" into a single sentence that "
        "seamlessly integrates their ideas.",
        "Read \"SENTENCE_1\" and \"SENTENCE_2\". Then, synthesize their main ideas or themes "
        "into a new, single sentence.",
    };
    c.paraphrase_prompts = {
        "Paraphrase the following sentence into a new sentence: \"SENTENCE_1\"",
        "Please paraphrase the following sentence in a clear and concise manner: \"SENTENCE_1\"",
        "Rewrite \"SENTENCE_1\" in a more formal (or informal) tone while retaining the "
        "original meaning.",
        "Creatively rewrite \"SENTENCE_1\", ensuring the new version is engaging yet maintains "
        "the same message.",
    };
    c.fixed_prompts = {
        "Reorganize the sentence to convey the same meaning: \"SENTENCE_1\"",
        "Transform the sentence to a different voice or perspective: \"SENTENCE_1\"",
        "Rewrite the sentence using different words: \"SENTENCE_1\"",
    };
    c.objectives = {
        {"diary", "lexicon", "", "diary", {}},
        {"headline", "lexicon", "", "headline", {}},
        {"social", "lexicon", "", "social", {}},
    };
    c.generations = 3;
    c.generation_size = 6;
    c.offspring_per_operator = 2;
    c.texts_per_prompt = 3;
    c.rng_seed = 20240811;
    c.population_cap = 512;
    return c;
}

/// Unique scratch directory under the build tree.
inline std::string temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const auto base = std::filesystem::temp_directory_path() / "mopo-tests";
    std::filesystem::create_directories(base);
    const auto dir = base / (tag + "-" + std::to_string(rng()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

/// Generator that replays a fixed script; one entry per call.
struct ScriptedGenerator : mopo::TextGenerator {
    std::vector<std::vector<std::string>> script;
    std::size_t calls = 0;
    std::vector<mopo::GenerateRequest> seen;

    mopo::GenerateResponse generate(const mopo::GenerateRequest& request) override {
        seen.push_back(request);
        mopo::GenerateResponse response;
        if (calls < script.size())
            response.texts = script[calls++];
        else
            response.texts.assign(static_cast<std::size_t>(request.n), "filler text");
        while (response.texts.size() < static_cast<std::size_t>(request.n))
            response.texts.push_back("filler text " + std::to_string(response.texts.size()));
        response.texts.resize(static_cast<std::size_t>(request.n));
        return response;
    }
};

/// Generator that echoes the request prompt n times.
struct EchoGenerator : mopo::TextGenerator {
    mopo::GenerateResponse generate(const mopo::GenerateRequest& request) override {
        mopo::GenerateResponse response;
        response.texts.assign(static_cast<std::size_t>(request.n), request.prompt);
        return response;
    }
};

/// Scorer returning a constant.
struct ConstantScorer : mopo::ObjectiveScorer {
    double value;
    explicit ConstantScorer(double value) : value(value) {}
    mopo::ScoreResponse score(const mopo::ScoreRequest& request) override {
        mopo::ScoreResponse response;
        response.scores.assign(request.texts.size(), value);
        return response;
    }
};

/// Scorer that replays scripted scores per call.
struct ScriptedScorer : mopo::ObjectiveScorer {
    std::vector<std::vector<double>> script;
    std::size_t calls = 0;
    mopo::ScoreResponse score(const mopo::ScoreRequest& request) override {
        mopo::ScoreResponse response;
        if (calls < script.size()) {
            response.scores = script[calls++];
            response.scores.resize(request.texts.size(), 0.5);
        } else {
            response.scores.assign(request.texts.size(), 0.5);
        }
        return response;
    }
};

struct FixedSuggester : mopo::TokenSuggester {
    std::string token = "today";
    mopo::SuggestResponse suggest(const mopo::SuggestRequest&) override { return {token}; }
};

struct FailingSuggester : mopo::TokenSuggester {
    mopo::SuggestResponse suggest(const mopo::SuggestRequest&) override {
        throw mopo::BackendError("x", false, "scripted suggester outage");
    }
};

} // namespace support
