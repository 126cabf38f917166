#pragma once

#include "mopo/core.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mopo {

struct GenerateRequest {
    std::string prompt;
    int n = 1;
    std::int64_t seed = 0;
};

struct GenerateResponse {
    std::vector<std::string> texts; // length == request n
};

struct ScoreRequest {
    std::vector<std::string> texts;
    std::string label;
};

struct ScoreResponse {
    std::vector<double> scores; // parallel to texts, each in [0,1]
};

struct SuggestRequest {
    std::string text; // exactly one <mask> marker
};

struct SuggestResponse {
    std::string token; // non-empty, no whitespace
};

struct TextGenerator {
    virtual ~TextGenerator() = default;
    virtual GenerateResponse generate(const GenerateRequest& request) = 0;
};

struct ObjectiveScorer {
    virtual ~ObjectiveScorer() = default;
    virtual ScoreResponse score(const ScoreRequest& request) = 0;
};

struct TokenSuggester {
    virtual ~TokenSuggester() = default;
    virtual SuggestResponse suggest(const SuggestRequest& request) = 0;
};

/// Built-in per-label keyword sets for the five default emotion labels; the
/// default vocabulary for both the mock generator and the lexicon scorers.
const std::map<std::string, std::vector<std::string>>& default_emotion_lexicon();

/// Deterministic generator stand-in. Pure function of (prompt, n, seed):
/// recognizes paraphrase-style requests (fixed synonym table, token rotation,
/// one injected variation word), combine-style requests (first quoted sentence
/// woven with the second one's distinctive tokens), and task-style requests
/// (keyword-pool sentences styled by cue words found in the prompt).
class MockGenerator : public TextGenerator {
  public:
    explicit MockGenerator(std::vector<std::string> emotion_labels);
    GenerateResponse generate(const GenerateRequest& request) override;

  private:
    std::vector<std::string> labels_;
};

/// Deterministic classifier stand-in. score = sigmoid(own-label keyword count
/// minus the best other-label count), modulated by a style factor so distinct
/// styles genuinely conflict. Styles: neutral, diary, headline, social.
class LexiconScorer : public ObjectiveScorer {
  public:
    LexiconScorer(std::string style, std::map<std::string, std::vector<std::string>> lexicon);
    ScoreResponse score(const ScoreRequest& request) override;

    double score_text(const std::string& text, const std::string& label) const;
    double style_factor(const std::string& text) const;

  private:
    std::string style_;
    std::map<std::string, std::vector<std::string>> lexicon_;
};

/// Deterministic masked-token stand-in: hashes the mask's left/right context
/// into a fixed vocabulary; sentence-initial masks draw from a starter
/// subvocabulary.
class MockSuggester : public TokenSuggester {
  public:
    SuggestResponse suggest(const SuggestRequest& request) override;
};

struct RetryPolicy {
    int max_attempts = 4;
    int base_delay_ms = 100;
    double backoff_factor = 2.0;
    int timeout_ms = 10000;
    int inflight_cap = 4;
};

class HttpGenerator : public TextGenerator {
  public:
    HttpGenerator(std::string endpoint, RetryPolicy policy = {});
    GenerateResponse generate(const GenerateRequest& request) override;

  private:
    std::string endpoint_;
    RetryPolicy policy_;
};

class HttpScorer : public ObjectiveScorer {
  public:
    HttpScorer(std::string endpoint, RetryPolicy policy = {});
    ScoreResponse score(const ScoreRequest& request) override;

  private:
    std::string endpoint_;
    RetryPolicy policy_;
};

class HttpSuggester : public TokenSuggester {
  public:
    HttpSuggester(std::string endpoint, RetryPolicy policy = {});
    SuggestResponse suggest(const SuggestRequest& request) override;

  private:
    std::string endpoint_;
    RetryPolicy policy_;
};

/// The capability set one run works against; scorers parallel the configured
/// objectives.
struct Backends {
    std::shared_ptr<TextGenerator> generator;
    std::vector<std::shared_ptr<ObjectiveScorer>> scorers;
    std::shared_ptr<TokenSuggester> suggester;
};

/// Instantiates capabilities from the config. `force_mock` swaps every http
/// spec for its deterministic mock (the CLI --mock switch).
Backends make_backends(const RunConfig& config, bool force_mock = false,
                       RetryPolicy policy = {});

} // namespace mopo
