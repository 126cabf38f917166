#include "mopo/backends.hpp"

#include "mopo/errors.hpp"
#include "mopo/text.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace mopo;

namespace {

const std::vector<std::string> kLabels = {"anger", "disgust", "fear", "joy", "sadness"};

bool has_pool_token(const std::string& text, const std::vector<std::string>& pool) {
    for (const auto& raw : fold_tokens(text)) {
        std::string tok = raw;
        while (!tok.empty() && !std::isalnum(static_cast<unsigned char>(tok.front())))
            tok.erase(tok.begin());
        while (!tok.empty() && !std::isalnum(static_cast<unsigned char>(tok.back())))
            tok.pop_back();
        if (std::find(pool.begin(), pool.end(), tok) != pool.end()) return true;
    }
    return false;
}

} // namespace

TEST_CASE("mock generator is a pure function of its request") {
    MockGenerator generator(kLabels);
    const GenerateRequest request{"Write a text that expresses joy", 5, 42};
    const auto first = generator.generate(request);
    generator.generate({"something else entirely", 2, 7});
    const auto second = generator.generate(request);
    CHECK(first.texts == second.texts);
    CHECK(first.texts.size() == 5);

    const auto reseeded = generator.generate({"Write a text that expresses joy", 5, 43});
    CHECK(first.texts != reseeded.texts);
}

TEST_CASE("task-style requests embed keywords of the detected emotion") {
    MockGenerator generator(kLabels);
    const auto& joy_pool = default_emotion_lexicon().at("joy");
    const auto response = generator.generate({"Write a text that expresses joy", 6, 1});
    for (const auto& text : response.texts) CHECK(has_pool_token(text, joy_pool));

    const auto& fear_pool = default_emotion_lexicon().at("fear");
    const auto fear = generator.generate({"Phrases that express fear", 4, 1});
    for (const auto& text : fear.texts) CHECK(has_pool_token(text, fear_pool));
}

TEST_CASE("combine-style requests weave content from both quoted sentences") {
    MockGenerator generator(kLabels);
    const std::string request =
        "Mix the two prompts: \"alpha breeze lantern expressing <em>\" "
        "\"velvet thunder marble describing <em>\" Into a new single sentence.";
    const auto response = generator.generate({request, 4, 9});
    const std::vector<std::string> first_pool = {"alpha", "breeze", "lantern", "expressing"};
    const std::vector<std::string> second_pool = {"velvet", "thunder", "marble", "describing"};
    std::set<std::string> distinct;
    for (const auto& text : response.texts) {
        CHECK(has_pool_token(text, first_pool));
        CHECK(has_pool_token(text, second_pool));
        CHECK(contains(text, kEmotionSlot));
        distinct.insert(normalize_ws(text));
    }
    CHECK(distinct.size() == response.texts.size());
}

TEST_CASE("paraphrase-style requests rewrite the quoted payload, keeping the slot") {
    MockGenerator generator(kLabels);
    const std::string payload = "Write a text that expresses <em>";
    const auto response = generator.generate(
        {"Paraphrase the following sentence into a new sentence: \"" + payload + "\"", 3, 5});
    std::set<std::string> distinct;
    for (const auto& text : response.texts) {
        CHECK(contains(text, kEmotionSlot));
        CHECK(normalize_ws(text) != normalize_ws(payload));
        CHECK_FALSE(contains(text, "\""));
        distinct.insert(normalize_ws(text));
    }
    CHECK(distinct.size() == response.texts.size());
}

TEST_CASE("layer-3 wrapped operation prompts keep their slot markers") {
    MockGenerator generator(kLabels);
    SUBCASE("paraphrase prompt mutation") {
        const auto response = generator.generate(
            {"Reorganize the sentence to convey the same meaning: \"Paraphrase the following "
             "sentence into a new sentence: \"SENTENCE_1\"\"",
             1, 3});
        REQUIRE(response.texts.size() == 1);
        CHECK(contains(response.texts[0], kSentence1));
    }
    SUBCASE("combine prompt mutation keeps both markers") {
        const auto response = generator.generate(
            {"Rewrite the sentence using different words: \"Combine \"SENTENCE_1\" and "
             "\"SENTENCE_2\" to create a new, cohesive sentence that retains elements from "
             "both.\"",
             1, 3});
        REQUIRE(response.texts.size() == 1);
        CHECK(contains(response.texts[0], kSentence1));
        CHECK(contains(response.texts[0], kSentence2));
    }
}

TEST_CASE("lexicon scorer pins the keyword sigmoid and neutral points") {
    LexiconScorer neutral("neutral", {});
    // Three own-label keywords, nothing else: sigmoid(3).
    const double triple = neutral.score_text("joy delight laughter", "joy");
    CHECK(triple >= 0.9);
    CHECK(triple == doctest::Approx(0.95257412682243336).epsilon(1e-12));

    CHECK(neutral.score_text("", "joy") == doctest::Approx(0.5));
    LexiconScorer diary("diary", {});
    CHECK(diary.score_text("", "joy") == doctest::Approx(0.5 * 0.5));
    LexiconScorer social("social", {});
    CHECK(social.score_text("", "joy") == doctest::Approx(0.5 * 0.6));

    // Same text, own label beats a label with no evidence.
    CHECK(neutral.score_text("joy delight", "joy") > neutral.score_text("joy delight", "fear"));
}

TEST_CASE("lexicon scorer is monotone in target keyword count at fixed length") {
    LexiconScorer neutral("neutral", {});
    double previous = -1.0;
    const std::vector<std::string> texts = {
        "stone river evening walk", "joy river evening walk", "joy delight evening walk",
        "joy delight laughter walk", "joy delight laughter smile"};
    for (const auto& text : texts) {
        const double score = neutral.score_text(text, "joy");
        CHECK(score >= previous);
        previous = score;
    }
}

TEST_CASE("style factors genuinely conflict") {
    LexiconScorer diary("diary", {});
    LexiconScorer headline("headline", {});
    LexiconScorer social("social", {});

    const std::string diary_text = "i felt joy when the quiet morning letter arrived";
    const std::string headline_text = "joy sweeps city streets";
    const std::string social_text = "so much joy right now #joy !";

    CHECK(diary.score_text(diary_text, "joy") > diary.score_text(headline_text, "joy"));
    CHECK(diary.score_text(diary_text, "joy") > diary.score_text(social_text, "joy"));
    CHECK(headline.score_text(headline_text, "joy") > headline.score_text(diary_text, "joy"));
    CHECK(headline.score_text(headline_text, "joy") > headline.score_text(social_text, "joy"));
    CHECK(social.score_text(social_text, "joy") > social.score_text(diary_text, "joy"));
    CHECK(social.score_text(social_text, "joy") > social.score_text(headline_text, "joy"));
}

TEST_CASE("scores stay in [0,1] and empty batches stay empty") {
    LexiconScorer scorer("headline", {});
    ScoreResponse response =
        scorer.score({{"joy joy joy joy", "i felt sadness", "#anger !"}, "joy"});
    REQUIRE(response.scores.size() == 3);
    for (double s : response.scores) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
    CHECK(scorer.score({{}, "joy"}).scores.empty());
}

TEST_CASE("lexicon scorer requires coverage of the scored label") {
    LexiconScorer scorer("neutral", {{"joy", {"joy"}}});
    CHECK_THROWS_AS(scorer.score_text("text", "dread"), ContractViolation);
}

TEST_CASE("mock suggester is deterministic and context-sensitive") {
    MockSuggester suggester;
    const auto a = suggester.suggest({"Write a <mask> text that expresses <em>"});
    const auto b = suggester.suggest({"Write a <mask> text that expresses <em>"});
    CHECK(a.token == b.token);
    CHECK_FALSE(a.token.empty());
    CHECK(split_ws(a.token).size() == 1);

    const auto start = suggester.suggest({"<mask> a text that expresses <em>"});
    static const std::vector<std::string> starters = {"please", "kindly", "now",     "today",
                                                      "imagine", "quietly", "boldly", "write"};
    CHECK(std::find(starters.begin(), starters.end(), start.token) != starters.end());

    CHECK_THROWS_AS(suggester.suggest({"no mask here"}), ContractViolation);
    CHECK_THROWS_AS(suggester.suggest({"<mask> two <mask>"}), ContractViolation);
}

TEST_CASE("make_backends wires mocks and validates lexicon coverage") {
    auto config = support::base_config();
    const auto backends = make_backends(config);
    CHECK(backends.scorers.size() == 3);
    CHECK(backends.generator != nullptr);
    CHECK(backends.suggester != nullptr);

    config.emotions.push_back("nostalgia"); // not covered by the default lexicon
    CHECK_THROWS_AS(make_backends(config), ConfigError);

    config = support::base_config();
    config.generator = {"http", "http://127.0.0.1:1"};
    const auto forced = make_backends(config, true);
    CHECK(dynamic_cast<MockGenerator*>(forced.generator.get()) != nullptr);
}
