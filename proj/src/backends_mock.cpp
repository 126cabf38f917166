#include "mopo/backends.hpp"

#include "mopo/errors.hpp"
#include "mopo/rng.hpp"
#include "mopo/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mopo {

namespace {

const std::vector<std::string> kPersonalCues = {
    "i", "my", "me", "mine", "felt", "feel", "feels", "sensed", "personal",
    "diary", "experienced", "remember"};
const std::vector<std::string> kBrevityCues = {
    "short", "brief", "concise", "succinct", "headline", "news", "breaking",
    "compact", "fewer", "summarize", "20"};
const std::vector<std::string> kSocialCues = {
    "tweet", "hashtag", "casual", "informal", "social", "share", "friends",
    "fun", "mood", "vibes"};
const std::vector<std::string> kIntensityCues = {
    "vivid", "vividly", "detail", "detailed", "describe", "strongly", "deeply",
    "powerful", "moving", "compelling"};
const std::vector<std::string> kCombineCues = {
    "combine", "combining", "mix", "merge", "merges", "merging", "blend",
    "blends", "blending", "synthesize", "synthesizes", "fuse", "fuses",
    "intertwine", "intertwines", "weave", "weaves", "both", "two"};

const std::vector<std::string> kHeadlineFillers = {
    "city", "nation", "report", "officials", "sweeps", "strikes", "warning",
    "update", "crowd", "streets", "rises", "tonight"};
const std::vector<std::string> kPersonalFillers = {
    "when", "because", "yesterday", "remember", "moment", "heart", "quiet",
    "evening", "friend", "home", "morning", "letter"};
const std::vector<std::string> kSocialFillers = {
    "so", "much", "right", "now", "totally", "honestly", "literally", "every",
    "single", "day", "everyone", "wow"};
const std::vector<std::string> kPlainFillers = {
    "story", "about", "feeling", "sense", "deep", "slow", "note", "scene",
    "passing", "distant", "steady", "thought"};

const std::vector<std::string> kVariationWords = {
    "truly",    "softly",   "gently",   "boldly",   "quietly", "plainly",
    "freshly",  "neatly",   "openly",   "warmly",   "calmly",  "keenly",
    "simply",   "deeply",   "vividly",  "briskly",  "today",   "tonight",
    "anew",     "again",    "once",     "still",    "soon",    "often",
    "short",    "brief",    "concise",  "headline", "casual",  "informal",
    "personal", "diary",    "vivid",    "detailed", "powerful", "moving",
    "fun",      "share",    "strongly", "compelling"};

const std::vector<std::string> kConnectives = {"and", "while", "amid", "with", "as", "beside"};

const std::vector<std::pair<std::string, std::string>> kSynonyms = {
    {"following", "given"},   {"sentence", "statement"}, {"write", "compose"},
    {"text", "passage"},      {"new", "fresh"},          {"create", "craft"},
    {"different", "distinct"},{"meaning", "message"},    {"please", "kindly"},
    {"describe", "depict"},   {"expresses", "conveys"},  {"expressing", "conveying"},
    {"express", "convey"},    {"provide", "offer"},      {"example", "instance"},
    {"situation", "scenario"},{"person", "individual"},  {"felt", "sensed"},
    {"complete", "finish"},   {"phrases", "wordings"},   {"experience", "episode"},
    {"event", "occasion"}};

const std::set<std::string> kStopwords = {
    "a", "an", "the", "of", "in", "on", "for", "to", "and", "or", "is", "are",
    "that", "this", "by", "with", "into", "from", "at", "as", "it", "its"};

/// Strips ASCII non-alphanumeric characters from both token edges.
std::string strip_edges(const std::string& tok) {
    std::size_t b = 0, e = tok.size();
    auto alnum = [](unsigned char c) { return std::isalnum(c) != 0; };
    while (b < e && !alnum(tok[b])) ++b;
    while (e > b && !alnum(tok[e - 1])) --e;
    return tok.substr(b, e - b);
}

bool token_in(const std::vector<std::string>& set, const std::string& folded_core) {
    return std::find(set.begin(), set.end(), folded_core) != set.end();
}

bool any_cue(const std::vector<std::string>& tokens, const std::vector<std::string>& cues) {
    for (const auto& t : tokens)
        if (token_in(cues, strip_edges(t))) return true;
    return false;
}

bool protected_token(const std::string& tok) {
    return contains(tok, kEmotionSlot) || contains(tok, kSentence1) || contains(tok, kSentence2);
}

std::vector<std::size_t> quote_positions(const std::string& text) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < text.size(); ++i)
        if (text[i] == '"') pos.push_back(i);
    return pos;
}

const std::string& pick(const std::vector<std::string>& pool, std::uint64_t h) {
    return pool[h % pool.size()];
}

} // namespace

const std::map<std::string, std::vector<std::string>>& default_emotion_lexicon() {
    static const std::map<std::string, std::vector<std::string>> lexicon = {
        {"joy",
         {"joy", "joyful", "delight", "smile", "laughter", "cheerful", "glad",
          "sunshine", "celebrate", "bliss"}},
        {"anger",
         {"anger", "angry", "rage", "furious", "outrage", "fuming", "resentment",
          "irritated", "seething", "bitter"}},
        {"fear",
         {"fear", "afraid", "dread", "panic", "terror", "anxious", "trembling",
          "alarmed", "scared", "uneasy"}},
        {"disgust",
         {"disgust", "disgusted", "revolting", "nausea", "repulsed", "filthy",
          "sickening", "vile", "foul", "loathing"}},
        {"sadness",
         {"sadness", "sad", "grief", "sorrow", "tears", "mourning", "lonely",
          "heartbroken", "gloomy", "despair"}},
    };
    return lexicon;
}

MockGenerator::MockGenerator(std::vector<std::string> emotion_labels)
    : labels_(std::move(emotion_labels)) {}

namespace {

std::string paraphrase_rewrite(const std::string& payload, std::uint64_t h, int completion) {
    auto tokens = split_ws(payload);
    if (tokens.empty()) tokens.push_back("blank");
    const std::uint64_t hc = hash_mix(h, static_cast<std::uint64_t>(completion));

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (protected_token(tokens[i])) continue;
        const std::string core = strip_edges(fold_case(tokens[i]));
        for (const auto& [from, to] : kSynonyms) {
            if (core == from && ((hc >> (i % 32)) & 1)) {
                const std::string folded = fold_case(tokens[i]);
                const std::size_t b = folded.find(from);
                tokens[i] = tokens[i].substr(0, b) + to + tokens[i].substr(b + from.size());
                break;
            }
        }
    }

    const bool two_markers = contains(payload, kSentence1) && contains(payload, kSentence2);
    if (!two_markers && tokens.size() > 1) {
        const std::size_t r = hash_mix(hc, 0x726f74) % tokens.size();
        std::rotate(tokens.begin(), tokens.begin() + r, tokens.end());
    }

    const std::size_t pos = hash_mix(hc, 0x706f73) % (tokens.size() + 1);
    tokens.insert(tokens.begin() + pos, pick(kVariationWords, hash_mix(hc, 0x776f7264)));
    const std::size_t pos2 = hash_mix(hc, 0x706f7332) % (tokens.size() + 1);
    tokens.insert(tokens.begin() + pos2, pick(kVariationWords, hash_mix(hc, 0x776f726432)));
    return join_ws(tokens);
}

std::string combine_rewrite(const std::string& first, const std::string& second, std::uint64_t h,
                            int completion) {
    std::string a = first, b = second;
    if (completion % 2 == 1) std::swap(a, b);
    auto base = split_ws(a);
    const auto extra = split_ws(b);
    if (base.empty()) base.push_back("blank");

    std::set<std::string> base_folded;
    for (const auto& t : base) base_folded.insert(strip_edges(fold_case(t)));

    std::vector<std::string> distinctive;
    for (const auto& t : extra) {
        const std::string core = strip_edges(fold_case(t));
        if (core.empty() || kStopwords.count(core) || protected_token(t)) continue;
        if (!base_folded.count(core)) distinctive.push_back(t);
    }
    if (distinctive.empty() && !extra.empty()) {
        auto longest = std::max_element(extra.begin(), extra.end(),
                                        [](const auto& x, const auto& y) {
                                            return x.size() < y.size();
                                        });
        distinctive.push_back(*longest);
    }

    const std::uint64_t hc = hash_mix(h, static_cast<std::uint64_t>(completion) + 0x636d62);
    const std::size_t take = distinctive.empty() ? 0 : 1 + hc % std::min<std::size_t>(3, distinctive.size());
    const std::size_t start = distinctive.empty() ? 0 : hash_mix(hc, 1) % distinctive.size();

    std::vector<std::string> woven;
    woven.push_back(pick(kConnectives, hash_mix(hc, 2)));
    for (std::size_t k = 0; k < take; ++k)
        woven.push_back(distinctive[(start + k) % distinctive.size()]);

    std::size_t pos = hash_mix(hc, 3) % (base.size() + 1);
    base.insert(base.begin() + pos, woven.begin(), woven.end());
    const std::size_t vpos = hash_mix(hc, 4) % (base.size() + 1);
    base.insert(base.begin() + vpos, pick(kVariationWords, hash_mix(hc, 5)));

    if (base.size() > 24) {
        std::vector<std::string> trimmed(base.begin(), base.begin() + 24);
        bool has_slot = false;
        for (const auto& t : trimmed) has_slot = has_slot || contains(t, kEmotionSlot);
        if (!has_slot) {
            for (const auto& t : base)
                if (contains(t, kEmotionSlot)) {
                    trimmed.back() = t;
                    break;
                }
        }
        base = std::move(trimmed);
    }
    return join_ws(base);
}

} // namespace

GenerateResponse MockGenerator::generate(const GenerateRequest& request) {
    const std::uint64_t h =
        hash_mix(fnv1a64(request.prompt), static_cast<std::uint64_t>(request.seed));
    const auto quotes = quote_positions(request.prompt);

    GenerateResponse response;
    response.texts.reserve(static_cast<std::size_t>(request.n));

    if (quotes.size() >= 2) {
        const std::string outside = request.prompt.substr(0, quotes.front()) +
                                    request.prompt.substr(quotes.back() + 1);
        const bool combine_intent =
            quotes.size() >= 4 && any_cue(fold_tokens(outside), kCombineCues);
        if (combine_intent) {
            const std::string first =
                request.prompt.substr(quotes[0] + 1, quotes[1] - quotes[0] - 1);
            const std::string second =
                request.prompt.substr(quotes[2] + 1, quotes.back() - quotes[2] - 1);
            for (int t = 0; t < request.n; ++t)
                response.texts.push_back(combine_rewrite(first, second, h, t));
            return response;
        }
        const std::string payload =
            request.prompt.substr(quotes.front() + 1, quotes.back() - quotes.front() - 1);
        if (!split_ws(payload).empty()) {
            for (int t = 0; t < request.n; ++t)
                response.texts.push_back(paraphrase_rewrite(payload, h, t));
            return response;
        }
    }

    // Task mode: emotion-conditioned sentences shaped by cue words.
    const std::string folded = fold_case(request.prompt);
    std::string label;
    for (const auto& l : labels_)
        if (contains(folded, fold_case(l))) {
            label = l;
            break;
        }
    if (label.empty() && !labels_.empty()) label = labels_[h % labels_.size()];

    const auto& lexicon = default_emotion_lexicon();
    auto lex_it = lexicon.find(label);
    static const std::vector<std::string> fallback_pool = {"stirring", "notable", "plain"};
    const std::vector<std::string>& pool =
        lex_it != lexicon.end() ? lex_it->second : fallback_pool;

    const auto prompt_tokens = fold_tokens(request.prompt);
    std::vector<std::string> styles;
    if (any_cue(prompt_tokens, kPersonalCues)) styles.push_back("personal");
    if (any_cue(prompt_tokens, kBrevityCues)) styles.push_back("headline");
    if (any_cue(prompt_tokens, kSocialCues)) styles.push_back("social");
    if (styles.empty()) styles.push_back("plain");
    const bool intense = any_cue(prompt_tokens, kIntensityCues);

    for (int t = 0; t < request.n; ++t) {
        const std::uint64_t ht = hash_mix(h, static_cast<std::uint64_t>(t) + 0x7461736b);
        const std::string& style = styles[static_cast<std::size_t>(t) % styles.size()];
        const std::string kw = pick(pool, ht);
        const std::string kw2 = pick(pool, ht >> 8);
        std::string text;
        if (style == "personal") {
            const std::string p1 = pick(kPersonalFillers, ht >> 16);
            const std::string p2 = pick(kPersonalFillers, ht >> 24);
            switch (ht % 4) {
                case 0: text = "i felt " + label + " when " + p1 + " " + p2 + " " + kw; break;
                case 1: text = "i remember " + kw + " in my " + p1 + " " + p2; break;
                case 2: text = "my heart held " + kw + " because " + p1 + " " + p2; break;
                default: text = "i feel " + kw + " and " + kw2 + " " + p1; break;
            }
        } else if (style == "headline") {
            const std::string f1 = pick(kHeadlineFillers, ht >> 16);
            const std::string f2 = pick(kHeadlineFillers, ht >> 24);
            const std::string f3 = pick(kHeadlineFillers, ht >> 32);
            switch (ht % 4) {
                case 0: text = kw + " " + f1 + " " + f2 + " " + f3; break;
                case 1: text = f1 + " " + kw + " as " + f2 + " " + f3; break;
                case 2: text = kw + " " + kw2 + " grips " + f1 + " " + f2; break;
                default: text = f1 + " " + f2 + " after " + kw + " " + f3; break;
            }
        } else if (style == "social") {
            const std::string s1 = pick(kSocialFillers, ht >> 16);
            const std::string s2 = pick(kSocialFillers, ht >> 24);
            switch (ht % 4) {
                case 0: text = "so much " + kw + " right now #" + label + " !"; break;
                case 1: text = "feeling " + kw + " " + s1 + " " + s2 + " #" + label; break;
                case 2: text = "this " + kw + " mood " + s1 + " ! #" + label; break;
                default: text = s1 + " " + kw + " vibes " + s2 + " #" + label + " !"; break;
            }
        } else {
            const std::string f1 = pick(kPlainFillers, ht >> 16);
            const std::string f2 = pick(kPlainFillers, ht >> 24);
            switch (ht % 4) {
                case 0: text = "the " + f1 + " " + f2 + " evening carried a sense of " + kw; break;
                case 1: text = "a " + f1 + " " + f2 + " lingered where " + kw + " once lived"; break;
                case 2: text = "that " + f1 + " " + f2 + " left only " + kw + " behind it"; break;
                default: text = "some " + f1 + " trace of " + kw + " crossed the " + f2; break;
            }
        }
        if (intense) text += " " + pick(pool, ht >> 40);
        response.texts.push_back(text);
    }
    return response;
}

LexiconScorer::LexiconScorer(std::string style,
                             std::map<std::string, std::vector<std::string>> lexicon)
    : style_(std::move(style)), lexicon_(std::move(lexicon)) {
    if (lexicon_.empty()) lexicon_ = default_emotion_lexicon();
    if (style_ != "neutral" && style_ != "diary" && style_ != "headline" && style_ != "social")
        throw ContractViolation("lexicon scorer: unknown style " + style_);
}

double LexiconScorer::style_factor(const std::string& text) const {
    const auto tokens = fold_tokens(text);
    if (tokens.empty()) {
        // style base: the neutral-evidence factor for an empty text
        if (style_ == "diary") return 0.5;
        if (style_ == "social") return 0.6;
        return 1.0;
    }
    const std::size_t len = tokens.size();
    bool pronoun = false;
    static const std::vector<std::string> pronouns = {"i", "me", "my", "mine", "we", "our"};
    for (const auto& t : tokens)
        if (token_in(pronouns, strip_edges(t))) pronoun = true;
    const bool informal = contains(text, "!") || contains(text, "#");

    if (style_ == "headline") {
        double f = 1.0;
        if (len > 12)
            f = 0.55;
        else if (len > 7)
            f = 0.75;
        if (pronoun) f *= 0.5;
        if (informal) f *= 0.7;
        return f;
    }
    if (style_ == "diary") {
        double f = pronoun ? 1.0 : 0.55;
        if (len < 6) f *= 0.7;
        if (informal) f *= 0.9;
        return f;
    }
    if (style_ == "social") {
        double f = informal ? 1.0 : 0.6;
        if (len > 14) f *= 0.8;
        return f;
    }
    return 1.0;
}

double LexiconScorer::score_text(const std::string& text, const std::string& label) const {
    auto own_it = lexicon_.find(label);
    if (own_it == lexicon_.end())
        throw ContractViolation("lexicon scorer: no keyword set for label " + label);

    const auto tokens = fold_tokens(text);
    int own = 0;
    int best_other = 0;
    for (const auto& [l, words] : lexicon_) {
        int count = 0;
        for (const auto& t : tokens)
            if (token_in(words, strip_edges(t))) ++count;
        if (l == label)
            own = count;
        else
            best_other = std::max(best_other, count);
    }
    const double delta = static_cast<double>(own - best_other);
    const double base = 1.0 / (1.0 + std::exp(-delta));
    return base * style_factor(text);
}

ScoreResponse LexiconScorer::score(const ScoreRequest& request) {
    ScoreResponse response;
    response.scores.reserve(request.texts.size());
    for (const auto& text : request.texts)
        response.scores.push_back(score_text(text, request.label));
    return response;
}

SuggestResponse MockSuggester::suggest(const SuggestRequest& request) {
    const std::size_t mask = request.text.find(kMaskToken);
    if (mask == std::string::npos || request.text.find(kMaskToken, mask + 1) != std::string::npos)
        throw ContractViolation("suggest: request must contain exactly one mask marker");

    static const std::vector<std::string> vocabulary = {
        "truly",  "deeply", "softly",  "boldly",  "calm",   "bright", "quiet",
        "gentle", "fierce", "tender",  "raw",     "wild",   "warm",   "cold",
        "dark",   "light",  "short",   "brief",   "vivid",  "personal",
        "casual", "honest", "simple",  "plain",   "clear",  "strong",
        "fresh",  "keen",   "mild",    "today",   "tonight", "mood",
        "story",  "scene",  "note",    "voice",   "pulse",  "spark",
        "wave",   "detailed"};
    static const std::vector<std::string> initial_vocabulary = {
        "please", "kindly", "now", "today", "imagine", "quietly", "boldly", "write"};

    const std::string left = normalize_ws(request.text.substr(0, mask));
    const std::string right = normalize_ws(request.text.substr(mask + std::string(kMaskToken).size()));
    const std::uint64_t h = hash_mix(fnv1a64(left), fnv1a64(right));

    SuggestResponse response;
    response.token = left.empty() ? pick(initial_vocabulary, h) : pick(vocabulary, h);
    return response;
}

} // namespace mopo
