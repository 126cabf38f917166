#include "mopo/core.hpp"

#include "mopo/errors.hpp"
#include "mopo/rng.hpp"
#include "mopo/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace mopo {

using nlohmann::json;

const char* to_string(PromptLayer layer) {
    switch (layer) {
        case PromptLayer::Layer1: return "layer1";
        case PromptLayer::Layer2Combine: return "layer2_combine";
        case PromptLayer::Layer2Paraphrase: return "layer2_paraphrase";
        case PromptLayer::Layer3Fixed: return "layer3_fixed";
    }
    return "layer1";
}

const char* to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::Seed: return "seed";
        case OperatorKind::SentenceParaphrase: return "sentence_paraphrase";
        case OperatorKind::WordAdd: return "word_add";
        case OperatorKind::WordRemove: return "word_remove";
        case OperatorKind::WordReplace: return "word_replace";
        case OperatorKind::Combine: return "combine";
    }
    return "seed";
}

PromptLayer layer_from_string(const std::string& s) {
    if (s == "layer1") return PromptLayer::Layer1;
    if (s == "layer2_combine") return PromptLayer::Layer2Combine;
    if (s == "layer2_paraphrase") return PromptLayer::Layer2Paraphrase;
    if (s == "layer3_fixed") return PromptLayer::Layer3Fixed;
    throw ContractViolation("unknown prompt layer: " + s);
}

OperatorKind kind_from_string(const std::string& s) {
    if (s == "seed") return OperatorKind::Seed;
    if (s == "sentence_paraphrase") return OperatorKind::SentenceParaphrase;
    if (s == "word_add") return OperatorKind::WordAdd;
    if (s == "word_remove") return OperatorKind::WordRemove;
    if (s == "word_replace") return OperatorKind::WordReplace;
    if (s == "combine") return OperatorKind::Combine;
    throw ContractViolation("unknown operator kind: " + s);
}

std::size_t lineage_arity(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::Seed: return 0;
        case OperatorKind::Combine: return 2;
        default: return 1;
    }
}

double ObjectiveVector::mean() const {
    if (scores.empty()) return 0.0;
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
}

double ObjectiveVector::min_score() const {
    if (scores.empty()) return 0.0;
    return *std::min_element(scores.begin(), scores.end());
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> errs;
    if (c.generations < 1) errs.push_back("generations must be ≥ 1");
    if (c.generation_size < 1) errs.push_back("generation size must be ≥ 1");
    if (c.offspring_per_operator < 1) errs.push_back("offspring per operator must be ≥ 1");
    if (c.texts_per_prompt < 1) errs.push_back("texts per prompt must be ≥ 1");
    if (!(c.bleu_threshold >= 0.0 && c.bleu_threshold <= 1.0))
        errs.push_back("bleu threshold must be in [0,1]");
    if (!c.ablation.enable_combine && !c.ablation.enable_paraphrase)
        errs.push_back("at least one of combine/paraphrase must stay enabled");
    if (c.objectives.empty()) errs.push_back("objectives must be non-empty");
    if (c.top_n_per_objective < 0) errs.push_back("top-n per objective must be ≥ 0");
    if (c.best_per_objective_k < 1) errs.push_back("best-per-objective k must be ≥ 1");
    if (c.population_cap < 1) errs.push_back("population cap must be ≥ 1");
    if (c.parallelism < 1) errs.push_back("parallelism must be ≥ 1");
    if (c.emotions.empty()) errs.push_back("emotion label set must be non-empty");
    if (c.seed_prompts.empty()) errs.push_back("seed prompt list must be non-empty");

    for (const auto& s : c.seed_prompts)
        if (!contains(s, kEmotionSlot)) errs.push_back("Layer-1 prompt missing <em> placeholder");
    std::set<std::string> seen;
    for (const auto& s : c.seed_prompts)
        if (!seen.insert(normalize_ws(s)).second) errs.push_back("duplicate Layer-1 seed text");
    for (const auto& s : c.combine_prompts)
        if (!contains(s, kSentence1) || !contains(s, kSentence2))
            errs.push_back("combine prompt missing SENTENCE_1/SENTENCE_2 slot");
    for (const auto& s : c.paraphrase_prompts)
        if (!contains(s, kSentence1)) errs.push_back("paraphrase prompt missing SENTENCE_1 slot");
    for (const auto& s : c.fixed_prompts)
        if (!contains(s, kSentence1)) errs.push_back("fixed prompt missing SENTENCE_1 slot");
    if (c.ablation.enable_combine && c.combine_prompts.empty())
        errs.push_back("combine enabled but combine prompt list is empty");
    if (c.ablation.enable_paraphrase && c.paraphrase_prompts.empty())
        errs.push_back("paraphrase enabled but paraphrase prompt list is empty");
    if (c.fixed_prompts.empty()) errs.push_back("fixed prompt list must be non-empty");

    std::set<std::string> objective_names;
    for (const auto& o : c.objectives) {
        if (o.name.empty()) errs.push_back("objective with empty name");
        if (!objective_names.insert(o.name).second)
            errs.push_back("duplicate objective name: " + o.name);
        if (o.kind != "lexicon" && o.kind != "http")
            errs.push_back("objective kind must be lexicon or http: " + o.name);
        if (o.kind == "http" && o.endpoint.empty())
            errs.push_back("http objective missing endpoint: " + o.name);
    }
    for (const auto& b : {c.generator, c.suggester}) {
        if (b.kind != "mock" && b.kind != "http")
            errs.push_back("backend kind must be mock or http");
        if (b.kind == "http" && b.endpoint.empty()) errs.push_back("http backend missing endpoint");
    }
    return errs;
}

namespace {

json objective_to_json(const ObjectiveSpec& o) {
    json j{{"name", o.name}, {"kind", o.kind}, {"endpoint", o.endpoint}, {"style", o.style}};
    json lex = json::object();
    for (const auto& [label, words] : o.lexicon) lex[label] = words;
    j["lexicon"] = lex;
    return j;
}

ObjectiveSpec objective_from_json(const json& j) {
    ObjectiveSpec o;
    o.name = j.at("name").get<std::string>();
    o.kind = j.value("kind", "lexicon");
    o.endpoint = j.value("endpoint", "");
    o.style = j.value("style", "neutral");
    if (j.contains("lexicon"))
        for (const auto& [label, words] : j.at("lexicon").items())
            o.lexicon[label] = words.get<std::vector<std::string>>();
    return o;
}

json backend_to_json(const BackendSpec& b) {
    return json{{"kind", b.kind}, {"endpoint", b.endpoint}};
}

BackendSpec backend_from_json(const json& j) {
    BackendSpec b;
    b.kind = j.value("kind", "mock");
    b.endpoint = j.value("endpoint", "");
    return b;
}

} // namespace

std::string store_config(const RunConfig& c) {
    json j;
    j["seed_prompts"] = c.seed_prompts;
    j["combine_prompts"] = c.combine_prompts;
    j["paraphrase_prompts"] = c.paraphrase_prompts;
    j["fixed_prompts"] = c.fixed_prompts;
    j["generations"] = c.generations;
    j["generation_size"] = c.generation_size;
    j["offspring_per_operator"] = c.offspring_per_operator;
    j["texts_per_prompt"] = c.texts_per_prompt;
    j["emotions"] = c.emotions;
    j["objectives"] = json::array();
    for (const auto& o : c.objectives) j["objectives"].push_back(objective_to_json(o));
    j["bleu_threshold"] = c.bleu_threshold;
    j["top_n_per_objective"] = c.top_n_per_objective;
    j["rng_seed"] = c.rng_seed;
    j["ablation"] = json{{"enable_combine", c.ablation.enable_combine},
                         {"enable_paraphrase", c.ablation.enable_paraphrase}};
    j["best_per_objective_k"] = c.best_per_objective_k;
    j["population_cap"] = c.population_cap;
    j["parallelism"] = c.parallelism;
    j["combine_pool_cap"] = c.combine_pool_cap;
    j["paraphrase_pool_cap"] = c.paraphrase_pool_cap;
    j["generator"] = backend_to_json(c.generator);
    j["suggester"] = backend_to_json(c.suggester);
    return j.dump(2) + "\n";
}

RunConfig load_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        RunConfig c;
        c.seed_prompts = j.value("seed_prompts", c.seed_prompts);
        c.combine_prompts = j.value("combine_prompts", c.combine_prompts);
        c.paraphrase_prompts = j.value("paraphrase_prompts", c.paraphrase_prompts);
        c.fixed_prompts = j.value("fixed_prompts", c.fixed_prompts);
        c.generations = j.value("generations", c.generations);
        c.generation_size = j.value("generation_size", c.generation_size);
        c.offspring_per_operator = j.value("offspring_per_operator", c.offspring_per_operator);
        c.texts_per_prompt = j.value("texts_per_prompt", c.texts_per_prompt);
        c.emotions = j.value("emotions", c.emotions);
        if (j.contains("objectives")) {
            c.objectives.clear();
            for (const auto& o : j.at("objectives")) c.objectives.push_back(objective_from_json(o));
        }
        c.bleu_threshold = j.value("bleu_threshold", c.bleu_threshold);
        c.top_n_per_objective = j.value("top_n_per_objective", c.top_n_per_objective);
        c.rng_seed = j.value("rng_seed", c.rng_seed);
        if (j.contains("ablation")) {
            c.ablation.enable_combine = j["ablation"].value("enable_combine", true);
            c.ablation.enable_paraphrase = j["ablation"].value("enable_paraphrase", true);
        }
        c.best_per_objective_k = j.value("best_per_objective_k", c.best_per_objective_k);
        c.population_cap = j.value("population_cap", c.population_cap);
        c.parallelism = j.value("parallelism", c.parallelism);
        c.combine_pool_cap = j.value("combine_pool_cap", c.combine_pool_cap);
        c.paraphrase_pool_cap = j.value("paraphrase_pool_cap", c.paraphrase_pool_cap);
        if (j.contains("generator")) c.generator = backend_from_json(j["generator"]);
        if (j.contains("suggester")) c.suggester = backend_from_json(j["suggester"]);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

std::string config_digest(const RunConfig& c) {
    return to_hex16(fnv1a64(store_config(c)));
}

PromptId derive_prompt_id(std::uint64_t run_seed, int generation, const std::string& operator_id,
                          const std::vector<PromptId>& parents, int offspring_index) {
    std::string key = to_hex16(run_seed);
    key += '|';
    key += std::to_string(generation);
    key += '|';
    key += operator_id;
    key += '|';
    for (const auto& p : parents) {
        key += p;
        key += ',';
    }
    key += '|';
    key += std::to_string(offspring_index);
    return to_hex16(fnv1a64(key));
}

namespace {

json crowding_to_json(const std::optional<double>& crowding) {
    if (!crowding) return nullptr;
    if (std::isinf(*crowding)) return "inf";
    return *crowding;
}

std::optional<double> crowding_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_string()) return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

} // namespace

std::string store_evaluated(const EvaluatedPrompt& ep) {
    json j;
    j["id"] = ep.prompt.id;
    j["layer"] = to_string(ep.prompt.layer);
    j["text"] = ep.prompt.text;
    j["generation_born"] = ep.prompt.generation_born;
    j["lineage"] = ep.prompt.lineage;
    j["operator_id"] = ep.prompt.operator_id ? json(*ep.prompt.operator_id) : json(nullptr);
    j["operator_kind"] = to_string(ep.prompt.operator_kind);
    j["scores"] = ep.fitness.scores;
    j["objectives"] = ep.fitness.objective_ids;
    j["pareto_rank"] = ep.pareto_rank ? json(*ep.pareto_rank) : json(nullptr);
    j["crowding"] = crowding_to_json(ep.crowding);
    json samples = json::array();
    for (const auto& s : ep.samples) {
        samples.push_back(json{{"emotion", s.emotion},
                               {"index", s.index},
                               {"text", s.text},
                               {"echo_bleu", s.echo_bleu},
                               {"filtered", s.filtered}});
    }
    j["samples"] = samples;
    return j.dump();
}

EvaluatedPrompt load_evaluated(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw CorruptState(std::string("unparseable prompt record: ") + e.what());
    }
    try {
        EvaluatedPrompt ep;
        ep.prompt.id = j.at("id").get<std::string>();
        ep.prompt.layer = layer_from_string(j.at("layer").get<std::string>());
        ep.prompt.text = j.at("text").get<std::string>();
        ep.prompt.generation_born = j.at("generation_born").get<int>();
        ep.prompt.lineage = j.at("lineage").get<std::vector<std::string>>();
        if (!j.at("operator_id").is_null())
            ep.prompt.operator_id = j.at("operator_id").get<std::string>();
        ep.prompt.operator_kind = kind_from_string(j.at("operator_kind").get<std::string>());
        ep.fitness.scores = j.at("scores").get<std::vector<double>>();
        ep.fitness.objective_ids = j.at("objectives").get<std::vector<std::string>>();
        if (!j.at("pareto_rank").is_null()) ep.pareto_rank = j.at("pareto_rank").get<int>();
        ep.crowding = crowding_from_json(j.at("crowding"));
        for (const auto& s : j.at("samples")) {
            TextSample ts;
            ts.prompt_id = ep.prompt.id;
            ts.emotion = s.at("emotion").get<std::string>();
            ts.index = s.at("index").get<int>();
            ts.text = s.at("text").get<std::string>();
            ts.echo_bleu = s.at("echo_bleu").get<double>();
            ts.filtered = s.at("filtered").get<bool>();
            ep.samples.push_back(std::move(ts));
        }
        return ep;
    } catch (const json::exception& e) {
        throw CorruptState(std::string("malformed prompt record: ") + e.what());
    }
}

} // namespace mopo
