#include "mopo/engine.hpp"

#include "mopo/errors.hpp"
#include "mopo/fitness.hpp"
#include "mopo/log.hpp"
#include "mopo/pareto.hpp"
#include "mopo/rng.hpp"
#include "mopo/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace mopo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- counters

struct CallCounters {
    std::atomic<long> generate{0};
    std::atomic<long> score{0};
    std::atomic<long> suggest{0};
};

struct CountingGenerator : TextGenerator {
    CountingGenerator(std::shared_ptr<TextGenerator> inner, CallCounters* counters)
        : inner(std::move(inner)), counters(counters) {}
    GenerateResponse generate(const GenerateRequest& request) override {
        ++counters->generate;
        return inner->generate(request);
    }
    std::shared_ptr<TextGenerator> inner;
    CallCounters* counters;
};

struct CountingScorer : ObjectiveScorer {
    CountingScorer(std::shared_ptr<ObjectiveScorer> inner, CallCounters* counters)
        : inner(std::move(inner)), counters(counters) {}
    ScoreResponse score(const ScoreRequest& request) override {
        ++counters->score;
        return inner->score(request);
    }
    std::shared_ptr<ObjectiveScorer> inner;
    CallCounters* counters;
};

struct CountingSuggester : TokenSuggester {
    CountingSuggester(std::shared_ptr<TokenSuggester> inner, CallCounters* counters)
        : inner(std::move(inner)), counters(counters) {}
    SuggestResponse suggest(const SuggestRequest& request) override {
        ++counters->suggest;
        return inner->suggest(request);
    }
    std::shared_ptr<TokenSuggester> inner;
    CallCounters* counters;
};

// ---------------------------------------------------------------- json io

json prompt_to_json(const Prompt& p) {
    return json{{"id", p.id},
                {"layer", to_string(p.layer)},
                {"text", p.text},
                {"generation_born", p.generation_born},
                {"lineage", p.lineage},
                {"operator_id", p.operator_id ? json(*p.operator_id) : json(nullptr)},
                {"operator_kind", to_string(p.operator_kind)}};
}

Prompt prompt_from_json(const json& j) {
    Prompt p;
    p.id = j.at("id").get<std::string>();
    p.layer = layer_from_string(j.at("layer").get<std::string>());
    p.text = j.at("text").get<std::string>();
    p.generation_born = j.at("generation_born").get<int>();
    p.lineage = j.at("lineage").get<std::vector<std::string>>();
    if (!j.at("operator_id").is_null()) p.operator_id = j.at("operator_id").get<std::string>();
    p.operator_kind = kind_from_string(j.at("operator_kind").get<std::string>());
    return p;
}

json crowding_value(double crowding) {
    if (std::isinf(crowding)) return "inf";
    return crowding;
}

double crowding_from(const json& j) {
    if (j.is_string()) return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

json meta_to_json(const GenerationMeta& meta, bool include_wall) {
    json j;
    j["type"] = "generation_meta";
    j["generation"] = meta.generation;
    j["config_digest"] = meta.config_digest;
    j["population_size"] = meta.population_size;
    json selected = json::array();
    for (const auto& s : meta.selected)
        selected.push_back(
            json{{"id", s.id}, {"rank", s.pareto_rank}, {"crowding", crowding_value(s.crowding)}});
    j["selected"] = selected;
    json bests = json::object();
    for (const auto& [name, ids] : meta.best_per_objective) bests[name] = ids;
    j["best_per_objective"] = bests;
    json combine_pool = json::array();
    for (const auto& p : meta.combine_pool) combine_pool.push_back(prompt_to_json(p));
    j["combine_pool"] = combine_pool;
    json paraphrase_pool = json::array();
    for (const auto& p : meta.paraphrase_pool) paraphrase_pool.push_back(prompt_to_json(p));
    j["paraphrase_pool"] = paraphrase_pool;
    json ledger = json::object();
    for (const auto& [id, stats] : meta.ledger)
        ledger[id] = json{{"produced", stats.offspring_produced},
                          {"selected", stats.offspring_selected},
                          {"mean_fitness", stats.mean_offspring_fitness}};
    j["ledger"] = ledger;
    j["rng_state"] = meta.rng_state;
    j["front_metric"] = meta.front_metric;
    j["best_scores"] = meta.best_scores;
    json calls = json::object();
    for (const auto& [k, v] : meta.backend_calls) calls[k] = v;
    j["backend_calls"] = calls;
    j["offspring"] = json{{"combine", meta.offspring_combine},
                          {"sentence", meta.offspring_sentence},
                          {"word", meta.offspring_word}};
    j["pools_used"] = json{{"combine", meta.combine_pool_used},
                           {"paraphrase", meta.paraphrase_pool_used}};
    j["pair_count"] = meta.pair_count;
    j["cap_triggered"] = meta.cap_triggered;
    if (include_wall) j["wall_ms"] = meta.wall_ms;
    return j;
}

GenerationMeta meta_from_json(const json& j) {
    GenerationMeta meta;
    meta.generation = j.at("generation").get<int>();
    meta.config_digest = j.at("config_digest").get<std::string>();
    meta.population_size = j.at("population_size").get<int>();
    for (const auto& s : j.at("selected"))
        meta.selected.push_back(SelectedRef{s.at("id").get<std::string>(),
                                            s.at("rank").get<int>(),
                                            crowding_from(s.at("crowding"))});
    for (const auto& [name, ids] : j.at("best_per_objective").items())
        meta.best_per_objective[name] = ids.get<std::vector<std::string>>();
    for (const auto& p : j.at("combine_pool")) meta.combine_pool.push_back(prompt_from_json(p));
    for (const auto& p : j.at("paraphrase_pool"))
        meta.paraphrase_pool.push_back(prompt_from_json(p));
    for (const auto& [id, stats] : j.at("ledger").items())
        meta.ledger[id] = Layer2Stats{stats.at("produced").get<int>(),
                                      stats.at("selected").get<int>(),
                                      stats.at("mean_fitness").get<double>()};
    meta.rng_state = j.at("rng_state").get<std::string>();
    meta.front_metric = j.at("front_metric").get<double>();
    meta.best_scores = j.at("best_scores").get<std::vector<double>>();
    for (const auto& [k, v] : j.at("backend_calls").items())
        meta.backend_calls[k] = v.get<long>();
    meta.offspring_combine = j.at("offspring").at("combine").get<int>();
    meta.offspring_sentence = j.at("offspring").at("sentence").get<int>();
    meta.offspring_word = j.at("offspring").at("word").get<int>();
    meta.combine_pool_used = j.at("pools_used").at("combine").get<int>();
    meta.paraphrase_pool_used = j.at("pools_used").at("paraphrase").get<int>();
    meta.pair_count = j.at("pair_count").get<int>();
    meta.cap_triggered = j.at("cap_triggered").get<bool>();
    meta.wall_ms = j.value("wall_ms", 0L);
    return meta;
}

// ---------------------------------------------------------------- state

struct EngineState {
    RunConfig config;
    std::string digest;
    Backends backends;
    CallCounters counters;
    bool cache_enabled = false;
    std::string dir;

    std::mutex cache_mutex;
    std::map<std::string, std::pair<ObjectiveVector, std::vector<TextSample>>> cache;

    std::set<std::string> known_texts; // normalized texts of evaluated Layer-1 prompts
    std::set<PromptId> known_ids;

    std::vector<Prompt> parents;            // P_pop seeds for the next generation
    std::vector<EvaluatedPrompt> p_opt;     // last selection
    std::vector<EvaluatedPrompt> p_cands;   // accumulated selections
    std::vector<Prompt> combine_pool;
    std::vector<Prompt> paraphrase_pool;
    std::vector<Prompt> fixed_pool;
    Layer2Ledger layer2_scores;             // carried effective stats
    std::map<std::string, std::vector<Prompt>> bests; // per objective, for PairSample
    std::vector<GenerationRecord> records;

    std::vector<std::string> objective_names() const {
        std::vector<std::string> names;
        for (const auto& o : config.objectives) names.push_back(o.name);
        return names;
    }
    int combine_cap() const {
        return config.combine_pool_cap > 0 ? config.combine_pool_cap
                                           : static_cast<int>(config.combine_prompts.size());
    }
    int paraphrase_cap() const {
        return config.paraphrase_pool_cap > 0
                   ? config.paraphrase_pool_cap
                   : static_cast<int>(config.paraphrase_prompts.size());
    }
};

void init_pools(EngineState& st) {
    const auto mk = [&](const std::string& tag, PromptLayer layer,
                        const std::vector<std::string>& texts) {
        std::vector<Prompt> pool;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            Prompt p;
            p.id = derive_prompt_id(st.config.rng_seed, 0, tag, {}, static_cast<int>(i));
            p.layer = layer;
            p.text = texts[i];
            p.generation_born = 0;
            p.operator_kind = OperatorKind::Seed;
            pool.push_back(std::move(p));
        }
        return pool;
    };
    st.combine_pool = mk("pool_combine", PromptLayer::Layer2Combine, st.config.combine_prompts);
    st.paraphrase_pool =
        mk("pool_paraphrase", PromptLayer::Layer2Paraphrase, st.config.paraphrase_prompts);
    st.fixed_pool = mk("pool_fixed", PromptLayer::Layer3Fixed, st.config.fixed_prompts);
    st.parents = mk("seed", PromptLayer::Layer1, st.config.seed_prompts);
}

void install_counters(EngineState& st, Backends backends) {
    st.backends.generator =
        std::make_shared<CountingGenerator>(std::move(backends.generator), &st.counters);
    st.backends.suggester =
        std::make_shared<CountingSuggester>(std::move(backends.suggester), &st.counters);
    for (auto& scorer : backends.scorers)
        st.backends.scorers.push_back(
            std::make_shared<CountingScorer>(std::move(scorer), &st.counters));
}

bool all_backends_deterministic(const RunConfig& config) {
    if (config.generator.kind != "mock" || config.suggester.kind != "mock") return false;
    for (const auto& o : config.objectives)
        if (o.kind != "lexicon") return false;
    return true;
}

// ---------------------------------------------------------------- evaluation

EvaluatedPrompt evaluate_one(EngineState& st, const Prompt& prompt) {
    const std::string key = normalize_ws(prompt.text);
    if (st.cache_enabled) {
        std::lock_guard lock(st.cache_mutex);
        auto it = st.cache.find(key);
        if (it != st.cache.end()) {
            EvaluatedPrompt ep;
            ep.prompt = prompt;
            ep.fitness = it->second.first;
            ep.samples = it->second.second;
            for (auto& s : ep.samples) s.prompt_id = prompt.id;
            return ep;
        }
    }
    EvaluatedPrompt ep = evaluate(prompt, st.backends, st.config);
    if (st.cache_enabled) {
        std::lock_guard lock(st.cache_mutex);
        st.cache.emplace(key, std::make_pair(ep.fitness, ep.samples));
    }
    return ep;
}

std::vector<EvaluatedPrompt> evaluate_population(EngineState& st,
                                                 const std::vector<Prompt>& population) {
    std::vector<EvaluatedPrompt> results(population.size());
    const int workers = std::min<int>(st.config.parallelism,
                                      static_cast<int>(population.size()) > 0
                                          ? static_cast<int>(population.size())
                                          : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < population.size(); ++i)
            results[i] = evaluate_one(st, population[i]);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= population.size()) return;
            try {
                results[i] = evaluate_one(st, population[i]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

// ---------------------------------------------------------------- helpers

std::map<std::string, std::vector<Prompt>> best_prompts_per_objective(
    const std::vector<EvaluatedPrompt>& evaluated, const std::vector<std::string>& names,
    int k) {
    std::map<std::string, std::vector<Prompt>> bests;
    for (std::size_t j = 0; j < names.size(); ++j) {
        std::vector<std::size_t> order(evaluated.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (evaluated[a].fitness.scores[j] != evaluated[b].fitness.scores[j])
                return evaluated[a].fitness.scores[j] > evaluated[b].fitness.scores[j];
            return evaluated[a].prompt.id < evaluated[b].prompt.id;
        });
        std::vector<Prompt>& picked = bests[names[j]];
        for (std::size_t i = 0; i < order.size() && static_cast<int>(picked.size()) < k; ++i)
            picked.push_back(evaluated[order[i]].prompt);
    }
    return bests;
}

std::map<std::string, std::vector<Prompt>> random_bests(const std::vector<Prompt>& seeds,
                                                        const std::vector<std::string>& names,
                                                        int k, SplitMix64& rng) {
    std::map<std::string, std::vector<Prompt>> bests;
    for (const auto& name : names) {
        std::vector<std::size_t> idx(seeds.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            const std::size_t j = i + rng.below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        std::vector<Prompt>& picked = bests[name];
        for (std::size_t i = 0; i < idx.size() && static_cast<int>(picked.size()) < k; ++i)
            picked.push_back(seeds[idx[i]]);
    }
    return bests;
}

void persist_generation(const EngineState& st, const GenerationRecord& record,
                        const std::map<PromptId, SelectedRef>& selected_refs) {
    const std::string path = generation_file(st.dir, record.meta.generation);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CorruptState("cannot write " + path);
    out << meta_to_json(record.meta, true).dump() << "\n";
    for (const auto& ep : record.population) {
        EvaluatedPrompt line = ep;
        auto it = selected_refs.find(ep.prompt.id);
        if (it != selected_refs.end()) {
            line.pareto_rank = it->second.pareto_rank;
            line.crowding = it->second.crowding;
        }
        out << store_evaluated(line) << "\n";
    }
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// ---------------------------------------------------------------- the loop

std::vector<EvaluatedPrompt> dedup_candidates(const std::vector<EvaluatedPrompt>& cands);
double candidate_front_hypervolume(const EngineState& st);

void run_generation(EngineState& st, int gen, std::ostream* progress) {
    const auto t0 = std::chrono::steady_clock::now();
    const long calls0_generate = st.counters.generate.load();
    const long calls0_score = st.counters.score.load();
    const long calls0_suggest = st.counters.suggest.load();

    SplitMix64 rng(hash_mix(st.config.rng_seed, 0xA11CE5ULL + static_cast<std::uint64_t>(gen)));
    const auto names = st.objective_names();
    const int C = st.config.offspring_per_operator;

    std::set<std::string> gen_known = st.known_texts;
    for (const auto& p : st.parents) gen_known.insert(normalize_ws(p.text));

    GenerationMeta meta;
    meta.generation = gen;
    meta.config_digest = st.digest;

    Layer2Ledger gen_ledger;
    std::vector<Prompt> offspring;

    if (st.config.ablation.enable_combine) {
        mutate_layer2(st.combine_pool, st.fixed_pool, *st.backends.generator, rng,
                      st.config.rng_seed, gen);
        meta.combine_pool_used = static_cast<int>(st.combine_pool.size());
        const auto bests = (gen == 0 && st.bests.empty())
                               ? random_bests(st.parents, names,
                                              st.config.best_per_objective_k, rng)
                               : st.bests;
        const auto pairs = pair_sample(bests, names);
        meta.pair_count = static_cast<int>(pairs.size());
        if (pairs.empty() && log_on(LogLevel::Info))
            std::cerr << "[mopo] generation " << gen << ": combine is a no-op (fewer than two "
                      << "distinct best prompts)\n";
        auto kids = combine(pairs, st.combine_pool, C, *st.backends.generator,
                            st.config.rng_seed, gen, gen_known, gen_ledger);
        meta.offspring_combine = static_cast<int>(kids.size());
        offspring.insert(offspring.end(), kids.begin(), kids.end());
    }

    if (st.config.ablation.enable_paraphrase) {
        mutate_layer2(st.paraphrase_pool, st.fixed_pool, *st.backends.generator, rng,
                      st.config.rng_seed, gen);
        meta.paraphrase_pool_used = static_cast<int>(st.paraphrase_pool.size());
        for (const auto& parent : st.parents) {
            auto sentence_kids =
                sentence_paraphrase(parent, st.paraphrase_pool, C, *st.backends.generator,
                                    st.config.rng_seed, gen, gen_known, gen_ledger);
            meta.offspring_sentence += static_cast<int>(sentence_kids.size());
            offspring.insert(offspring.end(), sentence_kids.begin(), sentence_kids.end());
            if (split_ws(parent.text).size() >= 2) {
                auto word_kids = word_paraphrase(parent, C, *st.backends.suggester, rng,
                                                 st.config.rng_seed, gen, gen_known);
                meta.offspring_word += static_cast<int>(word_kids.size());
                offspring.insert(offspring.end(), word_kids.begin(), word_kids.end());
            }
        }
    }

    const std::size_t cap = static_cast<std::size_t>(st.config.population_cap);
    if (st.parents.size() + offspring.size() > cap) {
        const std::size_t keep = cap > st.parents.size() ? cap - st.parents.size() : 0;
        std::vector<std::size_t> idx(offspring.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < keep && i + 1 < idx.size(); ++i) {
            const std::size_t j = i + rng.below(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(keep);
        std::sort(idx.begin(), idx.end());
        std::vector<Prompt> trimmed;
        trimmed.reserve(keep);
        for (std::size_t i : idx) trimmed.push_back(offspring[i]);
        if (log_on(LogLevel::Warn))
            std::cerr << "[mopo] generation " << gen << ": population cap " << cap << " trimmed "
                      << (offspring.size() - trimmed.size()) << " of " << offspring.size()
                      << " offspring before evaluation\n";
        offspring = std::move(trimmed);
        meta.cap_triggered = true;
    }

    std::vector<Prompt> p_pop = st.parents;
    p_pop.insert(p_pop.end(), offspring.begin(), offspring.end());
    meta.population_size = static_cast<int>(p_pop.size());

    for (const auto& p : p_pop) {
        if (!st.known_ids.insert(p.id).second &&
            std::find_if(st.parents.begin(), st.parents.end(),
                         [&](const Prompt& q) { return q.id == p.id; }) == st.parents.end())
            throw ContractViolation("duplicate prompt id within run: " + p.id);
    }

    auto evaluated = evaluate_population(st, p_pop);

    auto selection = pareto_selection(evaluated, st.config.generation_size,
                                      st.config.top_n_per_objective);

    st.bests = best_prompts_per_objective(evaluated, names, st.config.best_per_objective_k);

    // Finalize ledger entries for every Layer-2 prompt that produced offspring.
    for (auto& [op_id, stats] : gen_ledger) {
        double fitness_sum = 0.0;
        int evaluated_count = 0;
        for (const auto& ep : evaluated) {
            if (ep.prompt.generation_born == gen && ep.prompt.operator_id &&
                *ep.prompt.operator_id == op_id) {
                fitness_sum += ep.fitness.mean();
                ++evaluated_count;
            }
        }
        int selected_count = 0;
        for (const auto& ep : selection) {
            if (ep.prompt.generation_born == gen && ep.prompt.operator_id &&
                *ep.prompt.operator_id == op_id)
                ++selected_count;
        }
        stats.offspring_selected = selected_count;
        stats.mean_offspring_fitness =
            evaluated_count > 0 ? fitness_sum / evaluated_count : 0.0;
        st.layer2_scores[op_id] = stats;
    }

    if (st.config.ablation.enable_combine)
        st.combine_pool = select_layer2(st.combine_pool, st.layer2_scores, st.combine_cap());
    if (st.config.ablation.enable_paraphrase)
        st.paraphrase_pool =
            select_layer2(st.paraphrase_pool, st.layer2_scores, st.paraphrase_cap());

    // Keep carried scores only for prompts still in a pool.
    {
        std::set<PromptId> live;
        for (const auto& p : st.combine_pool) live.insert(p.id);
        for (const auto& p : st.paraphrase_pool) live.insert(p.id);
        for (auto it = st.layer2_scores.begin(); it != st.layer2_scores.end();) {
            if (!live.count(it->first))
                it = st.layer2_scores.erase(it);
            else
                ++it;
        }
    }

    std::map<PromptId, SelectedRef> selected_refs;
    for (const auto& ep : selection) {
        SelectedRef ref{ep.prompt.id, *ep.pareto_rank, *ep.crowding};
        meta.selected.push_back(ref);
        selected_refs.emplace(ep.prompt.id, ref);
    }
    for (const auto& [name, prompts] : st.bests) {
        auto& ids = meta.best_per_objective[name];
        for (const auto& p : prompts) ids.push_back(p.id);
    }
    meta.combine_pool = st.combine_pool;
    meta.paraphrase_pool = st.paraphrase_pool;
    meta.ledger = st.layer2_scores;
    meta.rng_state = to_hex16(rng.state());

    meta.best_scores.assign(names.size(), 0.0);
    for (const auto& ep : selection)
        for (std::size_t j = 0; j < names.size(); ++j)
            meta.best_scores[j] = std::max(meta.best_scores[j], ep.fitness.scores[j]);

    for (const auto& ep : evaluated) st.known_texts.insert(normalize_ws(ep.prompt.text));
    st.p_opt = selection;
    st.p_cands.insert(st.p_cands.end(), selection.begin(), selection.end());
    st.parents.clear();
    for (const auto& ep : selection) st.parents.push_back(ep.prompt);

    meta.front_metric = candidate_front_hypervolume(st);
    meta.backend_calls["generate"] = st.counters.generate.load() - calls0_generate;
    meta.backend_calls["score"] = st.counters.score.load() - calls0_score;
    meta.backend_calls["suggest"] = st.counters.suggest.load() - calls0_suggest;
    meta.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();

    GenerationRecord record;
    record.meta = meta;
    record.population = evaluated;

    persist_generation(st, record, selected_refs);
    st.records.push_back(record);

    if (progress) {
        std::string best;
        for (std::size_t j = 0; j < meta.best_scores.size(); ++j) {
            if (j) best += ",";
            best += fmt4(meta.best_scores[j]);
        }
        (*progress) << "gen " << gen << "  pop " << meta.population_size << "  best " << best
                    << "  hv " << fmt4(meta.front_metric) << "\n";
    }
}

std::vector<EvaluatedPrompt> dedup_candidates(const std::vector<EvaluatedPrompt>& cands) {
    // Deduplicate by normalized text, keeping the record with the higher mean
    // fitness (ties: lower id).
    std::map<std::string, EvaluatedPrompt> best_by_text;
    for (const auto& ep : cands) {
        const std::string key = normalize_ws(ep.prompt.text);
        auto it = best_by_text.find(key);
        if (it == best_by_text.end()) {
            best_by_text.emplace(key, ep);
            continue;
        }
        const double existing = it->second.fitness.mean();
        const double candidate = ep.fitness.mean();
        if (candidate > existing ||
            (candidate == existing && ep.prompt.id < it->second.prompt.id))
            it->second = ep;
    }
    std::vector<EvaluatedPrompt> pool;
    pool.reserve(best_by_text.size());
    for (auto& [key, ep] : best_by_text) pool.push_back(ep);
    std::sort(pool.begin(), pool.end(), [](const EvaluatedPrompt& a, const EvaluatedPrompt& b) {
        return a.prompt.id < b.prompt.id;
    });
    return pool;
}

/// Hypervolume of the non-dominated set of every candidate selected so far,
/// against the origin. The candidate pool only grows, so this series is
/// non-decreasing by construction.
double candidate_front_hypervolume(const EngineState& st) {
    const auto names = st.objective_names();
    if (names.size() > 3 || st.p_cands.empty()) return 0.0;
    const auto pool = dedup_candidates(st.p_cands);
    std::vector<ObjectiveVector> vectors;
    vectors.reserve(pool.size());
    for (const auto& ep : pool) vectors.push_back(ep.fitness);
    const auto fronts = fast_non_dominated_sort(vectors);
    std::vector<ObjectiveVector> front;
    for (std::size_t idx : fronts[0].member_indices) front.push_back(vectors[idx]);
    ObjectiveVector origin;
    origin.scores.assign(names.size(), 0.0);
    origin.objective_ids = names;
    return hypervolume(front, origin);
}

std::vector<EvaluatedPrompt> final_selection(const EngineState& st) {
    return pareto_selection(dedup_candidates(st.p_cands), st.config.generation_size,
                            st.config.top_n_per_objective);
}

void write_final(const EngineState& st, const std::vector<EvaluatedPrompt>& front) {
    json j;
    j["config_digest"] = st.digest;
    j["objectives"] = st.objective_names();
    json generations = json::array();
    for (const auto& record : st.records) generations.push_back(meta_to_json(record.meta, false));
    j["generations"] = generations;
    json front_json = json::array();
    for (const auto& ep : front) front_json.push_back(json::parse(store_evaluated(ep)));
    j["front"] = front_json;

    std::ofstream out(st.dir + "/final.json", std::ios::binary | std::ios::trunc);
    if (!out) throw CorruptState("cannot write " + st.dir + "/final.json");
    out << j.dump(1) << "\n";
}

RunResult finish(EngineState& st) {
    const auto front = final_selection(st);
    write_final(st, front);
    RunResult result;
    result.config = st.config;
    result.records = st.records;
    result.final_front = front;
    return result;
}

void require_valid(const RunConfig& config) {
    const auto violations = validate_config(config);
    if (!violations.empty()) {
        std::string message = "invalid configuration:";
        for (const auto& v : violations) message += "\n  - " + v;
        throw ConfigError(message);
    }
}

void init_state(EngineState& st, const RunConfig& config, Backends backends,
                const std::string& run_dir) {
    st.config = config;
    st.digest = config_digest(config);
    st.dir = run_dir;
    st.cache_enabled = all_backends_deterministic(config);
    install_counters(st, std::move(backends));
    init_pools(st);
}

// Reads records 0..k from disk; throws CorruptState on structural damage.
std::vector<GenerationRecord> load_records(const std::string& dir,
                                           const std::string& expected_digest) {
    std::vector<GenerationRecord> records;
    for (int gen = 0;; ++gen) {
        const std::string path = generation_file(dir, gen);
        if (!fs::exists(path)) break;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw CorruptState("cannot read " + path);
        std::string line;
        if (!std::getline(in, line))
            throw CorruptState("empty generation file " + path + "; last valid generation is " +
                               std::to_string(gen - 1));
        GenerationRecord record;
        try {
            const json meta_json = json::parse(line);
            if (meta_json.value("type", "") != "generation_meta")
                throw CorruptState("missing meta line");
            record.meta = meta_from_json(meta_json);
        } catch (const json::exception& e) {
            throw CorruptState("generation " + std::to_string(gen) + " meta unreadable (" +
                               e.what() + "); last valid generation is " +
                               std::to_string(gen - 1));
        }
        if (record.meta.config_digest != expected_digest)
            throw CorruptState("config digest mismatch for generation " + std::to_string(gen) +
                               "; refusing to resume with a modified config");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                record.population.push_back(load_evaluated(line));
            } catch (const CorruptState&) {
                throw CorruptState("generation " + std::to_string(gen) +
                                   " has a damaged prompt record; last valid generation is " +
                                   std::to_string(gen - 1));
            }
        }
        if (static_cast<int>(record.population.size()) != record.meta.population_size)
            throw CorruptState("generation " + std::to_string(gen) + " is truncated (" +
                               std::to_string(record.population.size()) + " of " +
                               std::to_string(record.meta.population_size) +
                               " records); last valid generation is " + std::to_string(gen - 1));
        records.push_back(std::move(record));
    }
    return records;
}

void restore_state(EngineState& st, std::vector<GenerationRecord> records) {
    st.records = std::move(records);
    for (const auto& record : st.records) {
        std::map<PromptId, const EvaluatedPrompt*> by_id;
        for (const auto& ep : record.population) {
            by_id[ep.prompt.id] = &ep;
            st.known_texts.insert(normalize_ws(ep.prompt.text));
            st.known_ids.insert(ep.prompt.id);
            if (st.cache_enabled)
                st.cache.emplace(normalize_ws(ep.prompt.text),
                                 std::make_pair(ep.fitness, ep.samples));
        }
        auto lookup = [&](const PromptId& id) -> const EvaluatedPrompt& {
            auto it = by_id.find(id);
            if (it == by_id.end())
                throw CorruptState("generation " + std::to_string(record.meta.generation) +
                                   " references unknown prompt " + id);
            return *it->second;
        };
        std::vector<EvaluatedPrompt> selection;
        for (const auto& ref : record.meta.selected) {
            EvaluatedPrompt ep = lookup(ref.id);
            ep.pareto_rank = ref.pareto_rank;
            ep.crowding = ref.crowding;
            selection.push_back(std::move(ep));
        }
        st.p_opt = selection;
        st.p_cands.insert(st.p_cands.end(), selection.begin(), selection.end());
        st.bests.clear();
        for (const auto& [name, ids] : record.meta.best_per_objective) {
            auto& prompts = st.bests[name];
            for (const auto& id : ids) prompts.push_back(lookup(id).prompt);
        }
        st.combine_pool = record.meta.combine_pool;
        st.paraphrase_pool = record.meta.paraphrase_pool;
        st.layer2_scores = record.meta.ledger;
        st.parents.clear();
        for (const auto& ep : selection) st.parents.push_back(ep.prompt);
    }
}

} // namespace

std::string generation_file(const std::string& run_dir, int generation) {
    char name[32];
    std::snprintf(name, sizeof(name), "gen-%04d.jsonl", generation);
    return run_dir + "/" + name;
}

RunResult run(const RunConfig& config, Backends backends, const std::string& run_dir,
              std::ostream* progress) {
    require_valid(config);
    fs::create_directories(run_dir);

    EngineState st;
    init_state(st, config, std::move(backends), run_dir);
    {
        std::ofstream out(run_dir + "/config.json", std::ios::binary | std::ios::trunc);
        if (!out) throw CorruptState("cannot write " + run_dir + "/config.json");
        out << store_config(config);
    }
    for (int gen = 0; gen < config.generations; ++gen) run_generation(st, gen, progress);
    return finish(st);
}

RunResult run(const RunConfig& config, const std::string& run_dir, std::ostream* progress) {
    return run(config, make_backends(config), run_dir, progress);
}

RunResult resume(const std::string& run_dir, std::ostream* progress) {
    const std::string config_path = run_dir + "/config.json";
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw CorruptState("no config.json in " + run_dir);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const RunConfig config = load_config(buffer.str());
    require_valid(config);

    EngineState st;
    init_state(st, config, make_backends(config), run_dir);
    restore_state(st, load_records(run_dir, st.digest));

    for (int gen = static_cast<int>(st.records.size()); gen < config.generations; ++gen)
        run_generation(st, gen, progress);
    return finish(st);
}

RunResult load_run(const std::string& run_dir) {
    const std::string config_path = run_dir + "/config.json";
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw CorruptState("no config.json in " + run_dir);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const RunConfig config = load_config(buffer.str());

    RunResult result;
    result.config = config;
    result.records = load_records(run_dir, config_digest(config));

    const std::string final_path = run_dir + "/final.json";
    std::ifstream final_in(final_path, std::ios::binary);
    if (!final_in) throw CorruptState("no final.json in " + run_dir);
    json j;
    try {
        final_in >> j;
        for (const auto& entry : j.at("front"))
            result.final_front.push_back(load_evaluated(entry.dump()));
    } catch (const json::exception& e) {
        throw CorruptState(std::string("final.json unreadable: ") + e.what());
    }
    return result;
}

RunConfig ablate(RunConfig config, const std::string& which) {
    if (which == "no_combine") {
        if (!config.ablation.enable_paraphrase)
            throw ConfigError("cannot disable combine: paraphrase is already disabled");
        config.ablation.enable_combine = false;
        return config;
    }
    if (which == "no_paraphrase") {
        if (!config.ablation.enable_combine)
            throw ConfigError("cannot disable paraphrase: combine is already disabled");
        config.ablation.enable_paraphrase = false;
        return config;
    }
    throw ContractViolation("ablate: unknown switch " + which);
}

} // namespace mopo
