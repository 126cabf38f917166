#include "mopo/genetic.hpp"

#include "mopo/errors.hpp"
#include "mopo/log.hpp"
#include "mopo/text.hpp"

#include <algorithm>
#include <iostream>

namespace mopo {

namespace {

bool token_protected(const std::string& tok) { return contains(tok, kEmotionSlot); }

std::int64_t derived_seed(std::uint64_t run_seed, const std::string& tag, int generation,
                          const std::string& a, const std::string& b = "") {
    return static_cast<std::int64_t>(
        fnv1a64(to_hex16(run_seed) + "|" + tag + "|" + std::to_string(generation) + "|" + a +
                "|" + b));
}

} // namespace

int mutate_layer2(std::vector<Prompt>& pool, const std::vector<Prompt>& fixed,
                  TextGenerator& generator, SplitMix64& rng, std::uint64_t run_seed,
                  int generation) {
    if (pool.empty() || fixed.empty())
        throw ContractViolation("mutate_layer2: empty pool or fixed prompt list");

    std::set<std::string> pool_texts;
    for (const auto& p : pool) pool_texts.insert(normalize_ws(p.text));

    const std::size_t original_size = pool.size();
    int appended = 0;
    for (std::size_t i = 0; i < original_size; ++i) {
        const Prompt& member = pool[i];
        const Prompt& fix = fixed[rng.below(fixed.size())];

        GenerateRequest request;
        request.prompt = replace_all(fix.text, kSentence1, member.text);
        request.n = 1;
        request.seed = derived_seed(run_seed, "mutate", generation, fix.id, member.id);
        std::string candidate;
        try {
            auto response = generator.generate(request);
            if (!response.texts.empty()) candidate = response.texts.front();
        } catch (const BackendError& e) {
            if (log_on(LogLevel::Info))
                std::cerr << "[mopo] layer-2 mutation skipped for " << member.id << ": "
                          << e.what() << "\n";
            continue;
        }

        const bool needs_second = member.layer == PromptLayer::Layer2Combine;
        if (!contains(candidate, kSentence1)) continue;
        if (needs_second && !contains(candidate, kSentence2)) continue;
        const std::string norm = normalize_ws(candidate);
        if (norm.empty() || pool_texts.count(norm)) continue;

        Prompt mutant;
        mutant.id = derive_prompt_id(run_seed, generation, fix.id, {member.id}, 0);
        mutant.layer = member.layer;
        mutant.text = candidate;
        mutant.generation_born = generation;
        mutant.lineage = {member.id};
        mutant.operator_id = fix.id;
        mutant.operator_kind = OperatorKind::SentenceParaphrase;
        pool_texts.insert(norm);
        pool.push_back(std::move(mutant));
        ++appended;
    }
    return appended;
}

std::vector<std::pair<Prompt, Prompt>> pair_sample(
    const std::map<std::string, std::vector<Prompt>>& best_per_objective,
    const std::vector<std::string>& objective_order) {
    std::vector<std::pair<Prompt, Prompt>> pairs;
    std::set<std::pair<PromptId, PromptId>> seen;

    for (std::size_t a = 0; a < objective_order.size(); ++a) {
        auto it_a = best_per_objective.find(objective_order[a]);
        if (it_a == best_per_objective.end()) continue;
        for (std::size_t b = a + 1; b < objective_order.size(); ++b) {
            auto it_b = best_per_objective.find(objective_order[b]);
            if (it_b == best_per_objective.end()) continue;
            for (const auto& first : it_a->second) {
                for (const auto& second : it_b->second) {
                    if (first.id == second.id) continue;
                    auto key = std::minmax(first.id, second.id);
                    if (!seen.insert(key).second) continue;
                    pairs.emplace_back(first, second);
                }
            }
        }
    }
    return pairs;
}

namespace {

/// Shared acceptance path for generated Layer-1 offspring.
bool accept_layer1(const std::string& candidate, std::set<std::string>& known_texts) {
    if (!contains(candidate, kEmotionSlot)) return false;
    const std::string norm = normalize_ws(candidate);
    if (norm.empty() || known_texts.count(norm)) return false;
    known_texts.insert(norm);
    return true;
}

} // namespace

std::vector<Prompt> combine(const std::vector<std::pair<Prompt, Prompt>>& pairs,
                            const std::vector<Prompt>& combine_prompts, int offspring_count,
                            TextGenerator& generator, std::uint64_t run_seed, int generation,
                            std::set<std::string>& known_texts, Layer2Ledger& ledger) {
    if (offspring_count < 1) throw ContractViolation("combine: offspring count < 1");

    std::vector<Prompt> offspring;
    for (const auto& [first, second] : pairs) {
        for (const auto& op : combine_prompts) {
            GenerateRequest request;
            request.prompt = replace_all(
                replace_all(op.text, kSentence1, first.text), kSentence2, second.text);
            request.n = offspring_count;
            request.seed =
                derived_seed(run_seed, "combine", generation, op.id, first.id + "+" + second.id);

            GenerateResponse response;
            try {
                response = generator.generate(request);
            } catch (const BackendError& e) {
                if (log_on(LogLevel::Info))
                    std::cerr << "[mopo] combine cell skipped (" << first.id << "," << second.id
                              << ") x " << op.id << ": " << e.what() << "\n";
                continue;
            }
            for (std::size_t k = 0; k < response.texts.size(); ++k) {
                const std::string& candidate = response.texts[k];
                if (!accept_layer1(candidate, known_texts)) continue;
                Prompt child;
                child.id = derive_prompt_id(run_seed, generation, op.id, {first.id, second.id},
                                            static_cast<int>(k));
                child.layer = PromptLayer::Layer1;
                child.text = candidate;
                child.generation_born = generation;
                child.lineage = {first.id, second.id};
                child.operator_id = op.id;
                child.operator_kind = OperatorKind::Combine;
                offspring.push_back(std::move(child));
                ++ledger[op.id].offspring_produced;
            }
        }
    }
    return offspring;
}

std::vector<Prompt> sentence_paraphrase(const Prompt& parent,
                                        const std::vector<Prompt>& paraphrase_prompts,
                                        int offspring_count, TextGenerator& generator,
                                        std::uint64_t run_seed, int generation,
                                        std::set<std::string>& known_texts,
                                        Layer2Ledger& ledger) {
    if (offspring_count < 1) throw ContractViolation("sentence_paraphrase: offspring count < 1");

    std::vector<Prompt> offspring;
    for (const auto& op : paraphrase_prompts) {
        GenerateRequest request;
        request.prompt = replace_all(op.text, kSentence1, parent.text);
        request.n = offspring_count;
        request.seed = derived_seed(run_seed, "paraphrase", generation, op.id, parent.id);

        GenerateResponse response;
        try {
            response = generator.generate(request);
        } catch (const BackendError& e) {
            if (log_on(LogLevel::Info))
                std::cerr << "[mopo] paraphrase cell skipped " << parent.id << " x " << op.id
                          << ": " << e.what() << "\n";
            continue;
        }
        for (std::size_t k = 0; k < response.texts.size(); ++k) {
            const std::string& candidate = response.texts[k];
            if (!accept_layer1(candidate, known_texts)) continue;
            Prompt child;
            child.id =
                derive_prompt_id(run_seed, generation, op.id, {parent.id}, static_cast<int>(k));
            child.layer = PromptLayer::Layer1;
            child.text = candidate;
            child.generation_born = generation;
            child.lineage = {parent.id};
            child.operator_id = op.id;
            child.operator_kind = OperatorKind::SentenceParaphrase;
            offspring.push_back(std::move(child));
            ++ledger[op.id].offspring_produced;
        }
    }
    return offspring;
}

std::vector<Prompt> word_paraphrase(const Prompt& parent, int offspring_count,
                                    TokenSuggester& suggester, SplitMix64& rng,
                                    std::uint64_t run_seed, int generation,
                                    std::set<std::string>& known_texts) {
    const auto base_tokens = split_ws(parent.text);
    if (base_tokens.size() < 2)
        throw ContractViolation("word_paraphrase: parent must have at least two tokens");

    std::vector<std::size_t> mutable_positions;
    for (std::size_t i = 0; i < base_tokens.size(); ++i)
        if (!token_protected(base_tokens[i])) mutable_positions.push_back(i);

    std::vector<Prompt> offspring;
    for (int v = 0; v < offspring_count; ++v) {
        auto tokens = base_tokens;
        int op = static_cast<int>(rng.below(3)); // 0 add, 1 remove, 2 replace
        if (mutable_positions.empty() && op != 0) op = 0;

        OperatorKind kind = OperatorKind::WordAdd;
        bool ok = true;

        auto do_remove = [&]() {
            const std::size_t pos = mutable_positions[rng.below(mutable_positions.size())];
            tokens.erase(tokens.begin() + pos);
            kind = OperatorKind::WordRemove;
            ok = tokens.size() >= 2;
        };

        if (op == 0) {
            const std::size_t pos = rng.below(tokens.size() + 1);
            std::vector<std::string> masked = tokens;
            masked.insert(masked.begin() + pos, kMaskToken);
            try {
                const auto token = suggester.suggest(SuggestRequest{join_ws(masked)}).token;
                tokens.insert(tokens.begin() + pos, token);
                kind = OperatorKind::WordAdd;
            } catch (const BackendError&) {
                if (mutable_positions.empty()) {
                    ok = false;
                } else {
                    do_remove();
                }
            }
        } else if (op == 1) {
            do_remove();
        } else {
            const std::size_t pos = mutable_positions[rng.below(mutable_positions.size())];
            std::vector<std::string> masked = tokens;
            masked[pos] = kMaskToken;
            try {
                const auto token = suggester.suggest(SuggestRequest{join_ws(masked)}).token;
                tokens[pos] = token;
                kind = OperatorKind::WordReplace;
            } catch (const BackendError&) {
                do_remove();
            }
        }

        if (!ok) continue;
        const std::string candidate = join_ws(tokens);
        if (!accept_layer1(candidate, known_texts)) continue;

        Prompt child;
        child.id = derive_prompt_id(run_seed, generation, "word", {parent.id}, v);
        child.layer = PromptLayer::Layer1;
        child.text = candidate;
        child.generation_born = generation;
        child.lineage = {parent.id};
        child.operator_kind = kind;
        offspring.push_back(std::move(child));
    }
    return offspring;
}

std::vector<Prompt> select_layer2(const std::vector<Prompt>& pool, const Layer2Ledger& ledger,
                                  int keep) {
    if (keep < 1) throw ContractViolation("select_layer2: keep < 1");

    auto stats_of = [&](const Prompt& p) {
        auto it = ledger.find(p.id);
        return it == ledger.end() ? Layer2Stats{} : it->second;
    };

    std::vector<Prompt> ranked = pool;
    std::sort(ranked.begin(), ranked.end(), [&](const Prompt& a, const Prompt& b) {
        const auto sa = stats_of(a);
        const auto sb = stats_of(b);
        if (sa.offspring_selected != sb.offspring_selected)
            return sa.offspring_selected > sb.offspring_selected;
        if (sa.mean_offspring_fitness != sb.mean_offspring_fitness)
            return sa.mean_offspring_fitness > sb.mean_offspring_fitness;
        return a.id < b.id;
    });
    if (ranked.size() > static_cast<std::size_t>(keep)) ranked.resize(keep);
    return ranked;
}

} // namespace mopo
