#include "mopo/report.hpp"

#include "mopo/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>

namespace mopo {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& value, char delimiter) {
    const bool needs_quotes = value.find(delimiter) != std::string::npos ||
                              value.find('"') != std::string::npos ||
                              value.find('\n') != std::string::npos;
    if (!needs_quotes) return value;
    std::string quoted = "\"";
    for (char c : value) {
        quoted += c;
        if (c == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

std::map<std::string, double> kind_shares(const std::vector<const Prompt*>& prompts) {
    std::map<std::string, double> shares;
    if (prompts.empty()) return shares;
    for (const Prompt* p : prompts) shares[to_string(p->operator_kind)] += 1.0;
    for (auto& [kind, count] : shares) count /= static_cast<double>(prompts.size());
    return shares;
}

} // namespace

ExportTable front_table(const RunResult& result, const std::string& sort_objective,
                        bool balanced) {
    ExportTable table;
    for (const auto& o : result.config.objectives) table.objective_names.push_back(o.name);

    int objective_index = -1;
    if (!sort_objective.empty()) {
        for (std::size_t j = 0; j < table.objective_names.size(); ++j)
            if (table.objective_names[j] == sort_objective) objective_index = static_cast<int>(j);
        if (objective_index < 0)
            throw ContractViolation("unknown objective: " + sort_objective);
    }

    for (const auto& ep : result.final_front) {
        ExportRow row;
        row.id = ep.prompt.id;
        row.text = ep.prompt.text;
        row.scores = ep.fitness.scores;
        row.average = ep.fitness.mean();
        row.min_score = ep.fitness.min_score();
        row.pareto_rank = ep.pareto_rank.value_or(0);
        row.operator_kind = to_string(ep.prompt.operator_kind);
        row.generation_born = ep.prompt.generation_born;
        table.rows.push_back(std::move(row));
    }

    auto tie_break = [](const ExportRow& a, const ExportRow& b) {
        if (a.average != b.average) return a.average > b.average;
        return a.id < b.id;
    };
    if (balanced) {
        std::sort(table.rows.begin(), table.rows.end(),
                  [&](const ExportRow& a, const ExportRow& b) {
                      if (a.min_score != b.min_score) return a.min_score > b.min_score;
                      return tie_break(a, b);
                  });
    } else if (objective_index >= 0) {
        std::sort(table.rows.begin(), table.rows.end(),
                  [&](const ExportRow& a, const ExportRow& b) {
                      if (a.scores[objective_index] != b.scores[objective_index])
                          return a.scores[objective_index] > b.scores[objective_index];
                      return tie_break(a, b);
                  });
    } else {
        std::sort(table.rows.begin(), table.rows.end(),
                  [&](const ExportRow& a, const ExportRow& b) {
                      if (a.pareto_rank != b.pareto_rank) return a.pareto_rank < b.pareto_rank;
                      return tie_break(a, b);
                  });
    }
    return table;
}

std::string table_to_csv(const ExportTable& table, char delimiter) {
    std::string out = "id";
    out += delimiter;
    out += "text";
    for (const auto& name : table.objective_names) {
        out += delimiter;
        out += csv_field(name, delimiter);
    }
    for (const char* column : {"average", "pareto_rank", "operator_kind", "generation_born"}) {
        out += delimiter;
        out += column;
    }
    out += '\n';
    for (const auto& row : table.rows) {
        out += csv_field(row.id, delimiter);
        out += delimiter;
        out += csv_field(row.text, delimiter);
        for (double s : row.scores) {
            out += delimiter;
            out += fmt17(s);
        }
        out += delimiter;
        out += fmt17(row.average);
        out += delimiter;
        out += std::to_string(row.pareto_rank);
        out += delimiter;
        out += row.operator_kind;
        out += delimiter;
        out += std::to_string(row.generation_born);
        out += '\n';
    }
    return out;
}

std::string table_to_json(const ExportTable& table) {
    json j;
    j["objectives"] = table.objective_names;
    json rows = json::array();
    for (const auto& row : table.rows) {
        rows.push_back(json{{"id", row.id},
                            {"text", row.text},
                            {"scores", row.scores},
                            {"average", row.average},
                            {"min_score", row.min_score},
                            {"pareto_rank", row.pareto_rank},
                            {"operator_kind", row.operator_kind},
                            {"generation_born", row.generation_born}});
    }
    j["rows"] = rows;
    return j.dump(1) + "\n";
}

std::map<std::string, double> operator_contribution_overall(const RunResult& result) {
    std::vector<const Prompt*> prompts;
    for (const auto& ep : result.final_front) prompts.push_back(&ep.prompt);
    return kind_shares(prompts);
}

std::vector<std::map<std::string, double>> operator_contribution_by_generation(
    const RunResult& result) {
    std::vector<std::map<std::string, double>> shares;
    for (const auto& record : result.records) {
        std::map<PromptId, const Prompt*> by_id;
        for (const auto& ep : record.population) by_id[ep.prompt.id] = &ep.prompt;
        std::vector<const Prompt*> selected;
        for (const auto& ref : record.meta.selected) {
            auto it = by_id.find(ref.id);
            if (it != by_id.end()) selected.push_back(it->second);
        }
        shares.push_back(kind_shares(selected));
    }
    return shares;
}

std::string stats_csv(const RunResult& result) {
    std::string out = "table,generation,key,value\n";
    auto row = [&](const std::string& table, const std::string& generation,
                   const std::string& key, const std::string& value) {
        out += csv_field(table, ',') + "," + generation + "," + csv_field(key, ',') + "," +
               value + "\n";
    };

    const auto per_generation = operator_contribution_by_generation(result);
    for (std::size_t g = 0; g < per_generation.size(); ++g)
        for (const auto& [kind, share] : per_generation[g])
            row("contribution", std::to_string(g), kind, fmt17(share));
    for (const auto& [kind, share] : operator_contribution_overall(result))
        row("contribution", "", kind, fmt17(share));

    std::vector<std::string> names;
    for (const auto& o : result.config.objectives) names.push_back(o.name);

    for (const auto& record : result.records) {
        const std::string g = std::to_string(record.meta.generation);
        for (std::size_t j = 0; j < names.size(); ++j)
            row("best_fitness", g, names[j], fmt17(record.meta.best_scores[j]));

        std::map<PromptId, const EvaluatedPrompt*> by_id;
        for (const auto& ep : record.population) by_id[ep.prompt.id] = &ep;
        std::vector<double> sums(names.size(), 0.0);
        std::size_t count = 0;
        for (const auto& ref : record.meta.selected) {
            auto it = by_id.find(ref.id);
            if (it == by_id.end()) continue;
            for (std::size_t j = 0; j < names.size(); ++j)
                sums[j] += it->second->fitness.scores[j];
            ++count;
        }
        for (std::size_t j = 0; j < names.size(); ++j)
            row("mean_fitness", g, names[j],
                fmt17(count ? sums[j] / static_cast<double>(count) : 0.0));

        row("hypervolume", g, "", fmt17(record.meta.front_metric));
        row("front_size", g, "", std::to_string(record.meta.selected.size()));

        for (const auto& [id, stats] : record.meta.ledger) {
            row("ledger", g, id + ".produced", std::to_string(stats.offspring_produced));
            row("ledger", g, id + ".selected", std::to_string(stats.offspring_selected));
            row("ledger", g, id + ".mean_fitness", fmt17(stats.mean_offspring_fitness));
        }
    }
    return out;
}

} // namespace mopo
