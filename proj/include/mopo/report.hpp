#pragma once

#include "mopo/engine.hpp"

#include <map>
#include <string>
#include <vector>

namespace mopo {

struct ExportRow {
    PromptId id;
    std::string text;
    std::vector<double> scores;
    double average = 0.0;
    double min_score = 0.0;
    int pareto_rank = 0;
    std::string operator_kind;
    int generation_born = 0;
};

struct ExportTable {
    std::vector<std::string> objective_names;
    std::vector<ExportRow> rows;
};

/// Final front as an export table. Default order is (rank asc, avg desc,
/// id asc); `sort_objective` orders by one objective's score descending;
/// `balanced` orders by the minimum objective score descending.
ExportTable front_table(const RunResult& result, const std::string& sort_objective = "",
                        bool balanced = false);

/// Pinned CSV dialect: chosen delimiter, quote-doubling, LF line endings.
std::string table_to_csv(const ExportTable& table, char delimiter);
std::string table_to_json(const ExportTable& table);

/// Fraction of final-front members per operator kind.
std::map<std::string, double> operator_contribution_overall(const RunResult& result);

/// Fraction of each generation's selected set per operator kind.
std::vector<std::map<std::string, double>> operator_contribution_by_generation(
    const RunResult& result);

/// Long-format CSV (table,generation,key,value) with operator contribution
/// shares, per-generation best/mean fitness per objective, the hypervolume
/// series, and the Layer-2 ledger history.
std::string stats_csv(const RunResult& result);

} // namespace mopo
