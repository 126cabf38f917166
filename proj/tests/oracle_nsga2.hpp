#pragma once

// Brute-force NSGA-II reference used to cross-check the library. Written as a
// separate code path on purpose: rank assignment peels non-dominated sets
// iteratively instead of using Deb's bookkeeping, and crowding/selection are
// recomputed from first principles.

#include "mopo/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool any_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) any_better = true;
    }
    return any_better;
}

/// Rank per member by repeatedly peeling the currently non-dominated set.
inline std::vector<int> ranks(const std::vector<std::vector<double>>& pop) {
    std::vector<int> rank(pop.size(), -1);
    int level = 0;
    std::size_t assigned = 0;
    while (assigned < pop.size()) {
        std::vector<std::size_t> layer;
        for (std::size_t p = 0; p < pop.size(); ++p) {
            if (rank[p] != -1) continue;
            bool dominated = false;
            for (std::size_t q = 0; q < pop.size(); ++q) {
                if (q == p || rank[q] != -1) continue;
                if (dominates(pop[q], pop[p])) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) layer.push_back(p);
        }
        for (std::size_t p : layer) rank[p] = level;
        assigned += layer.size();
        ++level;
    }
    return rank;
}

/// Crowding across one front: extremes (per objective with spread) get
/// infinity; interior members sum normalized gaps between the nearest distinct
/// values; zero-spread objectives contribute nothing; fronts of size <= 2 are
/// all infinite.
inline std::vector<double> crowding(const std::vector<std::vector<double>>& front) {
    const double inf = std::numeric_limits<double>::infinity();
    if (front.size() <= 2) return std::vector<double>(front.size(), inf);
    std::vector<double> dist(front.size(), 0.0);
    const std::size_t m = front[0].size();
    for (std::size_t j = 0; j < m; ++j) {
        std::set<double> values;
        for (const auto& v : front) values.insert(v[j]);
        if (values.size() < 2) continue;
        const double lo = *values.begin();
        const double hi = *values.rbegin();
        for (std::size_t i = 0; i < front.size(); ++i) {
            const double v = front[i][j];
            if (v == lo || v == hi) {
                dist[i] = inf;
                continue;
            }
            if (std::isinf(dist[i])) continue;
            auto it = values.find(v);
            auto above = std::next(it);
            auto below = std::prev(it);
            dist[i] += (*above - *below) / (hi - lo);
        }
    }
    return dist;
}

struct Member {
    std::string id;
    std::vector<double> scores;
};

/// Reference selection: rank fill, crowding truncation, per-objective top-n
/// augmentation. Returns the ordered id list the library is expected to emit.
inline std::vector<std::string> selection_ids(const std::vector<Member>& pop, int G, int top_n) {
    std::vector<std::vector<double>> vectors;
    for (const auto& mbr : pop) vectors.push_back(mbr.scores);
    const auto rank = ranks(vectors);
    const int max_rank = *std::max_element(rank.begin(), rank.end());

    std::vector<double> crowd(pop.size(), 0.0);
    for (int r = 0; r <= max_rank; ++r) {
        std::vector<std::size_t> members;
        std::vector<std::vector<double>> front;
        for (std::size_t i = 0; i < pop.size(); ++i)
            if (rank[i] == r) {
                members.push_back(i);
                front.push_back(vectors[i]);
            }
        const auto d = crowding(front);
        for (std::size_t k = 0; k < members.size(); ++k) crowd[members[k]] = d[k];
    }

    const std::size_t budget = std::min<std::size_t>(static_cast<std::size_t>(G), pop.size());
    std::vector<std::size_t> order(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rank[a] != rank[b]) return rank[a] < rank[b];
        if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
        return pop[a].id < pop[b].id;
    });
    std::vector<std::size_t> picked(order.begin(), order.begin() + budget);

    std::set<std::size_t> chosen(picked.begin(), picked.end());
    std::vector<std::size_t> elites;
    const std::size_t m = vectors.empty() ? 0 : vectors[0].size();
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < pop.size(); ++i)
            if (!chosen.count(i)) rest.push_back(i);
        std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
            if (vectors[a][j] != vectors[b][j]) return vectors[a][j] > vectors[b][j];
            return pop[a].id < pop[b].id;
        });
        for (int t = 0; t < top_n && static_cast<std::size_t>(t) < rest.size(); ++t) {
            elites.push_back(rest[t]);
            chosen.insert(rest[t]);
        }
    }

    std::vector<std::string> ids;
    for (std::size_t i : picked) ids.push_back(pop[i].id);
    for (std::size_t i : elites) ids.push_back(pop[i].id);
    return ids;
}

} // namespace oracle
