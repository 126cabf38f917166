#include "mopo/pareto.hpp"

#include "mopo/errors.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace mopo {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.scores.size() != b.scores.size())
        throw ContractViolation("dominates: objective vectors of unequal length");
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        if (a.scores[i] < b.scores[i]) return false;
        if (a.scores[i] > b.scores[i]) strictly_better = true;
    }
    return strictly_better;
}

std::vector<Front> fast_non_dominated_sort(const std::vector<ObjectiveVector>& population) {
    const std::size_t n = population.size();
    if (n == 0) throw ContractViolation("fast_non_dominated_sort: empty population");

    std::vector<std::vector<std::size_t>> dominated_by(n); // indices p dominates
    std::vector<int> domination_count(n, 0);

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(population[p], population[q])) {
                dominated_by[p].push_back(q);
                ++domination_count[q];
            } else if (dominates(population[q], population[p])) {
                dominated_by[q].push_back(p);
                ++domination_count[p];
            }
        }
    }

    std::vector<Front> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p)
        if (domination_count[p] == 0) current.push_back(p);

    int rank = 0;
    while (!current.empty()) {
        fronts.push_back(Front{rank, current});
        std::vector<std::size_t> next;
        for (std::size_t p : current) {
            for (std::size_t q : dominated_by[p]) {
                if (--domination_count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
        ++rank;
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front) {
    const std::size_t n = front.size();
    if (n == 0) throw ContractViolation("crowding_distance: empty front");
    if (n <= 2) return std::vector<double>(n, kInf);

    const std::size_t m = front[0].scores.size();
    std::vector<double> dist(n, 0.0);

    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = front[i].scores[j];

        std::vector<double> distinct = values;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

        const double lo = distinct.front();
        const double hi = distinct.back();
        const double range = hi - lo;
        if (range <= 0.0) continue; // degenerate objective: no contribution

        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] == kInf) continue;
            const double v = values[i];
            if (v == lo || v == hi) {
                dist[i] = kInf;
                continue;
            }
            auto it = std::lower_bound(distinct.begin(), distinct.end(), v);
            const double below = *(it - 1);
            const double above = *(it + 1);
            dist[i] += (above - below) / range;
        }
    }
    return dist;
}

std::vector<EvaluatedPrompt> pareto_selection(const std::vector<EvaluatedPrompt>& evaluated,
                                              int generation_size, int top_n) {
    if (evaluated.empty()) throw ContractViolation("pareto_selection: empty population");
    if (generation_size < 1) throw ContractViolation("pareto_selection: generation size < 1");

    std::vector<ObjectiveVector> vectors;
    vectors.reserve(evaluated.size());
    for (const auto& ep : evaluated) vectors.push_back(ep.fitness);

    const auto fronts = fast_non_dominated_sort(vectors);

    std::vector<int> rank_of(evaluated.size(), 0);
    std::vector<double> crowding_of(evaluated.size(), 0.0);
    for (const auto& front : fronts) {
        std::vector<ObjectiveVector> front_vectors;
        front_vectors.reserve(front.member_indices.size());
        for (std::size_t idx : front.member_indices) front_vectors.push_back(vectors[idx]);
        const auto dist = crowding_distance(front_vectors);
        for (std::size_t k = 0; k < front.member_indices.size(); ++k) {
            rank_of[front.member_indices[k]] = front.rank;
            crowding_of[front.member_indices[k]] = dist[k];
        }
    }

    const std::size_t budget =
        std::min<std::size_t>(static_cast<std::size_t>(generation_size), evaluated.size());

    std::vector<std::size_t> selected;
    selected.reserve(budget);
    for (const auto& front : fronts) {
        if (selected.size() >= budget) break;
        auto members = front.member_indices;
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            if (crowding_of[a] != crowding_of[b]) return crowding_of[a] > crowding_of[b];
            return evaluated[a].prompt.id < evaluated[b].prompt.id;
        });
        for (std::size_t idx : members) {
            if (selected.size() >= budget) break;
            selected.push_back(idx);
        }
    }

    std::set<std::size_t> chosen(selected.begin(), selected.end());

    // Elite augmentation: the best scorers per objective that missed the cut
    // still enter the output so their traits stay breedable.
    const std::size_t m = vectors[0].scores.size();
    std::vector<std::size_t> elites;
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < evaluated.size(); ++i)
            if (!chosen.count(i)) candidates.push_back(i);
        std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
            if (vectors[a].scores[j] != vectors[b].scores[j])
                return vectors[a].scores[j] > vectors[b].scores[j];
            return evaluated[a].prompt.id < evaluated[b].prompt.id;
        });
        for (int t = 0; t < top_n && static_cast<std::size_t>(t) < candidates.size(); ++t) {
            elites.push_back(candidates[t]);
            chosen.insert(candidates[t]);
        }
    }

    std::vector<EvaluatedPrompt> result;
    result.reserve(selected.size() + elites.size());
    for (std::size_t idx : selected) {
        EvaluatedPrompt ep = evaluated[idx];
        ep.pareto_rank = rank_of[idx];
        ep.crowding = crowding_of[idx];
        result.push_back(std::move(ep));
    }
    for (std::size_t idx : elites) {
        EvaluatedPrompt ep = evaluated[idx];
        ep.pareto_rank = rank_of[idx];
        ep.crowding = crowding_of[idx];
        result.push_back(std::move(ep));
    }
    return result;
}

namespace {

// 2D union area of boxes [0, x] x [0, y]: descending-x sweep. Between two
// consecutive x cuts the union's height is the best y seen so far.
double staircase_area(std::vector<std::pair<double, double>> points) {
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });
    double area = 0.0, best_y = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double next_x = (i + 1 < points.size()) ? points[i + 1].first : 0.0;
        best_y = std::max(best_y, points[i].second);
        area += (points[i].first - next_x) * best_y;
    }
    return area;
}

} // namespace

double hypervolume(const std::vector<ObjectiveVector>& front, const ObjectiveVector& reference) {
    if (front.empty()) return 0.0;
    const std::size_t m = reference.scores.size();
    if (m < 1 || m > 3) throw ContractViolation("hypervolume: supports 1-3 objectives");

    for (const auto& p : front) {
        if (p.scores.size() != m)
            throw ContractViolation("hypervolume: point dimension mismatch");
        for (std::size_t j = 0; j < m; ++j)
            if (p.scores[j] < reference.scores[j])
                throw ContractViolation("hypervolume: point below reference");
    }

    if (m == 1) {
        double best = 0.0;
        for (const auto& p : front) best = std::max(best, p.scores[0] - reference.scores[0]);
        return best;
    }

    if (m == 2) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(front.size());
        for (const auto& p : front)
            pts.emplace_back(p.scores[0] - reference.scores[0], p.scores[1] - reference.scores[1]);
        return staircase_area(std::move(pts));
    }

    // 3D: sweep z levels downward; each slab contributes the 2D staircase area
    // of the points at or above the level.
    std::vector<double> levels;
    for (const auto& p : front) levels.push_back(p.scores[2] - reference.scores[2]);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    double volume = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double level = levels[k];
        const double next = (k + 1 < levels.size()) ? levels[k + 1] : 0.0;
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : front) {
            if (p.scores[2] - reference.scores[2] >= level)
                pts.emplace_back(p.scores[0] - reference.scores[0],
                                 p.scores[1] - reference.scores[1]);
        }
        volume += staircase_area(std::move(pts)) * (level - next);
    }
    return volume;
}

} // namespace mopo
