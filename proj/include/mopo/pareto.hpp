#pragma once

#include "mopo/core.hpp"

#include <cstddef>
#include <vector>

namespace mopo {

/// One rank class of a non-dominated sort. Rank-0 members are dominated by
/// nobody; members of rank r are dominated only by members of ranks < r.
struct Front {
    int rank = 0;
    std::vector<std::size_t> member_indices;
};

/// True iff `a` is at least as good as `b` on every objective and strictly
/// better on at least one.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Deb-style fast non-dominated sort. Every index lands in exactly one front;
/// ranks are dense from 0.
std::vector<Front> fast_non_dominated_sort(const std::vector<ObjectiveVector>& population);

/// NSGA-II crowding distance over one front.
///
/// Per objective, the members holding the extreme values receive the infinity
/// sentinel and interior members accumulate the gap between the nearest
/// distinct values above and below, normalized by the front's range. An
/// objective with zero range contributes nothing. Depends only on the vector
/// values, so the result is equivariant under permutation of the front.
std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front_objectives);

/// NSGA-II generation selection: fill by ascending rank, break the last front
/// by descending crowding distance, down to min(G, population). Then, for each
/// objective, append the `top_n` best scorers on that objective that were left
/// out. Returned prompts carry pareto_rank and crowding; ordering is
/// deterministic (rank asc, crowding desc, id asc; elites by objective order).
std::vector<EvaluatedPrompt> pareto_selection(const std::vector<EvaluatedPrompt>& evaluated,
                                              int generation_size, int top_n);

/// Lebesgue measure of the union of boxes [reference, point]. Supports 1-3
/// dimensions; every point must be >= the reference componentwise.
double hypervolume(const std::vector<ObjectiveVector>& front, const ObjectiveVector& reference);

} // namespace mopo
