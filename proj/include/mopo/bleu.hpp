#pragma once

#include <string>
#include <vector>

namespace mopo {

/// Sentence-level BLEU with no smoothing.
///
/// Geometric mean of modified n-gram precisions for n = 1..min(4, |candidate|),
/// times the brevity penalty exp(1 - r/c) when the candidate is shorter than
/// the reference. Any zero precision makes the whole score 0.
double sentence_bleu(const std::vector<std::string>& candidate,
                     const std::vector<std::string>& reference);

/// Case-folds and whitespace-tokenizes both sides, then scores.
double sentence_bleu(const std::string& candidate, const std::string& reference);

} // namespace mopo
