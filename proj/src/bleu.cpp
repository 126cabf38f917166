#include "mopo/bleu.hpp"

#include "mopo/errors.hpp"
#include "mopo/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mopo {

namespace {

std::map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
    std::map<std::string, int> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram;
        for (std::size_t k = 0; k < n; ++k) {
            if (k) gram += '\x1f';
            gram += tokens[i + k];
        }
        ++counts[gram];
    }
    return counts;
}

} // namespace

double sentence_bleu(const std::vector<std::string>& candidate,
                     const std::vector<std::string>& reference) {
    if (candidate.empty() || reference.empty())
        throw ContractViolation("sentence_bleu: empty candidate or reference");

    const std::size_t c = candidate.size();
    const std::size_t r = reference.size();
    const std::size_t max_n = std::min<std::size_t>(4, c);

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto cand_counts = ngram_counts(candidate, n);
        const auto ref_counts = ngram_counts(reference, n);
        long matches = 0;
        long total = 0;
        for (const auto& [gram, count] : cand_counts) {
            total += count;
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matches += std::min(count, it->second);
        }
        if (matches == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matches) / static_cast<double>(total));
    }

    double brevity = 1.0;
    if (c < r) brevity = std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return brevity * std::exp(log_sum / static_cast<double>(max_n));
}

double sentence_bleu(const std::string& candidate, const std::string& reference) {
    return sentence_bleu(fold_tokens(candidate), fold_tokens(reference));
}

} // namespace mopo
