#pragma once

#include <string>
#include <vector>

namespace mopo {

/// Marker literals shared across layers.
inline constexpr const char* kEmotionSlot = "<em>";
inline constexpr const char* kSentence1 = "SENTENCE_1";
inline constexpr const char* kSentence2 = "SENTENCE_2";
inline constexpr const char* kMaskToken = "<mask>";

/// Split on Unicode whitespace (UTF-8 aware). Adjacent separators collapse.
std::vector<std::string> split_ws(const std::string& text);

std::string join_ws(const std::vector<std::string>& tokens);

/// Collapse whitespace runs to single spaces and trim the ends.
std::string normalize_ws(const std::string& text);

/// ASCII lowercase copy.
std::string fold_case(const std::string& text);

/// Case-folded whitespace tokens.
std::vector<std::string> fold_tokens(const std::string& text);

bool contains(const std::string& haystack, const std::string& needle);

/// Replace every occurrence of `from` with `to`.
std::string replace_all(std::string text, const std::string& from, const std::string& to);

std::size_t count_occurrences(const std::string& haystack, const std::string& needle);

} // namespace mopo
