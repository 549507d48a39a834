#pragma once

#include <cctype>
#include <string>
#include <vector>

namespace claimgat {

constexpr const char* kUrlToken = "<url>";
constexpr const char* kMentionToken = "<mention>";
constexpr const char* kEmptyToken = "<empty>";

namespace detail {

inline bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

inline bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '\'' || c >= 0x80;  // keep non-ASCII bytes inside words
}

}  // namespace detail

// Rule-based tokenizer: lowercase, whitespace split, URLs and @-mentions
// collapsed to sentinel tokens, punctuation split into single-char tokens.
// Output is capped at max_tokens; empty text yields one <empty> token.
inline std::vector<std::string> tokenize(const std::string& text, std::size_t max_tokens = 50) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t len = text.size();
  while (i < len && tokens.size() < max_tokens) {
    while (i < len && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= len) break;
    std::size_t j = i;
    while (j < len && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string chunk = text.substr(i, j - i);
    i = j;
    if (detail::starts_with(chunk, "http://") || detail::starts_with(chunk, "https://") ||
        detail::starts_with(chunk, "www.")) {
      tokens.push_back(kUrlToken);
      continue;
    }
    if (chunk.size() > 1 && chunk[0] == '@') {
      tokens.push_back(kMentionToken);
      continue;
    }
    std::string word;
    for (char ch : chunk) {
      const auto uc = static_cast<unsigned char>(ch);
      if (detail::is_word_char(uc)) {
        word.push_back(static_cast<char>(std::tolower(uc)));
      } else {
        if (!word.empty() && tokens.size() < max_tokens) {
          tokens.push_back(word);
          word.clear();
        }
        if (tokens.size() < max_tokens) tokens.push_back(std::string(1, ch));
      }
      if (tokens.size() >= max_tokens) break;
    }
    if (!word.empty() && tokens.size() < max_tokens) tokens.push_back(word);
  }
  if (tokens.empty()) tokens.push_back(kEmptyToken);
  return tokens;
}

}  // namespace claimgat
