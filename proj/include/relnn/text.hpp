// Tokenization, n-gram extraction and vocabulary handling for queries and
// item titles.

#ifndef RELNN_TEXT_HPP_
#define RELNN_TEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relnn {

// Joins the two halves of a bigram term. Never survives tokenization.
inline constexpr std::string_view kBigramSeparator = "\x01";

// Lowercases and splits on Unicode whitespace and punctuation. Every CJK
// codepoint becomes a token of its own. Malformed UTF-8 bytes act as
// separators.
std::vector<std::string> tokenize(std::string_view text);

// Unigrams in order, followed by adjacent bigrams.
std::vector<std::string> ngrams(std::span<const std::string> tokens);

struct TokenSeq {
  std::vector<std::uint32_t> ids;

  std::size_t token_count() const { return ids.size(); }
  bool operator==(const TokenSeq&) const = default;
};

// Dense, immutable term <-> id mapping. Id 0 is always "<OOV>".
class Vocab {
 public:
  static constexpr std::uint32_t kOovId = 0;
  static constexpr std::string_view kOovTerm = "<OOV>";

  Vocab();

  // Validates that terms[0] is "<OOV>" and that there are no duplicates.
  static Vocab from_terms(std::vector<std::string> terms);

  std::uint32_t id(std::string_view term) const;
  bool contains(std::string_view term) const;
  const std::string& term(std::uint32_t id) const { return terms_.at(id); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  bool operator==(const Vocab& other) const { return terms_ == other.terms_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

// "<OOV>" followed by the (max_size - 1) most frequent n-grams with count >=
// min_count. Ties put unigrams before bigrams, then order lexicographically.
Vocab build_vocab(std::span<const std::string> corpus, std::size_t max_size,
                  std::size_t min_count);

TokenSeq encode(std::string_view text, const Vocab& vocab);

// One term per line; line number is the id.
void write_vocab_file(const Vocab& vocab, const std::filesystem::path& path);
Vocab read_vocab_file(const std::filesystem::path& path);

}  // namespace relnn

#endif  // RELNN_TEXT_HPP_
