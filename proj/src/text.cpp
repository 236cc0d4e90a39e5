#include "relnn/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace relnn {
namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one codepoint starting at text[pos] and advances pos. Returns
// kInvalid for malformed sequences (pos still advances by one byte).
char32_t next_codepoint(std::string_view text, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + len > text.size()) {
    ++pos;
    return kInvalid;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto cont = static_cast<unsigned char>(text[pos + i]);
    if ((cont & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  // Reject overlong forms, surrogates and out-of-range values.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kInvalid;
  }
  pos += len;
  return cp;
}

void append_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return (cp >= 0x2000 && cp <= 0x200B) || cp < 0x20 || cp == 0x7F;
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  return (cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 ||
         (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
         (cp >= 0x3014 && cp <= 0x301F) || (cp >= 0xFE10 && cp <= 0xFE1F) ||
         (cp >= 0xFE30 && cp <= 0xFE4F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65);
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x20000 && cp <= 0x2FA1F) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0x31F0 && cp <= 0x31FF) ||
         (cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0x1100 && cp <= 0x11FF) ||
         (cp >= 0x3130 && cp <= 0x318F);
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0x80) return cp;
  // Latin-1 supplement.
  if ((cp >= 0xC0 && cp <= 0xDE) && cp != 0xD7) return cp + 32;
  // Latin Extended-A: alternating upper/lower pairs.
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  // Greek.
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  // Cyrillic.
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  // Fullwidth Latin.
  if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 32;
  return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::exchange(current, {}));
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = next_codepoint(text, pos);
    if (cp == kInvalid || is_space(cp) || is_punct(cp)) {
      flush();
    } else if (is_cjk(cp)) {
      flush();
      append_utf8(cp, current);
      flush();
    } else {
      append_utf8(to_lower(cp), current);
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens) {
  std::vector<std::string> terms(tokens.begin(), tokens.end());
  if (tokens.size() > 1) terms.reserve(2 * tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    std::string bigram;
    bigram.reserve(tokens[i].size() + 1 + tokens[i + 1].size());
    bigram.append(tokens[i]).append(kBigramSeparator).append(tokens[i + 1]);
    terms.push_back(std::move(bigram));
  }
  return terms;
}

Vocab::Vocab() : terms_{std::string(kOovTerm)} { index_.emplace(kOovTerm, kOovId); }

Vocab Vocab::from_terms(std::vector<std::string> terms) {
  if (terms.empty() || terms.front() != kOovTerm) {
    throw std::invalid_argument("vocab must start with the <OOV> term");
  }
  Vocab vocab;
  vocab.terms_ = std::move(terms);
  vocab.index_.clear();
  vocab.index_.reserve(vocab.terms_.size());
  for (std::uint32_t id = 0; id < vocab.terms_.size(); ++id) {
    if (!vocab.index_.emplace(vocab.terms_[id], id).second) {
      throw std::invalid_argument("duplicate vocab term at id " +
                                  std::to_string(id));
    }
  }
  return vocab;
}

std::uint32_t Vocab::id(std::string_view term) const {
  const auto it = index_.find(term);
  return it == index_.end() ? kOovId : it->second;
}

bool Vocab::contains(std::string_view term) const {
  return index_.find(term) != index_.end();
}

Vocab build_vocab(std::span<const std::string> corpus, std::size_t max_size,
                  std::size_t min_count) {
  if (max_size < 1) throw std::invalid_argument("max_size must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& term : ngrams(tokenize(text))) ++counts[std::move(term)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  ranked.reserve(counts.size());
  for (auto& [term, count] : counts) {
    if (count >= min_count && term != Vocab::kOovTerm) {
      ranked.emplace_back(term, count);
    }
  }
  // Count descending, then unigrams before bigrams, then bytewise.
  const auto is_bigram = [](const std::string& term) {
    return term.find(kBigramSeparator) != std::string::npos;
  };
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    const bool ab = is_bigram(a.first), bb = is_bigram(b.first);
    if (ab != bb) return bb;
    return a.first < b.first;
  });
  if (ranked.size() > max_size - 1) ranked.resize(max_size - 1);

  std::vector<std::string> terms;
  terms.reserve(ranked.size() + 1);
  terms.emplace_back(Vocab::kOovTerm);
  for (auto& entry : ranked) terms.push_back(std::move(entry.first));
  return Vocab::from_terms(std::move(terms));
}

TokenSeq encode(std::string_view text, const Vocab& vocab) {
  const auto terms = ngrams(tokenize(text));
  TokenSeq seq;
  seq.ids.reserve(terms.size());
  for (const auto& term : terms) seq.ids.push_back(vocab.id(term));
  return seq;
}

void write_vocab_file(const Vocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocab file " + path.string());
  for (const auto& term : vocab.terms()) out << term << '\n';
  if (!out) throw std::runtime_error("failed writing vocab file " + path.string());
}

Vocab read_vocab_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read vocab file " + path.string());
  std::vector<std::string> terms;
  for (std::string line; std::getline(in, line);) terms.push_back(line);
  return Vocab::from_terms(std::move(terms));
}

}  // namespace relnn
