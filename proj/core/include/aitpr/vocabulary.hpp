#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace aitpr {

using TokenId = std::uint32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kFirstWordId = 4;

// Token <-> id bijection. Ids 0..3 are reserved for <pad>, <bos>, <eos>, <unk>;
// ordinary words are numbered from 4 in insertion order.
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary from_words(std::span<const std::string> words);

  // Returns the id of `word`, inserting it if new.
  TokenId add(const std::string& word);
  std::optional<TokenId> find(const std::string& word) const;
  // Unknown words map to kUnk.
  TokenId id(const std::string& word) const;
  const std::string& token(TokenId id) const;

  std::size_t size() const { return tokens_.size(); }
  bool contains(TokenId id) const { return id < tokens_.size(); }
  // Non-reserved words in id order.
  std::vector<std::string> words() const;

  // One word per line; line n holds id n + 3.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Caption as ids framed <bos> ... <eos>, with no reserved ids inside.
struct TokenSequence {
  std::vector<TokenId> ids;

  // Wraps interior word ids in <bos>/<eos> and validates.
  static TokenSequence frame(std::span<const TokenId> words);
  // Throws InputError describing the first violated framing rule.
  void validate() const;
  bool is_valid() const;
  std::size_t size() const { return ids.size(); }
  std::span<const TokenId> words() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// Lowercase whitespace tokenisation.
std::vector<std::string> split_tokens(const std::string& text);
TokenSequence tokenize(const std::string& caption, const Vocabulary& vocab);
std::string detokenize(const TokenSequence& seq, const Vocabulary& vocab);

}  // namespace aitpr
