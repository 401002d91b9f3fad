#include "aitpr/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "aitpr/errors.hpp"

namespace aitpr {

namespace {

bool is_reserved_name(const std::string& w) { return w == "<pad>" || w == "<bos>" || w == "<eos>" || w == "<unk>"; }

}  // namespace

Vocabulary::Vocabulary() {
  for (const char* name : {"<pad>", "<bos>", "<eos>", "<unk>"}) {
    index_.emplace(name, static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(name);
  }
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  Vocabulary vocab;
  for (const auto& w : words) vocab.add(w);
  return vocab;
}

TokenId Vocabulary::add(const std::string& word) {
  if (word.empty() || word.find_first_of(" \t\r\n") != std::string::npos) {
    throw InputError("vocabulary words must be non-empty and contain no whitespace: '" + word + "'");
  }
  if (auto it = index_.find(word); it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(word);
  index_.emplace(word, id);
  return id;
}

std::optional<TokenId> Vocabulary::find(const std::string& word) const {
  if (auto it = index_.find(word); it != index_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::id(const std::string& word) const { return find(word).value_or(kUnk); }

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw InputError("token id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(tokens_.size()));
  return tokens_[id];
}

std::vector<std::string> Vocabulary::words() const {
  return std::vector<std::string>(tokens_.begin() + kFirstWordId, tokens_.end());
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file " + path.string());
  for (std::size_t i = kFirstWordId; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
  if (!out) throw IoError("failed writing vocabulary file " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary file " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.find_first_of(" \t") != std::string::npos || is_reserved_name(line)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": invalid vocabulary entry '" + line + "'");
    }
    if (vocab.find(line)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": duplicate vocabulary entry '" + line + "'");
    }
    vocab.add(line);
  }
  return vocab;
}

TokenSequence TokenSequence::frame(std::span<const TokenId> words) {
  TokenSequence seq;
  seq.ids.reserve(words.size() + 2);
  seq.ids.push_back(kBos);
  seq.ids.insert(seq.ids.end(), words.begin(), words.end());
  seq.ids.push_back(kEos);
  seq.validate();
  return seq;
}

void TokenSequence::validate() const {
  if (ids.size() < 2) throw InputError("token sequence must hold at least <bos> and <eos>");
  if (ids.front() != kBos) throw InputError("token sequence must start with <bos>");
  if (ids.back() != kEos) throw InputError("token sequence must end with <eos>");
  for (std::size_t i = 1; i + 1 < ids.size(); ++i) {
    if (ids[i] == kBos || ids[i] == kEos || ids[i] == kPad) {
      throw InputError("reserved id " + std::to_string(ids[i]) + " at interior position " + std::to_string(i));
    }
  }
}

bool TokenSequence::is_valid() const {
  try {
    validate();
    return true;
  } catch (const InputError&) {
    return false;
  }
}

std::span<const TokenId> TokenSequence::words() const {
  if (ids.size() < 2) return {};
  return std::span<const TokenId>(ids).subspan(1, ids.size() - 2);
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string word;
  while (in >> word) {
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
    out.push_back(std::move(word));
  }
  return out;
}

TokenSequence tokenize(const std::string& caption, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& w : split_tokens(caption)) ids.push_back(vocab.id(w));
  return TokenSequence::frame(ids);
}

std::string detokenize(const TokenSequence& seq, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : seq.words()) {
    if (!out.empty()) out += ' ';
    out += vocab.token(id);
  }
  return out;
}

}  // namespace aitpr
