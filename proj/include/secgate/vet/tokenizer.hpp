#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace secgate::vet {

using TokenId = std::int32_t;

inline constexpr TokenId kByteVocab = 256;

// Byte-level BPE with append-only expansion tokens.
//
// IDs 0..255 are raw bytes, then one ID per merge in merge order, then one ID
// per expansion form in expansion order. Nothing is ever renumbered.
//
// Encoding first cuts the input at exact occurrences of expansion forms
// (longest match wins at each position) and runs BPE only on the text in
// between, so text without any expansion form encodes exactly as it did
// before the expansion.
class Tokenizer {
 public:
  Tokenizer();

  // Throws InvalidArgument on merges that reference unknown IDs.
  Tokenizer(std::vector<std::pair<TokenId, TokenId>> merges,
            std::vector<std::string> expansion);

  std::size_t vocab_size() const noexcept { return token_bytes_.size(); }
  std::size_t merge_count() const noexcept { return merges_.size(); }
  const std::vector<std::pair<TokenId, TokenId>>& merges() const noexcept { return merges_; }
  const std::vector<std::string>& expansion_forms() const noexcept { return expansion_; }

  // Surface bytes of a token.
  const std::string& bytes_of(TokenId id) const;

  std::vector<TokenId> encode(std::string_view s) const;
  std::string decode(const std::vector<TokenId>& ids) const;

  // BPE alone, without the expansion splitter.
  std::vector<TokenId> encode_bpe(std::string_view s) const;

  // Returns a new tokenizer; throws EmptyForm, DuplicateForm, InvalidArgument
  // (invalid UTF-8).
  Tokenizer expand(const std::vector<std::string>& new_forms) const;

  nlohmann::json to_json() const;
  static Tokenizer from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Tokenizer load(const std::string& path);

  bool operator==(const Tokenizer& other) const {
    return merges_ == other.merges_ && expansion_ == other.expansion_;
  }

 private:
  TokenId first_expansion_id() const noexcept {
    return static_cast<TokenId>(kByteVocab + merges_.size());
  }

  std::vector<std::pair<TokenId, TokenId>> merges_;
  std::vector<std::string> expansion_;
  std::vector<std::string> token_bytes_;
  std::map<std::pair<TokenId, TokenId>, TokenId> merge_rank_;  // pair -> merged id
};

// Greedy BPE training: repeatedly merges the most frequent adjacent pair
// (ties go to the lexicographically smaller pair of surface strings) until
// target_vocab IDs exist or no pair occurs at least twice.
// Throws EmptyCorpus, InvalidArgument (target_vocab < 256).
Tokenizer train_bpe(const std::vector<std::string>& corpus, std::size_t target_vocab);

}  // namespace secgate::vet
