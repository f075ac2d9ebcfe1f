#include "secgate/vet/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "secgate/core/error.hpp"
#include "secgate/core/text.hpp"

namespace secgate::vet {

using nlohmann::json;

Tokenizer::Tokenizer() {
  token_bytes_.reserve(kByteVocab);
  for (int b = 0; b < kByteVocab; ++b) token_bytes_.emplace_back(1, static_cast<char>(b));
}

Tokenizer::Tokenizer(std::vector<std::pair<TokenId, TokenId>> merges,
                     std::vector<std::string> expansion)
    : Tokenizer() {
  for (const auto& [l, r] : merges) {
    const auto next = static_cast<TokenId>(token_bytes_.size());
    if (l < 0 || r < 0 || l >= next || r >= next) {
      throw Error(ErrorCode::InvalidArgument, "merge references an unknown token id");
    }
    merge_rank_.emplace(std::make_pair(l, r), next);
    token_bytes_.push_back(token_bytes_[l] + token_bytes_[r]);
  }
  merges_ = std::move(merges);
  std::set<std::string> seen;
  for (const auto& form : expansion) {
    if (form.empty()) throw Error(ErrorCode::EmptyForm, "expansion form is empty");
    if (!seen.insert(form).second) {
      throw Error(ErrorCode::DuplicateForm, "duplicate expansion form");
    }
    token_bytes_.push_back(form);
  }
  expansion_ = std::move(expansion);
}

const std::string& Tokenizer::bytes_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= token_bytes_.size()) {
    throw Error(ErrorCode::OutOfRange, "token id out of range");
  }
  return token_bytes_[id];
}

std::vector<TokenId> Tokenizer::encode_bpe(std::string_view s) const {
  std::vector<TokenId> ids;
  ids.reserve(s.size());
  for (char c : s) ids.push_back(static_cast<unsigned char>(c));
  if (merge_rank_.empty()) return ids;

  while (ids.size() > 1) {
    // lowest merged id == earliest merge
    TokenId best = -1;
    std::pair<TokenId, TokenId> best_pair;
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      const auto it = merge_rank_.find({ids[i], ids[i + 1]});
      if (it != merge_rank_.end() && (best < 0 || it->second < best)) {
        best = it->second;
        best_pair = it->first;
      }
    }
    if (best < 0) break;
    std::vector<TokenId> next;
    next.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i + 1 < ids.size() && ids[i] == best_pair.first && ids[i + 1] == best_pair.second) {
        next.push_back(best);
        ++i;
      } else {
        next.push_back(ids[i]);
      }
    }
    ids = std::move(next);
  }
  return ids;
}

std::vector<TokenId> Tokenizer::encode(std::string_view s) const {
  if (expansion_.empty()) return encode_bpe(s);

  std::vector<TokenId> out;
  std::size_t segment_start = 0;
  std::size_t i = 0;
  const auto flush_segment = [&](std::size_t end) {
    if (end > segment_start) {
      const auto ids = encode_bpe(s.substr(segment_start, end - segment_start));
      out.insert(out.end(), ids.begin(), ids.end());
    }
  };
  while (i < s.size()) {
    std::size_t best_len = 0;
    std::size_t best_index = 0;
    for (std::size_t f = 0; f < expansion_.size(); ++f) {
      const auto& form = expansion_[f];
      if (form.size() > best_len && s.compare(i, form.size(), form) == 0) {
        best_len = form.size();
        best_index = f;
      }
    }
    if (best_len == 0) {
      ++i;
      continue;
    }
    flush_segment(i);
    out.push_back(static_cast<TokenId>(first_expansion_id() + best_index));
    i += best_len;
    segment_start = i;
  }
  flush_segment(s.size());
  return out;
}

std::string Tokenizer::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (auto id : ids) out += bytes_of(id);
  return out;
}

Tokenizer Tokenizer::expand(const std::vector<std::string>& new_forms) const {
  std::set<std::string> existing(expansion_.begin(), expansion_.end());
  auto forms = expansion_;
  for (const auto& form : new_forms) {
    if (form.empty()) throw Error(ErrorCode::EmptyForm, "expansion form is empty");
    if (!text::is_valid_utf8(form)) {
      throw Error(ErrorCode::InvalidArgument, "expansion form is not valid UTF-8");
    }
    if (!existing.insert(form).second) {
      throw Error(ErrorCode::DuplicateForm, "'" + form + "' is already an expansion token");
    }
    forms.push_back(form);
  }
  return Tokenizer(merges_, std::move(forms));
}

json Tokenizer::to_json() const {
  json merges = json::array();
  for (const auto& [l, r] : merges_) merges.push_back({l, r});
  return {{"merges", merges}, {"expansion", expansion_}};
}

Tokenizer Tokenizer::from_json(const json& j) {
  try {
    std::vector<std::pair<TokenId, TokenId>> merges;
    for (const auto& m : j.at("merges")) {
      merges.emplace_back(m.at(0).get<TokenId>(), m.at(1).get<TokenId>());
    }
    return Tokenizer(std::move(merges),
                     j.value("expansion", std::vector<std::string>{}));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Malformed, std::string("tokenizer json: ") + e.what());
  }
}

void Tokenizer::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << to_json().dump(1) << '\n';
}

Tokenizer Tokenizer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Malformed, std::string("tokenizer json: ") + e.what());
  }
}

Tokenizer train_bpe(const std::vector<std::string>& corpus, std::size_t target_vocab) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "BPE corpus is empty");
  if (target_vocab < static_cast<std::size_t>(kByteVocab)) {
    throw Error(ErrorCode::InvalidArgument, "target_vocab must be at least 256");
  }

  std::vector<std::vector<TokenId>> seqs;
  seqs.reserve(corpus.size());
  for (const auto& s : corpus) {
    std::vector<TokenId> ids;
    for (char c : s) ids.push_back(static_cast<unsigned char>(c));
    seqs.push_back(std::move(ids));
  }

  std::vector<std::string> surface;
  for (int b = 0; b < kByteVocab; ++b) surface.emplace_back(1, static_cast<char>(b));
  std::vector<std::pair<TokenId, TokenId>> merges;

  while (surface.size() < target_vocab) {
    std::map<std::pair<TokenId, TokenId>, std::size_t> counts;
    for (const auto& ids : seqs) {
      for (std::size_t i = 0; i + 1 < ids.size(); ++i) ++counts[{ids[i], ids[i + 1]}];
    }
    const std::pair<const std::pair<TokenId, TokenId>, std::size_t>* best = nullptr;
    for (const auto& entry : counts) {
      if (best == nullptr || entry.second > best->second) {
        best = &entry;
      } else if (entry.second == best->second) {
        const auto key = [&](const std::pair<TokenId, TokenId>& p) {
          return std::tie(surface[p.first], surface[p.second]);
        };
        if (key(entry.first) < key(best->first)) best = &entry;
      }
    }
    if (best == nullptr || best->second < 2) break;

    const auto pair = best->first;
    const auto merged = static_cast<TokenId>(surface.size());
    merges.push_back(pair);
    surface.push_back(surface[pair.first] + surface[pair.second]);
    for (auto& ids : seqs) {
      std::vector<TokenId> next;
      next.reserve(ids.size());
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i + 1 < ids.size() && ids[i] == pair.first && ids[i + 1] == pair.second) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(ids[i]);
        }
      }
      ids = std::move(next);
    }
  }
  return Tokenizer(std::move(merges), {});
}

}  // namespace secgate::vet
