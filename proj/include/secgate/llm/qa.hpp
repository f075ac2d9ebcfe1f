#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "secgate/llm/backend.hpp"
#include "secgate/qa_pair.hpp"

namespace secgate::llm {

// Prompt that asks for `n` numbered blocks of "Q:" / "A:" / optional "S:"
// (suggestion) lines about `topic`.
ChatRequest qa_corpus_request(std::string_view topic, std::size_t n);

// Total parser over free text. Blocks without both a question and an answer
// are dropped. Ids are "<topic-slug>-<nnn>" in block order.
std::vector<QAPair> parse_qa_blocks(std::string_view reply, std::string_view topic);

// Throws InvalidArgument for n == 0 and MalformedReply when nothing parses.
// Returns at most n pairs.
std::vector<QAPair> generate_qa(std::string_view topic, std::size_t n,
                                const ChatBackend& backend);
std::vector<QAPair> generate_qa(std::string_view topic, std::size_t n,
                                const BackendConfig& cfg);

}  // namespace secgate::llm
