#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dipmark/core.hpp"

namespace dipmark {

std::string to_hex(const std::uint8_t* data, std::size_t len);

// Token sequence files: JSONL objects {"tokens":[...]} or plain lines of
// whitespace-separated integers. When vocab_size is given, ids >= N are
// rejected with OutOfVocab. ParseError carries the 1-based line number.
std::vector<std::vector<TokenId>> parse_token_sequences(
    const std::string& text, std::optional<std::uint32_t> vocab_size = {});
std::vector<std::vector<TokenId>> read_token_file(
    const std::string& path, std::optional<std::uint32_t> vocab_size = {});

// Writes via temp file + rename so readers never observe partial output.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace dipmark
