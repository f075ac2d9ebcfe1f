#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace secgate::text {

std::string base64_encode(std::string_view bytes);

// Strict decode of standard-alphabet base64. Padding is optional; returns
// nullopt on any character outside the alphabet or an impossible length.
std::optional<std::string> base64_decode(std::string_view encoded);

bool is_valid_utf8(std::string_view s);

// Splits into UTF-8 code point substrings. Input must be valid UTF-8.
std::vector<std::string_view> utf8_codepoints(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);

// Lowercase hex SHA-256 of a byte range.
std::string sha256_hex(const void* data, std::size_t size);

std::string hex_u64(std::uint64_t v);

}  // namespace secgate::text
