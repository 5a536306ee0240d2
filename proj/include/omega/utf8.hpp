#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace omega::utf8 {

struct Decoded {
    char32_t cp;
    size_t length; // bytes consumed
};

// Strict decoder: rejects overlong forms, surrogates, values above U+10FFFF
// and anything longer than four bytes. Returns nullopt on malformed input.
std::optional<Decoded> decode(std::string_view bytes, size_t offset);

// Offset of the first invalid byte, or nullopt when the whole buffer is valid.
std::optional<size_t> first_invalid(std::string_view bytes);

void append(std::string& out, char32_t cp);

std::string encode(char32_t cp);

size_t count_codepoints(std::string_view bytes);

} // namespace omega::utf8
