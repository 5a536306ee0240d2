#include "omega/utf8.hpp"

namespace omega::utf8 {

namespace {

bool is_cont(uint8_t b) { return (b & 0xC0) == 0x80; }

} // namespace

std::optional<Decoded> decode(std::string_view bytes, size_t offset) {
    if (offset >= bytes.size()) return std::nullopt;
    const uint8_t b0 = static_cast<uint8_t>(bytes[offset]);
    if (b0 < 0x80) return Decoded{b0, 1};

    if (b0 < 0xC2) return std::nullopt; // continuation byte or overlong lead
    auto tail = [&](size_t i) -> int {
        if (offset + i >= bytes.size()) return -1;
        const uint8_t b = static_cast<uint8_t>(bytes[offset + i]);
        return is_cont(b) ? (b & 0x3F) : -1;
    };

    if (b0 <= 0xDF) {
        const int t1 = tail(1);
        if (t1 < 0) return std::nullopt;
        return Decoded{static_cast<char32_t>(((b0 & 0x1F) << 6) | t1), 2};
    }
    if (b0 <= 0xEF) {
        const int t1 = tail(1), t2 = tail(2);
        if (t1 < 0 || t2 < 0) return std::nullopt;
        const char32_t cp = static_cast<char32_t>(((b0 & 0x0F) << 12) | (t1 << 6) | t2);
        if (cp < 0x800) return std::nullopt;                 // overlong
        if (cp >= 0xD800 && cp <= 0xDFFF) return std::nullopt; // surrogate
        return Decoded{cp, 3};
    }
    if (b0 <= 0xF4) {
        const int t1 = tail(1), t2 = tail(2), t3 = tail(3);
        if (t1 < 0 || t2 < 0 || t3 < 0) return std::nullopt;
        const char32_t cp =
            static_cast<char32_t>(((b0 & 0x07) << 18) | (t1 << 12) | (t2 << 6) | t3);
        if (cp < 0x10000 || cp > 0x10FFFF) return std::nullopt;
        return Decoded{cp, 4};
    }
    return std::nullopt; // 0xF5..0xFF, incl. the longer extension forms
}

std::optional<size_t> first_invalid(std::string_view bytes) {
    size_t i = 0;
    while (i < bytes.size()) {
        auto d = decode(bytes, i);
        if (!d) return i;
        i += d->length;
    }
    return std::nullopt;
}

void append(std::string& out, char32_t cp) {
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

std::string encode(char32_t cp) {
    std::string s;
    append(s, cp);
    return s;
}

size_t count_codepoints(std::string_view bytes) {
    size_t n = 0, i = 0;
    while (i < bytes.size()) {
        auto d = decode(bytes, i);
        if (!d) { ++i; ++n; continue; } // count malformed bytes one by one
        i += d->length;
        ++n;
    }
    return n;
}

} // namespace omega::utf8
