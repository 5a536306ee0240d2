#include "omega/names.hpp"

#include "omega/utf8.hpp"

namespace omega {

void FormattedName::normalize() {
    std::vector<NameSegment> merged;
    for (auto& seg : segments) {
        if (seg.text.empty()) continue;
        if (!merged.empty() && merged.back().style == seg.style)
            merged.back().text += seg.text;
        else
            merged.push_back(std::move(seg));
    }
    segments = std::move(merged);
}

std::string canonical_name(const FormattedName& name) {
    std::string out;
    for (const auto& seg : name.segments) out += seg.text;
    return out;
}

bool starts_uppercase(const std::string& canonical) {
    auto d = utf8::decode(canonical, 0);
    if (!d) return false;
    const char32_t c = d->cp;
    if (c >= U'A' && c <= U'Z') return true;
    if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return true; // Latin-1 capitals
    if (c >= 0x0391 && c <= 0x03AB) return true;                // Greek capitals
    if (c >= 0x0410 && c <= 0x042F) return true;                // Cyrillic capitals
    if (c >= 0x2100 && c <= 0x214F) return true;                // letterlike: ℕ ℤ ℝ ...
    return false;
}

} // namespace omega
