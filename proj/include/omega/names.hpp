#pragma once

#include <string>
#include <vector>

namespace omega {

enum class Style { Normal, Superscript, Subscript };

struct NameSegment {
    std::string text;
    Style style = Style::Normal;
    bool operator==(const NameSegment&) const = default;
};

// A display name: text segments with per-segment formatting. Formatting is
// presentation only; identity is the canonical (style-stripped) string.
struct FormattedName {
    std::vector<NameSegment> segments;

    FormattedName() = default;
    explicit FormattedName(std::string plain) {
        if (!plain.empty()) segments.push_back({std::move(plain), Style::Normal});
    }

    bool empty() const { return segments.empty(); }
    bool operator==(const FormattedName&) const = default;

    // Merges empty/adjacent same-style segments in place.
    void normalize();
};

std::string canonical_name(const FormattedName& name);

// First codepoint of the canonical form is an uppercase letter. Identifiers
// for types must satisfy this; slot keywords and locals must not.
bool starts_uppercase(const std::string& canonical);

} // namespace omega
