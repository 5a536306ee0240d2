#include "omega/diag.hpp"

#include <algorithm>

namespace omega {

bool diagnostic_less(const Diagnostic& a, const Diagnostic& b) {
    if (a.file != b.file) return a.file < b.file;
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    if (a.span.end != b.span.end) return a.span.end < b.span.end;
    if (a.code != b.code) return a.code < b.code;
    return a.message < b.message;
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(), diagnostic_less);
}

std::pair<size_t, size_t> line_column(const std::string& text, size_t offset) {
    size_t line = 1, col = 1;
    const size_t stop = std::min(offset, text.size());
    for (size_t i = 0; i < stop; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::string format_diagnostic(const Diagnostic& d, const std::string& file_text) {
    auto [line, col] = line_column(file_text, d.span.begin);
    std::string out = d.file.empty() ? std::string("<memory>") : d.file;
    out += ":" + std::to_string(line) + ":" + std::to_string(col) + ": ";
    out += d.severity == Severity::Error ? "error" : "warning";
    out += "[" + d.code + "]: " + d.message;
    return out;
}

} // namespace omega
