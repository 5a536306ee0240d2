#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace omega {

// Byte range into a source buffer (file bytes or a body fragment).
struct Span {
    size_t begin = 0;
    size_t end = 0;

    bool contains(const Span& other) const {
        return begin <= other.begin && other.end <= end;
    }
    bool operator==(const Span&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;     // stable identifier, e.g. "TypeMismatch"
    std::string message;
    std::string file;     // empty for in-memory sources
    Span span;            // byte offsets into the file
    std::vector<std::pair<std::string, Span>> related;

    bool operator==(const Diagnostic&) const = default;
};

// Deterministic order used for all user-visible diagnostic output.
bool diagnostic_less(const Diagnostic& a, const Diagnostic& b);

void sort_diagnostics(std::vector<Diagnostic>& diags);

// (1-based line, 1-based byte column) of `offset` within `text`.
std::pair<size_t, size_t> line_column(const std::string& text, size_t offset);

// Renders "file:line:col: severity[code]: message".
std::string format_diagnostic(const Diagnostic& d, const std::string& file_text);

} // namespace omega
