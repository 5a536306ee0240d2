#pragma once

#include "omega/names.hpp"

#include <optional>
#include <string>
#include <vector>

namespace omega {

// Type reference as written in a signature or local declaration.
//
//   Named         Pixel, ℤ, Collection(V), String buffer
//   ExactReceiver the static type of the receiver at the call site
//   Tuple         (ℤ, ℤ), at least two elements
//   Block         a brace block; declared locals plus optional result type
struct TypeRef {
    enum class Kind { Named, ExactReceiver, Tuple, Block };

    Kind kind = Kind::Named;
    FormattedName name;             // Named
    std::vector<TypeRef> params;    // Named type arguments / Tuple elements / Block locals
    std::vector<TypeRef> result;    // Block result, size 0 or 1

    static TypeRef named(std::string canonical);
    static TypeRef named(FormattedName n, std::vector<TypeRef> args = {});
    static TypeRef exact_receiver();
    static TypeRef tuple(std::vector<TypeRef> elements);
    static TypeRef block(std::vector<TypeRef> locals, std::optional<TypeRef> result);

    bool is_named(const std::string& canonical) const;
    bool operator==(const TypeRef& other) const;
};

// Structural rendering with canonical names, e.g. "(ℤ, ℤ)" or "{→ T}".
std::string display(const TypeRef& t);

} // namespace omega
