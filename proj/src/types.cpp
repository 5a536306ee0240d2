#include "omega/types.hpp"

namespace omega {

TypeRef TypeRef::named(std::string canonical) {
    TypeRef t;
    t.kind = Kind::Named;
    t.name = FormattedName(std::move(canonical));
    return t;
}

TypeRef TypeRef::named(FormattedName n, std::vector<TypeRef> args) {
    TypeRef t;
    t.kind = Kind::Named;
    t.name = std::move(n);
    t.params = std::move(args);
    return t;
}

TypeRef TypeRef::exact_receiver() {
    TypeRef t;
    t.kind = Kind::ExactReceiver;
    return t;
}

TypeRef TypeRef::tuple(std::vector<TypeRef> elements) {
    TypeRef t;
    t.kind = Kind::Tuple;
    t.params = std::move(elements);
    return t;
}

TypeRef TypeRef::block(std::vector<TypeRef> locals, std::optional<TypeRef> result) {
    TypeRef t;
    t.kind = Kind::Block;
    t.params = std::move(locals);
    if (result) t.result.push_back(std::move(*result));
    return t;
}

bool TypeRef::is_named(const std::string& canonical) const {
    return kind == Kind::Named && canonical_name(name) == canonical;
}

bool TypeRef::operator==(const TypeRef& other) const {
    if (kind != other.kind) return false;
    if (kind == Kind::Named && canonical_name(name) != canonical_name(other.name))
        return false;
    if (params != other.params) return false;
    return result == other.result;
}

std::string display(const TypeRef& t) {
    switch (t.kind) {
    case TypeRef::Kind::ExactReceiver:
        return "⊚"; // ⊚
    case TypeRef::Kind::Named: {
        std::string out = canonical_name(t.name);
        if (!t.params.empty()) {
            out += "(";
            for (size_t i = 0; i < t.params.size(); ++i) {
                if (i) out += ", ";
                out += display(t.params[i]);
            }
            out += ")";
        }
        return out;
    }
    case TypeRef::Kind::Tuple: {
        std::string out = "(";
        for (size_t i = 0; i < t.params.size(); ++i) {
            if (i) out += ", ";
            out += display(t.params[i]);
        }
        return out + ")";
    }
    case TypeRef::Kind::Block: {
        std::string out = "{";
        for (size_t i = 0; i < t.params.size(); ++i) {
            if (i) out += ", ";
            out += display(t.params[i]);
        }
        if (!t.result.empty()) {
            if (!t.params.empty()) out += " ";
            out += "→ " + display(t.result.front());
        }
        return out + "}";
    }
    }
    return "?";
}

} // namespace omega
