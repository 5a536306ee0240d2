#include "omega/body.hpp"

#include "omega/utf8.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace omega::body {

using env::Environment;
using env::SlotId;
using env::TrieEdge;
using header::Assoc;
using header::OperatorArity;
using header::SlotSignature;

namespace {

constexpr char32_t kArrowCp = 0x2190;     // ←
constexpr char32_t kSelfCp = 0x25CF;      // ●
constexpr char32_t kExactCp = 0x229A;     // ⊚

bool is_ws(char32_t c) { return c == ' ' || c == '\t' || c == '\r'; }

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_body_punct(char32_t c) {
    return c == '(' || c == ')' || c == '{' || c == '}' || c == '[' || c == ']' ||
           c == ',' || c == ':' || c == '\n';
}

bool is_symbol_cp(char32_t c) {
    switch (c) {
    case '+': case '-': case '*': case '/': case '%': case '&': case '|':
    case '<': case '>': case '=': case '~': case '^': case '!': case '?':
    case '#': case '$': case '@': case ';': case '.':
        return true;
    default:
        break;
    }
    if (c == 0x00D7 || c == 0x00F7) return true;          // × ÷
    if (c > 0x2190 && c <= 0x21FF) return true;           // arrows except ←
    if (c >= 0x2200 && c <= 0x22FF && c != kExactCp) return true; // math operators
    return false;
}

bool word_is_symbolic(const std::string& word) {
    auto d = utf8::decode(word, 0);
    return d && is_symbol_cp(d->cp);
}

} // namespace

std::vector<BodyToken> tokenize_body(const std::string& text) {
    std::vector<BodyToken> out;
    size_t i = 0;
    while (i < text.size()) {
        auto d = utf8::decode(text, i);
        if (!d)
            throw ParseError("MalformedBody", {i, i + 1}, "invalid UTF-8 in body text");
        const char32_t c = d->cp;
        const size_t start = i;

        if (c >= 0x02C0 && c <= 0x02FF)
            throw ParseError("TagInBody", {i, i + d->length},
                             "reserved tag codepoint inside a body");
        if (is_ws(c)) {
            i += d->length;
            continue;
        }
        if (c == kArrowCp) {
            out.push_back({BodyToken::Kind::Arrow, "", false, 0, {start, i + d->length}});
            i += d->length;
            continue;
        }
        if (c == kSelfCp) {
            out.push_back({BodyToken::Kind::SelfMark, "", false, 0, {start, i + d->length}});
            i += d->length;
            continue;
        }
        if (c == kExactCp) {
            out.push_back(
                {BodyToken::Kind::ExactTypeMark, "", false, 0, {start, i + d->length}});
            i += d->length;
            continue;
        }
        if (c == '[' && i + 1 < text.size() && text[i + 1] == '[') {
            // opaque two-dimensional literal
            size_t p = i + 2;
            int depth = 1;
            while (p + 1 < text.size()) {
                if (text[p] == '[' && text[p + 1] == '[') { depth++; p += 2; continue; }
                if (text[p] == ']' && text[p + 1] == ']') {
                    depth--;
                    p += 2;
                    if (depth == 0) break;
                    continue;
                }
                ++p;
            }
            if (depth != 0)
                throw ParseError("UnterminatedMatrix", {start, text.size()},
                                 "unterminated two-dimensional literal");
            out.push_back({BodyToken::Kind::Matrix, text.substr(i + 2, p - 2 - (i + 2)),
                           false, 0, {start, p}});
            i = p;
            continue;
        }
        if (is_body_punct(c)) {
            out.push_back({BodyToken::Kind::Punct, "", false, static_cast<char>(c),
                           {start, i + d->length}});
            i += d->length;
            continue;
        }
        if (c == '"') {
            size_t p = i + d->length;
            std::string content;
            bool closed = false;
            while (p < text.size()) {
                auto e = utf8::decode(text, p);
                if (!e) throw ParseError("MalformedBody", {p, p + 1}, "invalid UTF-8");
                if (e->cp == '"') {
                    closed = true;
                    p += e->length;
                    break;
                }
                content += text.substr(p, e->length);
                p += e->length;
            }
            if (!closed)
                throw ParseError("UnterminatedString", {start, text.size()},
                                 "unterminated string literal");
            out.push_back({BodyToken::Kind::StringLit, content, false, 0, {start, p}});
            i = p;
            continue;
        }
        if (c == '`') {
            size_t p = i + d->length;
            std::string content;
            bool closed = false;
            while (p < text.size()) {
                auto e = utf8::decode(text, p);
                if (!e) throw ParseError("MalformedBody", {p, p + 1}, "invalid UTF-8");
                if (e->cp == '`') {
                    closed = true;
                    p += e->length;
                    break;
                }
                content += text.substr(p, e->length);
                p += e->length;
            }
            if (!closed)
                throw ParseError("UnterminatedString", {start, text.size()},
                                 "unterminated external reference");
            out.push_back({BodyToken::Kind::External, content, false, 0, {start, p}});
            i = p;
            continue;
        }
        if (is_digit(c)) {
            size_t p = i;
            bool dot = false;
            while (p < text.size()) {
                auto e = utf8::decode(text, p);
                if (!e) break;
                if (is_digit(e->cp)) { p += e->length; continue; }
                if (e->cp == '.' && !dot && p + 1 < text.size() &&
                    is_digit(static_cast<unsigned char>(text[p + 1]))) {
                    dot = true;
                    p += e->length;
                    continue;
                }
                break;
            }
            out.push_back({BodyToken::Kind::Number, text.substr(i, p - i), false, 0,
                           {start, p}});
            i = p;
            continue;
        }
        if (is_symbol_cp(c)) {
            size_t p = i;
            while (p < text.size()) {
                auto e = utf8::decode(text, p);
                if (!e || !is_symbol_cp(e->cp)) break;
                p += e->length;
            }
            out.push_back({BodyToken::Kind::Word, text.substr(i, p - i), false, 0,
                           {start, p}});
            i = p;
            continue;
        }
        // identifier word: any other codepoint, digits allowed after the first
        {
            size_t p = i + d->length;
            while (p < text.size()) {
                auto e = utf8::decode(text, p);
                if (!e) break;
                if (is_ws(e->cp) || is_body_punct(e->cp) || is_symbol_cp(e->cp) ||
                    e->cp == '"' || e->cp == '`' || e->cp == kArrowCp ||
                    e->cp == kSelfCp || e->cp == kExactCp || e->cp == '\n')
                    break;
                if (e->cp >= 0x02C0 && e->cp <= 0x02FF)
                    throw ParseError("TagInBody", {p, p + e->length},
                                     "reserved tag codepoint inside a body");
                p += e->length;
            }
            const std::string word = text.substr(i, p - i);
            out.push_back({BodyToken::Kind::Word, word, starts_uppercase(word), 0,
                           {start, p}});
            i = p;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Expression helpers.

namespace {

ExprPtr make_expr(Span span, auto&& node) {
    auto e = std::make_shared<Expr>();
    e->span = span;
    e->node = std::forward<decltype(node)>(node);
    return e;
}

std::optional<TypeRef> grp_result_type(const Grp& grp) {
    if (grp.bodies.empty()) return std::nullopt;
    return grp.bodies.back()->type;
}

std::string fingerprint(const ExprPtr& e);

std::string fingerprint_list(const std::vector<ExprPtr>& list) {
    std::string out;
    for (const auto& e : list) out += fingerprint(e) + ";";
    return out;
}

std::string fingerprint(const ExprPtr& e) {
    if (!e) return "<null>";
    std::string head = std::to_string(e->span.begin) + "-" + std::to_string(e->span.end);
    return std::visit(
        [&](const auto& node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, SelfRef>) return head + "self";
            else if constexpr (std::is_same_v<T, NumberLit>) return head + "#" + node.text;
            else if constexpr (std::is_same_v<T, StringLitNode>) return head + "$" + node.text;
            else if constexpr (std::is_same_v<T, ExternalRef>) return head + "ext" + node.text;
            else if constexpr (std::is_same_v<T, MatrixLit>) return head + "mat";
            else if constexpr (std::is_same_v<T, TypeLit>) return head + "ty" + display(node.type);
            else if constexpr (std::is_same_v<T, Group>)
                return head + "grp(" + fingerprint_list(node.grp.bodies) + ")";
            else if constexpr (std::is_same_v<T, Tuple>)
                return head + "tup(" + fingerprint_list(node.elements) + ")";
            else if constexpr (std::is_same_v<T, Block>)
                return head + "blk(" + fingerprint_list(node.grp.bodies) + ")";
            else if constexpr (std::is_same_v<T, LocalRead>) return head + "loc" + node.name;
            else if constexpr (std::is_same_v<T, Message>)
                return head + "msg[" + node.key + "](" + fingerprint(node.receiver) + "|" +
                       fingerprint_list(node.args) + ")";
            else if constexpr (std::is_same_v<T, ApplyLocal>)
                return head + "app" + node.name + "(" + fingerprint(node.arg) + ")";
            else if constexpr (std::is_same_v<T, OperatorApply>)
                return head + "op" + node.op + "(" + fingerprint(node.lhs) + "," +
                       fingerprint(node.rhs) + ")";
            else
                return head + "asg(" + fingerprint(std::get<Assign>(e->node).value) + ")";
        },
        e->node);
}

// Effective prototype used for slot lookup on a value of this type.
std::optional<std::string> effective_proto(const std::optional<TypeRef>& t,
                                           const PhraseScope& scope) {
    if (!t) return std::nullopt;
    if (t->kind == TypeRef::Kind::ExactReceiver)
        return scope.current_proto.empty() ? std::nullopt
                                           : std::optional(scope.current_proto);
    if (t->kind == TypeRef::Kind::Named) return canonical_name(t->name);
    return std::nullopt;
}

bool type_is_generic_name(const Environment& e, const std::string& declaring,
                          const TypeRef& t, const std::vector<std::string>& extra) {
    if (t.kind != TypeRef::Kind::Named || !t.params.empty()) return false;
    const std::string canon = canonical_name(t.name);
    if (std::find(extra.begin(), extra.end(), canon) != extra.end()) return true;
    return env::classify_type_name(e, declaring, canon) == env::TypeNameClass::Generic;
}

// Best-effort instantiation of a declared return type at a call site.
std::optional<TypeRef> instantiate_return(
    const Environment& e, const SlotId& id, const TypeRef& declared,
    const std::optional<TypeRef>& receiver_type,
    const std::vector<std::optional<TypeRef>>& arg_types, const PhraseScope& scope) {
    const SlotSignature& sig = e.slot(id).signature;
    if (declared.kind == TypeRef::Kind::ExactReceiver) {
        if (!receiver_type) {
            // implicit self receiver keeps exactness
            return TypeRef::exact_receiver();
        }
        return *receiver_type;
    }
    if (type_is_generic_name(e, id.proto, declared, {})) {
        const std::string g = canonical_name(declared.name);
        for (size_t j = 0; j < sig.params.size(); ++j) {
            if (!sig.params[j].type || !arg_types[j]) continue;
            if (type_is_generic_name(e, id.proto, *sig.params[j].type, {}) &&
                canonical_name(sig.params[j].type->name) == g) {
                if (sig.params[j].delayed) {
                    if (arg_types[j]->kind == TypeRef::Kind::Block &&
                        !arg_types[j]->result.empty())
                        return arg_types[j]->result.front();
                    continue;
                }
                return arg_types[j];
            }
        }
        return std::nullopt;
    }
    if (declared.kind == TypeRef::Kind::Named || declared.kind == TypeRef::Kind::Tuple) {
        // concrete enough unless a nested generic appears
        bool has_generic = false;
        auto scan = [&](auto&& self, const TypeRef& t) -> void {
            if (type_is_generic_name(e, id.proto, t, {})) has_generic = true;
            for (const auto& p : t.params) self(self, p);
            for (const auto& r : t.result) self(self, r);
        };
        scan(scan, declared);
        if (has_generic) return std::nullopt;
        return declared;
    }
    (void)scope;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// CYK-style resolver.

struct Interp {
    ExprPtr expr;
    std::optional<TypeRef> type;
    size_t kw_words = 0;
    enum class Shape { Atom, Local, TypeLit, Message, ApplyLocal } shape = Shape::Atom;
};

struct Resolver {
    const std::vector<PhraseElem>& elems;
    const PhraseScope& scope;
    const Environment& e;
    std::map<std::pair<size_t, size_t>, std::vector<Interp>> memo;

    Resolver(const std::vector<PhraseElem>& elems_, const PhraseScope& scope_)
        : elems(elems_), scope(scope_), e(*scope_.environment) {}

    Span span_of(size_t i, size_t j) const {
        return {elems[i].span.begin, elems[j - 1].span.end};
    }

    // words [i,j) joined by single spaces; empty when a non-word intervenes
    std::optional<std::string> joined_words(size_t i, size_t j,
                                            bool allow_symbolic = false) const {
        std::string out;
        for (size_t k = i; k < j; ++k) {
            if (elems[k].atom) return std::nullopt;
            if (!allow_symbolic && word_is_symbolic(elems[k].word)) return std::nullopt;
            if (k > i) out += " ";
            out += elems[k].word;
        }
        return out;
    }

    const std::vector<Interp>& interps(size_t i, size_t j) {
        auto key = std::make_pair(i, j);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        memo[key] = {}; // occupies the slot; recursion only touches shorter spans
        std::vector<Interp> out = compute(i, j);
        return memo[key] = std::move(out);
    }

    std::vector<Interp> compute(size_t i, size_t j) {
        std::vector<Interp> out;

        // locals shadow slots and types over the same span
        if (auto name = joined_words(i, j)) {
            for (auto it = scope.locals.rbegin(); it != scope.locals.rend(); ++it) {
                if (it->name == *name) {
                    auto expr = make_expr(span_of(i, j), LocalRead{*name});
                    expr->type = it->type;
                    out.push_back({expr, it->type, 0, Interp::Shape::Local});
                    return out;
                }
            }
        }

        if (j == i + 1 && elems[i].atom) {
            out.push_back(
                {elems[i].atom, elems[i].atom->type, 0, Interp::Shape::Atom});
        }

        if (auto name = joined_words(i, j)) {
            if (elems[i].uppercase && e.has_proto(*name)) {
                auto expr = make_expr(span_of(i, j), TypeLit{TypeRef::named(*name)});
                expr->type = TypeRef::named(*name);
                out.push_back({expr, expr->type, 0, Interp::Shape::TypeLit});
            }
        }

        walk_messages(i, j, out);
        apply_local_forms(i, j, out);
        return out;
    }

    static bool arg_shaped(const Interp& in) {
        switch (in.shape) {
        case Interp::Shape::Atom:
        case Interp::Shape::Local:
        case Interp::Shape::TypeLit:
            return true;
        case Interp::Shape::Message: {
            const Message* m = as<Message>(in.expr);
            return m && m->args.empty() && !m->receiver;
        }
        default:
            return false;
        }
    }

    struct WalkState {
        size_t pos;
        size_t node;
        ExprPtr receiver;               // null until bound
        bool receiver_bound = false;    // true once consumed (implicit or explicit)
        bool receiver_implicit = false;
        std::optional<TypeRef> receiver_type;
        std::vector<ExprPtr> args;
        std::vector<std::optional<TypeRef>> arg_types;
        size_t kw_words = 0;
    };

    void walk_messages(size_t i, size_t j, std::vector<Interp>& out) {
        std::vector<WalkState> work;
        work.push_back({i, 0, nullptr, false, false, std::nullopt, {}, {}, 0});

        while (!work.empty()) {
            WalkState s = std::move(work.back());
            work.pop_back();

            if (s.pos == j) {
                emit_terminals(i, j, s, out);
                continue;
            }
            const auto& children = e.trie.nodes[s.node].children;
            for (const auto& [edge, child] : children) {
                switch (edge.kind) {
                case TrieEdge::Kind::Word: {
                    const PhraseElem& el = elems[s.pos];
                    if (!el.atom && el.word == edge.word) {
                        WalkState t = s;
                        t.pos += 1;
                        t.node = child;
                        t.kw_words += 1;
                        work.push_back(std::move(t));
                    }
                    break;
                }
                case TrieEdge::Kind::Receiver: {
                    if (s.receiver_bound) break;
                    // implicit self, only as the very first edge
                    if (s.pos == i && s.node == 0 && !scope.current_proto.empty()) {
                        WalkState t = s;
                        t.node = child;
                        t.receiver_bound = true;
                        t.receiver_implicit = true;
                        work.push_back(std::move(t));
                    }
                    for (size_t m = s.pos + 1; m <= j; ++m) {
                        if (m - s.pos >= j - i) break; // proper sub-span only
                        for (const Interp& sub : interps(s.pos, m)) {
                            WalkState t = s;
                            t.pos = m;
                            t.node = child;
                            t.receiver_bound = true;
                            t.receiver = sub.expr;
                            t.receiver_type = sub.type;
                            work.push_back(std::move(t));
                        }
                    }
                    break;
                }
                case TrieEdge::Kind::Arg: {
                    for (size_t m = s.pos + 1; m <= j; ++m) {
                        if (m - s.pos >= j - i) break;
                        for (const Interp& sub : interps(s.pos, m)) {
                            if (!arg_shaped(sub)) continue;
                            WalkState t = s;
                            t.pos = m;
                            t.node = child;
                            t.args.push_back(sub.expr);
                            t.arg_types.push_back(sub.type);
                            work.push_back(std::move(t));
                        }
                    }
                    break;
                }
                }
            }
        }
    }

    bool candidate_ok(const SlotId& id, const WalkState& s) const {
        const header::Slot& slot = e.slot(id);
        const SlotSignature& sig = slot.signature;

        const bool recv_is_block = s.receiver && as<Block>(s.receiver) != nullptr;
        if (s.receiver_implicit) {
            if (sig.receiver_delayed) return false;
            // the slot must be visible from the current prototype
            if (scope.current_proto != id.proto &&
                !env::reachable(e, scope.current_proto, id.proto))
                return false;
        } else if (recv_is_block) {
            if (!sig.receiver_delayed) return false;
            if (s.receiver_type && s.receiver_type->kind == TypeRef::Kind::Block &&
                !s.receiver_type->result.empty()) {
                auto p = effective_proto(s.receiver_type->result.front(), scope);
                if (p && *p != id.proto && !env::assignable(e, *p, id.proto))
                    return false;
            }
        } else {
            if (sig.receiver_delayed) return false;
            auto p = effective_proto(s.receiver_type, scope);
            if (p && *p != id.proto && !env::reachable(e, *p, id.proto)) return false;
        }

        for (size_t a = 0; a < sig.params.size() && a < s.args.size(); ++a) {
            const header::Parameter& param = sig.params[a];
            const bool is_block = as<Block>(s.args[a]) != nullptr;
            if (param.delayed != is_block) return false;
            if (!param.type) continue;
            if (type_is_generic_name(e, id.proto, *param.type, scope.slot_generics))
                continue;
            if (param.delayed) {
                if (s.arg_types[a] && s.arg_types[a]->kind == TypeRef::Kind::Block &&
                    !s.arg_types[a]->result.empty() &&
                    param.type->kind == TypeRef::Kind::Named) {
                    auto src = effective_proto(s.arg_types[a]->result.front(), scope);
                    const std::string dst = canonical_name(param.type->name);
                    if (src && e.has_proto(dst) && *src != dst &&
                        !env::assignable(e, *src, dst))
                        return false;
                }
                continue;
            }
            if (param.type->kind == TypeRef::Kind::ExactReceiver) {
                auto recv = s.receiver_implicit
                                ? (scope.current_proto.empty()
                                       ? std::nullopt
                                       : std::optional(scope.current_proto))
                                : effective_proto(s.receiver_type, scope);
                auto arg = effective_proto(s.arg_types[a], scope);
                if (recv && arg && *recv != *arg) return false;
                continue;
            }
            if (param.type->kind == TypeRef::Kind::Named && param.type->params.empty()) {
                const std::string dst = canonical_name(param.type->name);
                if (!e.has_proto(dst)) continue;
                auto src = effective_proto(s.arg_types[a], scope);
                if (src && *src != dst && !env::assignable(e, *src, dst)) return false;
            }
        }
        return true;
    }

    void emit_terminals(size_t i, size_t j, const WalkState& s, std::vector<Interp>& out) {
        const auto& terminal = e.trie.nodes[s.node].terminal;
        if (terminal.empty()) return;

        std::vector<SlotId> candidates;
        for (const SlotId& id : terminal)
            if (candidate_ok(id, s)) candidates.push_back(id);
        if (candidates.empty()) return;

        Message msg;
        msg.candidates = candidates;
        msg.key = header::canonical_key(e.slot(candidates.front()).signature);
        msg.receiver = s.receiver;
        msg.args = s.args;
        msg.keyword_words = s.kw_words;

        // best-effort result type when every candidate agrees
        std::optional<TypeRef> agreed;
        bool first = true, agree = true;
        for (const SlotId& id : candidates) {
            const auto& ret = e.slot(id).signature.return_type;
            std::optional<TypeRef> t;
            if (ret)
                t = instantiate_return(e, id, *ret, s.receiver_type, s.arg_types, scope);
            if (first) {
                agreed = t;
                first = false;
            } else if (!(agreed.has_value() == t.has_value() &&
                         (!agreed || *agreed == *t))) {
                agree = false;
            }
        }

        auto expr = make_expr(span_of(i, j), std::move(msg));
        if (agree) expr->type = agreed;
        out.push_back({expr, expr->type, s.kw_words, Interp::Shape::Message});
    }

    void apply_local_forms(size_t i, size_t j, std::vector<Interp>& out) {
        // Msg -> idf_local Arg : apply a block-typed local to one argument.
        for (size_t m = i + 1; m < j; ++m) {
            auto name = joined_words(i, m);
            if (!name) continue;
            const ScopeEntry* entry = nullptr;
            for (auto it = scope.locals.rbegin(); it != scope.locals.rend(); ++it)
                if (it->name == *name) { entry = &*it; break; }
            if (!entry || !entry->type || entry->type->kind != TypeRef::Kind::Block)
                continue;
            for (const Interp& sub : interps(m, j)) {
                if (!arg_shaped(sub)) continue;
                auto expr = make_expr(span_of(i, j), ApplyLocal{*name, sub.expr});
                if (!entry->type->result.empty()) expr->type = entry->type->result.front();
                out.push_back({expr, expr->type, 0, Interp::Shape::ApplyLocal});
            }
        }
    }
};

void collect_rare_forms(const ExprPtr& e, std::vector<Diagnostic>& diags) {
    if (!e) return;
    if (const ApplyLocal* a = as<ApplyLocal>(e)) {
        Diagnostic d;
        d.severity = Severity::Warning;
        d.code = "RareForm";
        d.message = "applying local '" + a->name + "' to an argument is a rare form";
        d.span = e->span;
        diags.push_back(d);
        collect_rare_forms(a->arg, diags);
        return;
    }
    if (const Message* m = as<Message>(e)) {
        collect_rare_forms(m->receiver, diags);
        for (const auto& arg : m->args) collect_rare_forms(arg, diags);
    }
}

} // namespace

ResolveResult resolve_phrase(const std::vector<PhraseElem>& phrase,
                             const PhraseScope& scope) {
    ResolveResult result;
    if (phrase.empty()) {
        result.diagnostics.push_back({Severity::Error, "NoInterpretation",
                                      "empty expression", "", {}, {}});
        return result;
    }
    Resolver r(phrase, scope);
    const auto& all = r.interps(0, phrase.size());
    if (all.empty()) {
        result.diagnostics.push_back(
            {Severity::Error, "NoInterpretation",
             "cannot interpret this phrase in the current scope", "",
             r.span_of(0, phrase.size()), {}});
        return result;
    }
    size_t best = 0;
    for (const auto& in : all) best = std::max(best, in.kw_words);

    std::vector<const Interp*> winners;
    std::set<std::string> seen;
    for (const auto& in : all) {
        if (in.kw_words != best) continue;
        if (seen.insert(fingerprint(in.expr)).second) winners.push_back(&in);
    }
    if (winners.size() > 1) {
        Diagnostic d;
        d.severity = Severity::Error;
        d.code = "TrueAmbiguity";
        d.message = "phrase has " + std::to_string(winners.size()) +
                    " interpretations of equal length; add parentheses to choose one";
        d.span = r.span_of(0, phrase.size());
        result.diagnostics.push_back(std::move(d));
        return result;
    }
    result.expr = winners.front()->expr;
    collect_rare_forms(result.expr, result.diagnostics);
    return result;
}

// ---------------------------------------------------------------------------
// Operator segmentation.

OpSplit split_operators(const std::vector<PhraseElem>& elems,
                        const env::OperatorDictionary& ops) {
    OpSplit out;
    OperandSegment current;
    bool have_operand_material = false;

    auto occurrence = [&](const PhraseElem& el, OperatorArity arity) {
        const auto entries = ops.entries(el.word, arity);
        const auto& info = entries.front().info;
        return OpOccurrence{el.word, arity, info.priority, info.assoc, info.commutative,
                            el.span};
    };

    auto can_start_operand = [&](size_t k) {
        if (k >= elems.size()) return false;
        const PhraseElem& el = elems[k];
        if (el.atom) return true;
        if (!ops.is_operator(el.word)) return true;
        return ops.has_arity(el.word, OperatorArity::UnaryPrefix);
    };

    for (size_t k = 0; k < elems.size(); ++k) {
        const PhraseElem& el = elems[k];
        const bool is_op = !el.atom && ops.is_operator(el.word);
        if (!is_op) {
            current.elems.push_back(el);
            have_operand_material = true;
            continue;
        }
        if (!have_operand_material) {
            if (ops.has_arity(el.word, OperatorArity::UnaryPrefix)) {
                current.prefix.push_back(occurrence(el, OperatorArity::UnaryPrefix));
                continue;
            }
            throw ParseError("DanglingOperator", el.span,
                             "operator '" + el.word + "' is missing its left operand");
        }
        // after operand material: binary when something can follow, else postfix
        const bool binary_ok = ops.has_arity(el.word, OperatorArity::BinaryInfix);
        const bool postfix_ok = ops.has_arity(el.word, OperatorArity::UnaryPostfix);
        if (binary_ok && can_start_operand(k + 1)) {
            out.operands.push_back(std::move(current));
            current = OperandSegment{};
            have_operand_material = false;
            out.binaries.push_back(occurrence(el, OperatorArity::BinaryInfix));
            continue;
        }
        if (postfix_ok) {
            current.postfix.push_back(occurrence(el, OperatorArity::UnaryPostfix));
            continue;
        }
        throw ParseError("DanglingOperator", el.span,
                         "operator '" + el.word + "' is missing its right operand");
    }
    if (!have_operand_material) {
        const Span sp = out.binaries.empty() ? Span{} : out.binaries.back().span;
        throw ParseError("DanglingOperator", sp, "expression ends with an operator");
    }
    out.operands.push_back(std::move(current));
    return out;
}

ExprPtr build_operator_tree(std::vector<ExprPtr> operands,
                            const std::vector<OpOccurrence>& occurrences) {
    if (operands.size() != occurrences.size() + 1)
        throw ParseError("DanglingOperator",
                         occurrences.empty() ? Span{} : occurrences.back().span,
                         "operator chain is missing an operand");
    std::vector<ExprPtr> output;
    std::vector<OpOccurrence> stack;

    auto reduce = [&]() {
        const OpOccurrence op = stack.back();
        stack.pop_back();
        ExprPtr rhs = std::move(output.back());
        output.pop_back();
        ExprPtr lhs = std::move(output.back());
        output.pop_back();
        OperatorApply node;
        node.op = op.word;
        node.arity = op.arity;
        node.priority = op.priority;
        node.assoc = op.assoc;
        node.commutative = op.commutative;
        node.lhs = lhs;
        node.rhs = rhs;
        output.push_back(make_expr({lhs->span.begin, rhs->span.end}, std::move(node)));
    };

    output.push_back(std::move(operands[0]));
    for (size_t k = 0; k < occurrences.size(); ++k) {
        const OpOccurrence& op = occurrences[k];
        while (!stack.empty()) {
            const OpOccurrence& top = stack.back();
            if (top.priority > op.priority) {
                reduce();
                continue;
            }
            if (top.priority == op.priority) {
                if (top.assoc != op.assoc)
                    throw ParseError("IndeterministicAssociativity", op.span,
                                     "equal-priority operators with mixed associativity; "
                                     "use parentheses");
                if (op.assoc == Assoc::Left) {
                    reduce();
                    continue;
                }
            }
            break;
        }
        stack.push_back(op);
        output.push_back(std::move(operands[k + 1]));
    }
    while (!stack.empty()) reduce();
    return std::move(output.back());
}

// ---------------------------------------------------------------------------
// Grammar-level parsing.

namespace {

struct BodyParser {
    const std::vector<BodyToken>& toks;
    const PhraseScope& base;
    std::vector<Diagnostic>& diags;
    std::vector<ScopeEntry> scope_stack; // locals introduced by enclosing groups
    size_t pos = 0;

    BodyParser(const std::vector<BodyToken>& toks_, const PhraseScope& base_,
               std::vector<Diagnostic>& diags_)
        : toks(toks_), base(base_), diags(diags_) {}

    PhraseScope current_scope() const {
        PhraseScope s = base;
        s.locals.insert(s.locals.end(), scope_stack.begin(), scope_stack.end());
        return s;
    }

    bool at_punct(size_t k, char c) const {
        return k < toks.size() && toks[k].kind == BodyToken::Kind::Punct &&
               toks[k].punct == c;
    }
    bool is_separator(size_t k) const {
        return at_punct(k, '\n') || at_punct(k, ',');
    }

    // end of the current line at bracket depth zero
    size_t line_end(size_t from, char terminator) const {
        int depth = 0;
        size_t k = from;
        for (; k < toks.size(); ++k) {
            if (toks[k].kind != BodyToken::Kind::Punct) continue;
            const char c = toks[k].punct;
            if (c == '(' || c == '{' || c == '[') ++depth;
            else if (c == ')' || c == '}' || c == ']') {
                if (depth == 0 && c == terminator) return k;
                if (depth == 0)
                    throw ParseError("MalformedBody", toks[k].span,
                                     std::string("unbalanced '") + c + "'");
                --depth;
            } else if (c == '\n' && depth == 0)
                return k;
        }
        return k;
    }

    bool line_is_declaration(size_t from, size_t to) const {
        int depth = 0;
        for (size_t k = from; k < to; ++k) {
            if (toks[k].kind == BodyToken::Kind::Arrow && depth == 0) return false;
            if (toks[k].kind != BodyToken::Kind::Punct) continue;
            const char c = toks[k].punct;
            if (c == '(' || c == '{' || c == '[') ++depth;
            else if (c == ')' || c == '}' || c == ']') --depth;
            else if (c == ':' && depth == 0) return true;
        }
        return false;
    }

    TypeRef parse_type(size_t& k, size_t to) {
        if (k >= to)
            throw ParseError("MalformedBody", toks.empty() ? Span{} : toks[to - 1].span,
                             "expected a type");
        if (toks[k].kind == BodyToken::Kind::ExactTypeMark) {
            ++k;
            return TypeRef::exact_receiver();
        }
        if (at_punct(k, '(')) {
            ++k;
            std::vector<TypeRef> elems;
            elems.push_back(parse_type(k, to));
            while (at_punct(k, ',')) {
                ++k;
                elems.push_back(parse_type(k, to));
            }
            if (!at_punct(k, ')'))
                throw ParseError("MalformedBody", toks[k < to ? k : to - 1].span,
                                 "expected ')' in type");
            ++k;
            if (elems.size() == 1) return std::move(elems.front());
            return TypeRef::tuple(std::move(elems));
        }
        if (toks[k].kind != BodyToken::Kind::Word)
            throw ParseError("MalformedBody", toks[k].span, "expected a type name");
        std::string name = toks[k].text;
        ++k;
        while (k < to && toks[k].kind == BodyToken::Kind::Word &&
               !word_is_symbolic(toks[k].text)) {
            name += " " + toks[k].text;
            ++k;
        }
        std::vector<TypeRef> args;
        if (at_punct(k, '(')) {
            ++k;
            args.push_back(parse_type(k, to));
            while (at_punct(k, ',')) {
                ++k;
                args.push_back(parse_type(k, to));
            }
            if (!at_punct(k, ')'))
                throw ParseError("MalformedBody", toks[k < to ? k : to - 1].span,
                                 "expected ')' after type arguments");
            ++k;
        }
        return TypeRef::named(FormattedName(name), std::move(args));
    }

    // Loc: {idf_local [':' Type] ','} idf_local ':' Type
    std::vector<LocalDecl> parse_locals(size_t from, size_t to) {
        struct Item {
            std::string name;
            std::optional<TypeRef> type;
            Span span;
        };
        std::vector<Item> items;
        size_t k = from;
        while (k < to) {
            if (toks[k].kind != BodyToken::Kind::Word || word_is_symbolic(toks[k].text))
                throw ParseError("MalformedBody", toks[k].span,
                                 "expected a local variable name");
            Item item;
            item.span.begin = toks[k].span.begin;
            item.name = toks[k].text;
            item.span.end = toks[k].span.end;
            ++k;
            while (k < to && toks[k].kind == BodyToken::Kind::Word &&
                   !word_is_symbolic(toks[k].text)) {
                item.name += " " + toks[k].text;
                item.span.end = toks[k].span.end;
                ++k;
            }
            if (at_punct(k, ':')) {
                ++k;
                item.type = parse_type(k, to);
            }
            items.push_back(std::move(item));
            if (at_punct(k, ',')) {
                ++k;
                continue;
            }
            break;
        }
        if (k != to)
            throw ParseError("MalformedBody", toks[k].span,
                             "unexpected tokens in a local declaration");
        // untyped names take the next declared type
        std::optional<TypeRef> pending;
        std::vector<LocalDecl> decls(items.size());
        for (size_t idx = items.size(); idx-- > 0;) {
            if (items[idx].type) pending = items[idx].type;
            if (!pending)
                throw ParseError("MalformedBody", items[idx].span,
                                 "local '" + items[idx].name + "' has no declared type");
            decls[idx] = {items[idx].name, *pending, items[idx].span};
        }
        return decls;
    }

    // Parses '(' ... ')' after the opening punct has been consumed.
    ExprPtr parse_group(Span open) {
        Grp grp = parse_grp(')');
        if (!at_punct(pos, ')'))
            throw ParseError("MalformedBody", open, "unterminated '('");
        const Span sp{open.begin, toks[pos].span.end};
        ++pos;
        if (grp.bodies.size() >= 2) {
            if (!grp.locals.empty())
                throw ParseError("MalformedBody", sp,
                                 "local declarations inside a tuple literal");
            Tuple t;
            t.elements = grp.bodies;
            bool all = true;
            std::vector<TypeRef> types;
            for (const auto& el : t.elements) {
                if (el->type) types.push_back(*el->type);
                else all = false;
            }
            auto expr = make_expr(sp, std::move(t));
            if (all) expr->type = TypeRef::tuple(std::move(types));
            return expr;
        }
        Group g;
        g.grp = std::move(grp);
        auto expr = make_expr(sp, std::move(g));
        expr->type = grp_result_type(std::get<Group>(expr->node).grp);
        return expr;
    }

    ExprPtr parse_block(Span open, std::vector<LocalDecl> declared) {
        const size_t base_size = scope_stack.size();
        for (const auto& d : declared) scope_stack.push_back({d.name, d.type});
        Grp grp = parse_grp('}');
        scope_stack.resize(base_size);
        if (!at_punct(pos, '}'))
            throw ParseError("MalformedBody", open, "unterminated '{'");
        const Span sp{open.begin, toks[pos].span.end};
        ++pos;
        Block b;
        b.declared = std::move(declared);
        b.grp = std::move(grp);
        std::vector<TypeRef> local_types;
        for (const auto& d : b.declared) local_types.push_back(d.type);
        auto result = grp_result_type(b.grp);
        auto expr = make_expr(sp, std::move(b));
        expr->type = TypeRef::block(std::move(local_types), result);
        return expr;
    }

    std::vector<PhraseElem> parse_elements(size_t end) {
        std::vector<PhraseElem> elems;
        while (pos < end) {
            const BodyToken& t = toks[pos];
            switch (t.kind) {
            case BodyToken::Kind::Punct:
                if (t.punct == '(') {
                    ++pos;
                    elems.push_back({parse_group(t.span), "", false, t.span});
                    elems.back().span = elems.back().atom->span;
                } else if (t.punct == '{') {
                    ++pos;
                    elems.push_back({parse_block(t.span, {}), "", false, t.span});
                    elems.back().span = elems.back().atom->span;
                } else if (t.punct == '[') {
                    const size_t close = line_end(pos + 1, ']');
                    if (!at_punct(close, ']'))
                        throw ParseError("MalformedBody", t.span, "unterminated '['");
                    auto declared = parse_locals(pos + 1, close);
                    pos = close + 1;
                    if (!at_punct(pos, '{'))
                        throw ParseError("MalformedBody", t.span,
                                         "expected '{' after block locals");
                    const Span open = toks[pos].span;
                    ++pos;
                    elems.push_back(
                        {parse_block({t.span.begin, open.end}, std::move(declared)), "",
                         false, t.span});
                    elems.back().span = elems.back().atom->span;
                } else {
                    throw ParseError("MalformedBody", t.span,
                                     std::string("unexpected '") + t.punct + "'");
                }
                break;
            case BodyToken::Kind::Word:
                elems.push_back({nullptr, t.text, t.uppercase, t.span});
                ++pos;
                break;
            case BodyToken::Kind::Number: {
                auto expr = make_expr(t.span, NumberLit{t.text});
                expr->type = TypeRef::named(t.text.find('.') != std::string::npos
                                                ? "ℝ64"
                                                : "ℤ");
                elems.push_back({expr, "", false, t.span});
                ++pos;
                break;
            }
            case BodyToken::Kind::StringLit: {
                auto expr = make_expr(t.span, StringLitNode{t.text});
                expr->type = TypeRef::named("String");
                elems.push_back({expr, "", false, t.span});
                ++pos;
                break;
            }
            case BodyToken::Kind::SelfMark: {
                auto expr = make_expr(t.span, SelfRef{});
                expr->type = TypeRef::exact_receiver();
                elems.push_back({expr, "", false, t.span});
                ++pos;
                break;
            }
            case BodyToken::Kind::External: {
                auto expr = make_expr(t.span, ExternalRef{t.text});
                elems.push_back({expr, "", false, t.span});
                ++pos;
                break;
            }
            case BodyToken::Kind::Matrix: {
                auto expr = make_expr(t.span, MatrixLit{t.text});
                elems.push_back({expr, "", false, t.span});
                ++pos;
                break;
            }
            case BodyToken::Kind::Arrow:
                throw ParseError("MalformedBody", t.span,
                                 "assignment arrow in expression position");
            case BodyToken::Kind::ExactTypeMark:
                throw ParseError("MalformedBody", t.span,
                                 "exact-type mark outside a type");
            }
        }
        return elems;
    }

    ExprPtr parse_statement(size_t end) {
        Assign assign;
        // leading "name ←" chain
        while (pos < end) {
            size_t k = pos;
            std::string name;
            Span sp{toks[k].span.begin, toks[k].span.begin};
            while (k < end && toks[k].kind == BodyToken::Kind::Word &&
                   !word_is_symbolic(toks[k].text)) {
                if (!name.empty()) name += " ";
                name += toks[k].text;
                sp.end = toks[k].span.end;
                ++k;
            }
            if (!name.empty() && k < end && toks[k].kind == BodyToken::Kind::Arrow) {
                assign.targets.push_back({name, sp});
                pos = k + 1;
                continue;
            }
            break;
        }
        if (pos >= end) {
            if (!assign.targets.empty())
                throw ParseError("MalformedBody", assign.targets.back().span,
                                 "assignment has no right-hand side");
            return nullptr;
        }

        auto elems = parse_elements(end);
        const PhraseScope scope = current_scope();
        auto split = split_operators(elems, scope.environment->operators);

        std::vector<ExprPtr> operands;
        for (auto& segment : split.operands) {
            auto resolved = resolve_phrase(segment.elems, scope);
            for (auto& d : resolved.diagnostics) diags.push_back(d);
            if (!resolved.expr) return nullptr;
            ExprPtr expr = resolved.expr;
            // postfix binds closest, prefixes from the inside out
            for (const auto& op : segment.postfix) {
                OperatorApply node;
                node.op = op.word;
                node.arity = op.arity;
                node.priority = op.priority;
                node.assoc = op.assoc;
                node.lhs = expr;
                expr = make_expr({expr->span.begin, op.span.end}, std::move(node));
            }
            for (auto it = segment.prefix.rbegin(); it != segment.prefix.rend(); ++it) {
                OperatorApply node;
                node.op = it->word;
                node.arity = it->arity;
                node.priority = it->priority;
                node.assoc = it->assoc;
                node.lhs = expr;
                expr = make_expr({it->span.begin, expr->span.end}, std::move(node));
            }
            operands.push_back(std::move(expr));
        }
        ExprPtr expr = build_operator_tree(std::move(operands), split.binaries);

        if (assign.targets.empty()) return expr;
        const Span sp{assign.targets.front().span.begin, expr->span.end};
        assign.value = std::move(expr);
        return make_expr(sp, std::move(assign));
    }

    Grp parse_grp(char terminator) {
        Grp grp;
        const size_t base_size = scope_stack.size();
        while (pos < toks.size()) {
            if (is_separator(pos)) {
                ++pos;
                continue;
            }
            if (terminator && at_punct(pos, terminator)) break;
            const size_t le = line_end(pos, terminator);
            if (line_is_declaration(pos, le)) {
                try {
                    auto decls = parse_locals(pos, le);
                    for (const auto& d : decls) {
                        scope_stack.push_back({d.name, d.type});
                        grp.locals.push_back(d);
                    }
                } catch (const ParseError& pe) {
                    diags.push_back({Severity::Error, pe.code, pe.what(), "", pe.span, {}});
                }
                pos = le;
                continue;
            }
            // statements separated by ',' within the line
            while (pos < le) {
                size_t stmt_end = pos;
                int depth = 0;
                for (; stmt_end < le; ++stmt_end) {
                    if (toks[stmt_end].kind != BodyToken::Kind::Punct) continue;
                    const char c = toks[stmt_end].punct;
                    if (c == '(' || c == '{' || c == '[') ++depth;
                    else if (c == ')' || c == '}' || c == ']') --depth;
                    else if (c == ',' && depth == 0) break;
                }
                try {
                    ExprPtr stmt = parse_statement(stmt_end);
                    if (stmt) grp.bodies.push_back(std::move(stmt));
                } catch (const ParseError& pe) {
                    diags.push_back({Severity::Error, pe.code, pe.what(), "", pe.span, {}});
                    pos = stmt_end;
                }
                if (pos < le && at_punct(pos, ',')) ++pos;
                else if (pos < stmt_end) pos = stmt_end;
                if (pos == stmt_end && at_punct(pos, ',')) ++pos;
            }
        }
        scope_stack.resize(base_size);
        return grp;
    }
};

} // namespace

PhraseScope scope_for_slot(const Environment& environment, const std::string& proto,
                           const SlotSignature& signature) {
    PhraseScope scope;
    scope.environment = &environment;
    scope.current_proto = proto;
    for (const auto& p : signature.params)
        scope.locals.push_back({canonical_name(p.name), p.type});

    std::set<std::string> generics;
    auto scan = [&](auto&& self, const TypeRef& t) -> void {
        if (t.kind == TypeRef::Kind::Named && t.params.empty()) {
            const std::string canon = canonical_name(t.name);
            if (env::classify_type_name(environment, proto, canon) ==
                env::TypeNameClass::Generic)
                generics.insert(canon);
        }
        for (const auto& p : t.params) self(self, p);
        for (const auto& r : t.result) self(self, r);
    };
    for (const auto& p : signature.params)
        if (p.type) scan(scan, *p.type);
    if (signature.return_type) scan(scan, *signature.return_type);
    scope.slot_generics.assign(generics.begin(), generics.end());
    return scope;
}

ParsedBody parse_body(const std::string& text, const SlotSignature& signature,
                      const PhraseScope& outer) {
    ParsedBody result;
    PhraseScope base = outer;
    for (const auto& p : signature.params) {
        const std::string name = canonical_name(p.name);
        bool present = false;
        for (const auto& l : base.locals)
            if (l.name == name) present = true;
        if (!present) base.locals.push_back({name, p.type});
    }

    std::vector<BodyToken> toks;
    try {
        toks = tokenize_body(text);
    } catch (const ParseError& pe) {
        result.diagnostics.push_back(
            {Severity::Error, pe.code, pe.what(), "", pe.span, {}});
        return result;
    }
    BodyParser parser(toks, base, result.diagnostics);
    try {
        result.grp = parser.parse_grp(0);
    } catch (const ParseError& pe) {
        result.diagnostics.push_back(
            {Severity::Error, pe.code, pe.what(), "", pe.span, {}});
    }
    return result;
}

} // namespace omega::body
