#include "omega/environment.hpp"

#include "omega/utf8.hpp"

#include <algorithm>
#include <set>

namespace omega::env {

using header::PrototypeHeader;
using header::SigItem;
using header::Slot;
using header::SlotSignature;

bool OperatorDictionary::is_operator(const std::string& keyword) const {
    return by_keyword.count(keyword) != 0;
}

std::vector<OperatorEntry> OperatorDictionary::entries(
    const std::string& keyword, header::OperatorArity arity) const {
    std::vector<OperatorEntry> out;
    auto it = by_keyword.find(keyword);
    if (it == by_keyword.end()) return out;
    for (const auto& e : it->second)
        if (e.info.arity == arity) out.push_back(e);
    return out;
}

bool OperatorDictionary::has_arity(const std::string& keyword,
                                   header::OperatorArity arity) const {
    return !entries(keyword, arity).empty();
}

std::optional<size_t> SignatureTrie::step(size_t node, const TrieEdge& edge) const {
    auto it = nodes[node].children.find(edge);
    if (it == nodes[node].children.end()) return std::nullopt;
    return it->second;
}

std::optional<size_t> SignatureTrie::walk(const std::vector<SigItem>& items) const {
    size_t node = 0;
    for (const auto& item : items) {
        TrieEdge edge;
        switch (item.kind) {
        case SigItem::Kind::Word:
            edge = {TrieEdge::Kind::Word, item.word};
            break;
        case SigItem::Kind::Receiver:
            edge = {TrieEdge::Kind::Receiver, ""};
            break;
        case SigItem::Kind::Param:
            edge = {TrieEdge::Kind::Arg, ""};
            break;
        }
        auto next = step(node, edge);
        if (!next) return std::nullopt;
        node = *next;
    }
    return node;
}

bool Environment::has_proto(const std::string& canonical) const {
    return prototypes.count(canonical) != 0;
}

const PrototypeHeader& Environment::proto(const std::string& canonical) const {
    return prototypes.at(canonical);
}

const Slot& Environment::slot(const SlotId& id) const {
    return prototypes.at(id.proto).slots.at(id.index);
}

namespace {

std::vector<std::string> keyword_canonicals(const SlotSignature& sig) {
    std::vector<std::string> out;
    out.reserve(sig.keywords.size());
    for (const auto& k : sig.keywords) out.push_back(canonical_name(k));
    return out;
}

bool is_single_letter_generic(const std::string& canonical) {
    auto d = utf8::decode(canonical, 0);
    return d && d->length == canonical.size() && starts_uppercase(canonical);
}

// Ancestor-side generic parameters accept any concrete redefinition type.
bool redefinition_type_ok(const Environment& env, const std::string& ancestor,
                          const TypeRef& ancestor_type, const TypeRef& child_type) {
    if (ancestor_type.kind == TypeRef::Kind::Named && ancestor_type.params.empty()) {
        const std::string canon = canonical_name(ancestor_type.name);
        if (classify_type_name(env, ancestor, canon) == TypeNameClass::Generic)
            return true;
    }
    return ancestor_type == child_type;
}

bool compatible_redefinition(const Environment& env, const std::string& ancestor,
                             const SlotSignature& base, const SlotSignature& redef) {
    if (base.params.size() != redef.params.size()) return false;
    if (base.receiver_position != redef.receiver_position) return false;
    if (base.receiver_delayed != redef.receiver_delayed) return false;
    for (size_t i = 0; i < base.params.size(); ++i) {
        if (base.params[i].delayed != redef.params[i].delayed) return false;
        if (base.params[i].type.has_value() != redef.params[i].type.has_value())
            return false;
        if (base.params[i].type &&
            !redefinition_type_ok(env, ancestor, *base.params[i].type,
                                  *redef.params[i].type))
            return false;
    }
    if (base.return_type.has_value() != redef.return_type.has_value()) return false;
    if (base.return_type &&
        !redefinition_type_ok(env, ancestor, *base.return_type, *redef.return_type))
        return false;
    return true;
}

void add_diag(std::vector<Diagnostic>& diags, Severity sev, std::string code,
              std::string message, const std::string& file, Span span = {}) {
    Diagnostic d;
    d.severity = sev;
    d.code = std::move(code);
    d.message = std::move(message);
    d.file = file;
    d.span = span;
    diags.push_back(std::move(d));
}

} // namespace

BuildResult build_environment(std::vector<PrototypeHeader> headers,
                              std::vector<GlyphBinding> glyphs) {
    BuildResult result;
    Environment& e = result.env;
    auto& diags = result.diagnostics;

    std::stable_sort(headers.begin(), headers.end(),
                     [](const PrototypeHeader& a, const PrototypeHeader& b) {
                         return canonical_name(a.name) < canonical_name(b.name);
                     });

    for (auto& h : headers) {
        const std::string canon = canonical_name(h.name);
        if (canon.empty()) continue;
        auto it = e.prototypes.find(canon);
        if (it != e.prototypes.end()) {
            add_diag(diags, Severity::Error, "NameCollision",
                     "prototype name '" + canon + "' is declared more than once (in '" +
                         it->second.source_path + "' and '" + h.source_path + "')",
                     h.source_path);
            continue;
        }
        e.prototypes.emplace(canon, std::move(h));
    }

    // Naming conventions: types uppercase, slot keywords and parameters not.
    for (const auto& [canon, proto] : e.prototypes) {
        if (!starts_uppercase(canon))
            add_diag(diags, Severity::Error, "NameConvention",
                     "prototype name '" + canon + "' must start with an uppercase letter",
                     proto.source_path);
        for (const auto& g : proto.generics)
            if (!starts_uppercase(canonical_name(g)))
                add_diag(diags, Severity::Error, "NameConvention",
                         "generic parameter '" + canonical_name(g) +
                             "' must start with an uppercase letter",
                         proto.source_path);
        for (const auto& slot : proto.slots) {
            for (const auto& kw : slot.signature.keywords) {
                const std::string k = canonical_name(kw);
                if (starts_uppercase(k))
                    add_diag(diags, Severity::Error, "NameConvention",
                             "slot keyword '" + k + "' must not start with an uppercase letter",
                             proto.source_path, slot.sig_span);
            }
            for (const auto& p : slot.signature.params)
                if (starts_uppercase(canonical_name(p.name)))
                    add_diag(diags, Severity::Error, "NameConvention",
                             "parameter '" + canonical_name(p.name) +
                                 "' must not start with an uppercase letter",
                             proto.source_path, slot.sig_span);
        }
    }

    // Inheritance graph; unknown parents and duplicate links are dropped.
    for (const auto& [canon, proto] : e.prototypes) {
        auto& plist = e.graph.parents[canon];
        for (const auto& link : proto.links) {
            const std::string parent = canonical_name(link.parent);
            if (!e.has_proto(parent)) {
                add_diag(diags, Severity::Error, "UnknownParent",
                         "'" + canon + "' inherits unknown prototype '" + parent + "'",
                         proto.source_path);
                continue;
            }
            plist.push_back({parent, link.polymorphic, link.eye_open});
            e.graph.children[parent].push_back(canon);
        }
    }

    // Cycle check; every link on a detected cycle is removed.
    {
        std::map<std::string, int> state; // 0 unvisited, 1 on stack, 2 done
        std::vector<std::string> stack;
        auto dfs = [&](auto&& self, const std::string& node) -> void {
            state[node] = 1;
            stack.push_back(node);
            auto& plist = e.graph.parents[node];
            for (size_t idx = 0; idx < plist.size();) {
                const std::string parent = plist[idx].parent;
                if (state[parent] == 1) {
                    std::string path;
                    auto at = std::find(stack.begin(), stack.end(), parent);
                    for (; at != stack.end(); ++at) path += *at + " -> ";
                    path += parent;
                    add_diag(diags, Severity::Error, "InheritanceCycle",
                             "inheritance cycle: " + path, e.proto(node).source_path);
                    plist.erase(plist.begin() + idx);
                    continue;
                }
                if (state[parent] == 0) self(self, parent);
                ++idx;
            }
            stack.pop_back();
            state[node] = 2;
        };
        for (const auto& [canon, _] : e.prototypes)
            if (state[canon] == 0) dfs(dfs, canon);
    }

    // Operator dictionary.
    for (const auto& [canon, proto] : e.prototypes) {
        for (size_t si = 0; si < proto.slots.size(); ++si) {
            const SlotSignature& sig = proto.slots[si].signature;
            if (!sig.op) continue;
            const std::string keyword = canonical_name(sig.keywords.front());
            auto& bucket = e.operators.by_keyword[keyword];
            for (const auto& existing : bucket) {
                if (existing.info.arity != sig.op->arity) continue;
                if (existing.info.priority != sig.op->priority ||
                    existing.info.assoc != sig.op->assoc ||
                    existing.info.commutative != sig.op->commutative) {
                    add_diag(diags, Severity::Error, "OperatorPropertyConflict",
                             "operator '" + keyword + "' declared in '" + canon +
                                 "' disagrees with the declaration in '" +
                                 existing.slot.proto + "'",
                             proto.source_path, proto.slots[si].sig_span);
                }
            }
            bucket.push_back({SlotId{canon, si}, *sig.op});
        }
    }

    // Signature derivation trie over Standard slots.
    for (const auto& [canon, proto] : e.prototypes) {
        for (size_t si = 0; si < proto.slots.size(); ++si) {
            const SlotSignature& sig = proto.slots[si].signature;
            if (sig.op) continue;
            const SlotId id{canon, si};
            size_t node = 0;
            e.trie.nodes[0].through.push_back(id);
            for (const auto& item : header::signature_items(sig)) {
                TrieEdge edge;
                switch (item.kind) {
                case SigItem::Kind::Word:
                    edge = {TrieEdge::Kind::Word, item.word};
                    break;
                case SigItem::Kind::Receiver:
                    edge = {TrieEdge::Kind::Receiver, ""};
                    break;
                case SigItem::Kind::Param:
                    edge = {TrieEdge::Kind::Arg, ""};
                    break;
                }
                auto it = e.trie.nodes[node].children.find(edge);
                if (it == e.trie.nodes[node].children.end()) {
                    e.trie.nodes.push_back(TrieNode{});
                    it = e.trie.nodes[node]
                             .children.emplace(edge, e.trie.nodes.size() - 1)
                             .first;
                }
                node = it->second;
                e.trie.nodes[node].through.push_back(id);
            }
            e.trie.nodes[node].terminal.push_back(id);
        }
    }

    // Redefinition compatibility along the lookup chain.
    for (const auto& [canon, proto] : e.prototypes) {
        for (size_t si = 0; si < proto.slots.size(); ++si) {
            const std::string key = header::canonical_key(proto.slots[si].signature);
            for (const auto& ancestor : lookup_order(e, canon)) {
                const PrototypeHeader& ap = e.proto(ancestor);
                for (const auto& aslot : ap.slots) {
                    if (header::canonical_key(aslot.signature) != key) continue;
                    if (!compatible_redefinition(e, ancestor, aslot.signature,
                                                 proto.slots[si].signature))
                        add_diag(diags, Severity::Error, "IncompatibleRedefinition",
                                 "slot '" + key + "' in '" + canon +
                                     "' does not match the signature inherited from '" +
                                     ancestor + "'",
                                 proto.source_path, proto.slots[si].sig_span);
                }
            }
        }
    }

    // Glyph program bindings: the key must name a slot of matching arity.
    for (auto& g : glyphs) {
        std::optional<size_t> found_arity;
        for (const auto& [canon, proto] : e.prototypes) {
            for (const auto& slot : proto.slots) {
                if (header::canonical_key(slot.signature) == g.key)
                    found_arity = header::placeholder_count(slot.signature);
            }
        }
        if (!found_arity) {
            add_diag(diags, Severity::Warning, "GlyphUnbound",
                     "glyph '" + g.key + "' matches no slot signature", g.source_path);
            continue;
        }
        if (*found_arity != g.arity) {
            add_diag(diags, Severity::Error, "GlyphArityMismatch",
                     "glyph '" + g.key + "' draws " + std::to_string(g.arity) +
                         " arguments but the slot has " + std::to_string(*found_arity),
                     g.source_path);
            continue;
        }
        e.glyphs[g.key] = std::move(g);
    }

    sort_diagnostics(diags);
    return result;
}

std::vector<std::string> lookup_order(const Environment& env, const std::string& proto) {
    std::vector<std::string> order;
    std::set<std::string> visited{proto};
    auto dfs = [&](auto&& self, const std::string& node) -> void {
        auto it = env.graph.parents.find(node);
        if (it == env.graph.parents.end()) return;
        for (const auto& link : it->second) {
            if (!visited.insert(link.parent).second) continue;
            order.push_back(link.parent);
            self(self, link.parent);
        }
    };
    dfs(dfs, proto);
    return order;
}

std::optional<Resolved> resolve_slot(const Environment& env,
                                     const std::string& receiver_type,
                                     const std::vector<std::string>& keywords) {
    auto match_in = [&](const std::string& proto) -> std::optional<Resolved> {
        auto it = env.prototypes.find(proto);
        if (it == env.prototypes.end()) return std::nullopt;
        for (size_t si = 0; si < it->second.slots.size(); ++si) {
            if (keyword_canonicals(it->second.slots[si].signature) == keywords)
                return Resolved{SlotId{proto, si}, &it->second.slots[si]};
        }
        return std::nullopt;
    };
    if (auto r = match_in(receiver_type)) return r;
    for (const auto& ancestor : lookup_order(env, receiver_type))
        if (auto r = match_in(ancestor)) return r;
    return std::nullopt;
}

std::optional<Resolved> resolve_by_key(const Environment& env,
                                       const std::string& receiver_type,
                                       const std::string& canonical_key) {
    auto match_in = [&](const std::string& proto) -> std::optional<Resolved> {
        auto it = env.prototypes.find(proto);
        if (it == env.prototypes.end()) return std::nullopt;
        for (size_t si = 0; si < it->second.slots.size(); ++si) {
            if (header::canonical_key(it->second.slots[si].signature) == canonical_key)
                return Resolved{SlotId{proto, si}, &it->second.slots[si]};
        }
        return std::nullopt;
    };
    if (auto r = match_in(receiver_type)) return r;
    for (const auto& ancestor : lookup_order(env, receiver_type))
        if (auto r = match_in(ancestor)) return r;
    return std::nullopt;
}

namespace {

bool path_is_prefix(const std::string& dir, const std::string& path) {
    if (dir.empty()) return false;
    std::string d = dir;
    if (d.back() != '/') d += '/';
    return path.compare(0, d.size(), d) == 0;
}

std::string parent_dir(const std::string& path) {
    auto pos = path.find_last_of('/');
    return pos == std::string::npos ? std::string() : path.substr(0, pos);
}

} // namespace

AccessDecision check_access(const Environment& env, const std::string& caller,
                            const SlotId& callee) {
    const Slot& slot = env.slot(callee);
    const header::AccessRule& rule = slot.signature.access;
    switch (rule.kind) {
    case header::AccessRule::Kind::Public:
        return {true, ""};
    case header::AccessRule::Kind::SelfOnly: {
        if (caller == callee.proto) return {true, ""};
        if (reachable(env, caller, callee.proto)) return {true, ""};
        return {false, "slot is restricted to '" + callee.proto + "' and its descendants"};
    }
    case header::AccessRule::Kind::Named: {
        for (const auto& n : rule.names)
            if (n == caller) return {true, ""};
        return {false, "caller '" + caller + "' is not in the slot's access list"};
    }
    case header::AccessRule::Kind::Directory: {
        if (!env.has_proto(caller)) return {false, "unknown caller prototype"};
        const std::string caller_path = env.proto(caller).source_path;
        const std::string base = parent_dir(env.proto(callee.proto).source_path);
        std::string dir = rule.directory;
        if (!base.empty()) dir = base + "/" + dir;
        if (path_is_prefix(dir, caller_path)) return {true, ""};
        return {false, "caller's file is outside the access directory '" +
                           rule.directory + "'"};
    }
    }
    return {true, ""};
}

AssertionSet collect_assertions(const Environment& env, const SlotId& slot_id) {
    AssertionSet out;
    const Slot& slot = env.slot(slot_id);
    const std::string key = header::canonical_key(slot.signature);

    std::vector<std::string> chain{slot_id.proto};
    for (const auto& a : lookup_order(env, slot_id.proto)) chain.push_back(a);

    std::set<std::string> ignored_pre, ignored_post;
    auto ignore_target = [](const std::string& text) -> std::optional<std::string> {
        if (text.rfind("ignore ", 0) == 0) {
            std::string rest = text.substr(7);
            while (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
            if (!rest.empty()) return rest;
        }
        return std::nullopt;
    };

    for (const auto& proto_name : chain) {
        const PrototypeHeader& proto = env.proto(proto_name);
        for (const auto& s : proto.slots) {
            if (header::canonical_key(s.signature) != key) continue;
            for (const auto& pre : s.signature.preconditions) {
                if (auto target = ignore_target(pre)) {
                    ignored_pre.insert(*target);
                    continue;
                }
                if (!ignored_pre.count(proto_name))
                    out.preconditions.emplace_back(proto_name, pre);
            }
            for (const auto& post : s.signature.postconditions) {
                if (auto target = ignore_target(post)) {
                    ignored_post.insert(*target);
                    continue;
                }
                if (!ignored_post.count(proto_name))
                    out.postconditions.emplace_back(proto_name, post);
            }
        }
    }
    return out;
}

namespace {

bool upward_path(const Environment& env, const std::string& src, const std::string& dst,
                 bool solid_only) {
    if (src == dst) return true;
    std::set<std::string> visited{src};
    std::vector<std::string> frontier{src};
    while (!frontier.empty()) {
        const std::string node = frontier.back();
        frontier.pop_back();
        auto it = env.graph.parents.find(node);
        if (it == env.graph.parents.end()) continue;
        for (const auto& link : it->second) {
            if (solid_only && !link.polymorphic) continue;
            if (link.parent == dst) return true;
            if (visited.insert(link.parent).second) frontier.push_back(link.parent);
        }
    }
    return false;
}

} // namespace

bool assignable(const Environment& env, const std::string& src, const std::string& dst) {
    return upward_path(env, src, dst, true);
}

bool reachable(const Environment& env, const std::string& src, const std::string& dst) {
    return upward_path(env, src, dst, false);
}

TypeNameClass classify_type_name(const Environment& env,
                                 const std::string& declaring_proto,
                                 const std::string& canonical) {
    if (env.has_proto(declaring_proto)) {
        for (const auto& g : env.proto(declaring_proto).generics)
            if (canonical_name(g) == canonical) return TypeNameClass::Generic;
    }
    if (env.has_proto(canonical)) return TypeNameClass::Prototype;
    if (is_single_letter_generic(canonical)) return TypeNameClass::Generic;
    return TypeNameClass::Unknown;
}

} // namespace omega::env
