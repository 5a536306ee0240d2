#pragma once

#include "omega/diag.hpp"
#include "omega/header.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace omega::env {

// Location of a slot declaration: canonical prototype name + slot index.
struct SlotId {
    std::string proto;
    size_t index = 0;
    auto operator<=>(const SlotId&) const = default;
};

struct OperatorEntry {
    SlotId slot;
    header::OperatorInfo info;
};

// keyword -> declarations. Redeclarations of a keyword must agree on
// priority, associativity and commutativity per arity.
struct OperatorDictionary {
    std::map<std::string, std::vector<OperatorEntry>> by_keyword;

    bool is_operator(const std::string& keyword) const;
    std::vector<OperatorEntry> entries(const std::string& keyword,
                                       header::OperatorArity arity) const;
    bool has_arity(const std::string& keyword, header::OperatorArity arity) const;
};

struct TrieEdge {
    enum class Kind { Word, Receiver, Arg };
    Kind kind = Kind::Word;
    std::string word; // Word edges only
    auto operator<=>(const TrieEdge&) const = default;
};

struct TrieNode {
    std::map<TrieEdge, size_t> children;
    std::vector<SlotId> terminal; // slots whose full item path ends here
    std::vector<SlotId> through;  // slots whose path touches this node
};

// One derivation tree over every Standard slot in the environment. Edges are
// keyword words or the RECEIVER/ARG placeholders; shared prefixes share nodes.
struct SignatureTrie {
    std::vector<TrieNode> nodes{TrieNode{}}; // nodes[0] is the root

    const TrieNode& root() const { return nodes[0]; }
    std::optional<size_t> step(size_t node, const TrieEdge& edge) const;
    // Walks a full item path from the root; nullopt when absent.
    std::optional<size_t> walk(const std::vector<header::SigItem>& items) const;
};

struct ParentLink {
    std::string parent;
    bool polymorphic = true;
    bool eye_open = false;
};

struct InheritanceGraph {
    std::map<std::string, std::vector<ParentLink>> parents;
    std::map<std::string, std::vector<std::string>> children;
};

struct GlyphBinding {
    std::string key;
    size_t arity = 0;
    std::string source_path;
};

struct Environment {
    std::map<std::string, header::PrototypeHeader> prototypes;
    OperatorDictionary operators;
    SignatureTrie trie;
    InheritanceGraph graph;
    std::map<std::string, GlyphBinding> glyphs; // canonical key -> program binding

    bool has_proto(const std::string& canonical) const;
    const header::PrototypeHeader& proto(const std::string& canonical) const;
    const header::Slot& slot(const SlotId& id) const;
};

struct BuildResult {
    Environment env;
    std::vector<Diagnostic> diagnostics;
};

// Builds every index. Input order does not matter; unknown parents and
// cycles are reported and the offending links dropped.
BuildResult build_environment(std::vector<header::PrototypeHeader> headers,
                              std::vector<GlyphBinding> glyphs = {});

// Ancestors of `proto` in lookup order: declared-order depth-first, each
// parent visited fully before the next, first visit wins. Excludes `proto`.
std::vector<std::string> lookup_order(const Environment& env, const std::string& proto);

struct Resolved {
    SlotId id;
    const header::Slot* slot = nullptr;
};

// First slot whose canonical keyword sequence matches, scanning the receiver
// type itself and then its lookup order.
std::optional<Resolved> resolve_slot(const Environment& env,
                                     const std::string& receiver_type,
                                     const std::vector<std::string>& keywords);

std::optional<Resolved> resolve_by_key(const Environment& env,
                                       const std::string& receiver_type,
                                       const std::string& canonical_key);

struct AccessDecision {
    bool allowed = true;
    std::string reason;
};

AccessDecision check_access(const Environment& env, const std::string& caller,
                            const SlotId& callee);

struct AssertionSet {
    // (declaring prototype, zone text)
    std::vector<std::pair<std::string, std::string>> preconditions;
    std::vector<std::pair<std::string, std::string>> postconditions;
};

// The slot's own assertions plus those of every overridden ancestor slot, in
// lookup order. A zone reading "ignore <Proto>" suppresses what would be
// inherited from that prototype (for its zone kind) and is not itself listed.
AssertionSet collect_assertions(const Environment& env, const SlotId& slot);

// True when a value of type `src` may be assigned to `dst`: identical, or an
// all-polymorphic (solid) upward path exists.
bool assignable(const Environment& env, const std::string& src, const std::string& dst);

// Upward reachability across links of either kind.
bool reachable(const Environment& env, const std::string& src, const std::string& dst);

enum class TypeNameClass { Prototype, Generic, Unknown };

// How a canonical type name written inside `declaring_proto` resolves: a
// prototype, a generic parameter (prototype-level, or an implicit slot-level
// single-letter one), or nothing.
TypeNameClass classify_type_name(const Environment& env,
                                 const std::string& declaring_proto,
                                 const std::string& canonical);

} // namespace omega::env
