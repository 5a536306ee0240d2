#pragma once

#include "omega/diag.hpp"
#include "omega/environment.hpp"
#include "omega/header.hpp"
#include "omega/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace omega::body {

struct ParseError : std::runtime_error {
    ParseError(std::string code, Span span, const std::string& what)
        : std::runtime_error(what), code(std::move(code)), span(span) {}
    std::string code;
    Span span;
};

// ---------------------------------------------------------------------------
// Tokens. Slot bodies are plain text; the self/exact-type/assignment marks
// are ordinary codepoints (U+25CF, U+229A, U+2190), never reserved tags.

struct BodyToken {
    enum class Kind {
        Word,       // identifier or operator symbol run
        Number,
        StringLit,
        Punct,      // ( ) { } [ ] , : \n
        Arrow,      // U+2190
        SelfMark,   // U+25CF
        ExactTypeMark, // U+229A
        External,   // `name`
        Matrix,     // opaque two-dimensional literal [[ ... ]]
    };
    Kind kind = Kind::Word;
    std::string text;
    bool uppercase = false; // Word: first codepoint is an uppercase letter
    char punct = 0;
    Span span;
};

std::vector<BodyToken> tokenize_body(const std::string& text);

// ---------------------------------------------------------------------------
// Untyped expression tree.

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct LocalDecl {
    std::string name; // canonical; bodies carry no formatting
    TypeRef type;
    Span span;
};

struct Grp {
    std::vector<LocalDecl> locals;
    std::vector<ExprPtr> bodies;
};

struct SelfRef {};
struct NumberLit { std::string text; };
struct StringLitNode { std::string text; };
struct ExternalRef { std::string text; };
struct MatrixLit { std::string text; };
struct TypeLit { TypeRef type; };
struct Group { Grp grp; };                        // '(' Grp ')' with one body
struct Tuple { std::vector<ExprPtr> elements; };  // '(' Body {',' Body} ')', >= 2
struct Block {
    std::vector<LocalDecl> declared; // '[' Loc ']' prefix
    Grp grp;
};
struct LocalRead { std::string name; };

struct Message {
    std::vector<env::SlotId> candidates; // same canonical key, resolver-filtered
    std::string key;                     // canonical placeholder key
    ExprPtr receiver;                    // null = implicit self
    std::vector<ExprPtr> args;           // in signature order
    size_t keyword_words = 0;            // Word edges consumed at this level
};

// Rare form "idf_local Arg": applies the value of a local to one argument.
struct ApplyLocal {
    std::string name;
    ExprPtr arg;
};

struct OperatorApply {
    std::string op;
    header::OperatorArity arity = header::OperatorArity::BinaryInfix;
    int priority = 0;
    header::Assoc assoc = header::Assoc::Left;
    bool commutative = false;
    ExprPtr lhs;
    ExprPtr rhs; // null for unary forms
};

struct Assign {
    struct Target {
        std::string name;
        Span span;
    };
    std::vector<Target> targets;
    ExprPtr value;
};

struct Expr {
    Span span;
    std::variant<SelfRef, NumberLit, StringLitNode, ExternalRef, MatrixLit, TypeLit,
                 Group, Tuple, Block, LocalRead, Message, ApplyLocal, OperatorApply,
                 Assign>
        node;

    // Filled in by the type resolver.
    std::optional<TypeRef> type;
    std::optional<env::SlotId> bound;                    // Message / OperatorApply
    std::vector<std::optional<env::SlotId>> target_slots; // Assign, per target
    bool operands_swapped = false;                        // commutative retry hit
};

template <typename T> T* as(ExprPtr& e) { return std::get_if<T>(&e->node); }
template <typename T> const T* as(const ExprPtr& e) { return std::get_if<T>(&e->node); }

// ---------------------------------------------------------------------------
// Phrase resolution.

struct ScopeEntry {
    std::string name;
    std::optional<TypeRef> type; // untyped delayed parameters have none
};

struct PhraseScope {
    const env::Environment* environment = nullptr;
    std::string current_proto; // empty in a scratch context
    std::vector<ScopeEntry> locals; // innermost bindings last
    std::vector<std::string> slot_generics; // generic names visible in the slot
};

// One element of a phrase: a bare word or a pre-parsed atom.
struct PhraseElem {
    ExprPtr atom; // null for words
    std::string word;
    bool uppercase = false;
    Span span;
};

struct ResolveResult {
    ExprPtr expr; // null when resolution failed
    std::vector<Diagnostic> diagnostics;
};

// CYK-style resolution of a word/atom phrase against the signature trie.
// Complete interpretations are ranked by the number of words consumed as
// top-level keywords; a unique maximum wins, ties are reported as
// TrueAmbiguity, none as NoInterpretation.
ResolveResult resolve_phrase(const std::vector<PhraseElem>& phrase,
                             const PhraseScope& scope);

// ---------------------------------------------------------------------------
// Operator segmentation and precedence trees.

struct OpOccurrence {
    std::string word;
    header::OperatorArity arity = header::OperatorArity::BinaryInfix;
    int priority = 0;
    header::Assoc assoc = header::Assoc::Left;
    bool commutative = false;
    Span span;
};

struct OperandSegment {
    std::vector<PhraseElem> elems;
    std::vector<OpOccurrence> prefix;  // in source order, outermost first
    std::vector<OpOccurrence> postfix; // in source order, innermost first
};

struct OpSplit {
    std::vector<OperandSegment> operands;
    std::vector<OpOccurrence> binaries; // operands.size() == binaries.size() + 1
};

// Splits an element sequence at dictionary operator words. Throws ParseError
// with DanglingOperator when a binary operator lacks an operand side and no
// unary form applies.
OpSplit split_operators(const std::vector<PhraseElem>& elems,
                        const env::OperatorDictionary& ops);

// Precedence construction over resolved operands. Higher digit binds
// tighter; equal priorities fold by shared associativity. An equal-priority
// left/right mix competing for one operand throws IndeterministicAssociativity.
ExprPtr build_operator_tree(std::vector<ExprPtr> operands,
                            const std::vector<OpOccurrence>& occurrences);

// ---------------------------------------------------------------------------
// Whole-body parsing.

struct ParsedBody {
    Grp grp;
    std::vector<Diagnostic> diagnostics;
};

// Parses a slot body: statement structure, local declarations, operator
// segmentation and phrase resolution, with the signature's parameters (and
// its generic names) as the initial scope.
ParsedBody parse_body(const std::string& text, const header::SlotSignature& signature,
                      const PhraseScope& outer);

// Scope assembled from a slot signature (parameters and generics).
PhraseScope scope_for_slot(const env::Environment& environment,
                           const std::string& proto,
                           const header::SlotSignature& signature);

} // namespace omega::body
