#pragma once

#include "omega/diag.hpp"
#include "omega/names.hpp"
#include "omega/tag_codec.hpp"
#include "omega/types.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace omega::header {

enum class ReceiverKind { Shared, Cloned };
enum class Assoc { Left, Right };
enum class OperatorArity { BinaryInfix, UnaryPrefix, UnaryPostfix };

// Higher priority binds tighter.
struct OperatorInfo {
    int priority = 0; // 0..9
    Assoc assoc = Assoc::Left;
    bool commutative = false;
    OperatorArity arity = OperatorArity::BinaryInfix;
    bool operator==(const OperatorInfo&) const = default;
};

struct Parameter {
    FormattedName name;
    std::optional<TypeRef> type; // delayed parameters may omit the type
    bool delayed = false;
    size_t after_keyword = 0;    // number of keywords preceding this parameter
    bool operator==(const Parameter&) const = default;
};

struct AccessRule {
    enum class Kind { Public, SelfOnly, Named, Directory };
    Kind kind = Kind::Public;
    std::vector<std::string> names; // Named: canonical prototype names
    std::string directory;          // Directory: relative to the declaring file
    bool operator==(const AccessRule&) const = default;
};

struct SlotSignature {
    std::vector<FormattedName> keywords; // maximal word runs, in order
    size_t receiver_position = 0;        // 0..keywords.size()
    ReceiverKind receiver_kind = ReceiverKind::Shared;
    bool receiver_delayed = false;
    std::vector<Parameter> params;
    std::optional<TypeRef> return_type;
    std::optional<OperatorInfo> op; // nullopt = Standard category
    AccessRule access;
    std::vector<std::string> preconditions;  // zone text, verbatim
    std::vector<std::string> postconditions;

    bool is_operator() const { return op.has_value(); }
    bool operator==(const SlotSignature&) const = default;
};

// Positional view of a signature. Keywords contribute one item per word
// ("add first" yields two), the receiver and each parameter one item each.
struct SigItem {
    enum class Kind { Word, Receiver, Param };
    Kind kind = Kind::Word;
    std::string word;       // Word
    size_t param_index = 0; // Param
};

std::vector<SigItem> signature_items(const SlotSignature& sig);

// Placeholder key, e.g. "A0 div A1" or "if A0 then A1 else A2". Doubles as
// the dictionary key for graphical operator programs.
std::string canonical_key(const SlotSignature& sig);

// Receiver plus parameters, in textual order.
size_t placeholder_count(const SlotSignature& sig);
size_t receiver_placeholder_index(const SlotSignature& sig);

struct Slot {
    SlotSignature signature;
    std::optional<std::string> raw_body; // absent for attributes
    size_t body_offset = 0;              // file offset of the body text
    Span sig_span;

    bool is_attribute() const { return !raw_body.has_value(); }
};

struct InheritLink {
    FormattedName parent;
    bool polymorphic = true; // solid link; false = dotted implementation link
    bool eye_open = false;
};

struct PrototypeHeader {
    FormattedName name;
    std::vector<FormattedName> generics;
    std::vector<InheritLink> links; // declaration order is significant
    std::vector<Slot> slots;
    std::vector<std::string> comments;

    // Filled by the workspace loader.
    std::string source_path;
    std::string file_text;
};

// Structural comparison ignoring offsets and loader metadata.
bool headers_equivalent(const PrototypeHeader& a, const PrototypeHeader& b);

struct HeaderError : std::runtime_error {
    HeaderError(std::string code, size_t offset, const std::string& what);
    std::string code; // MalformedHeader, DuplicateSlotKeywords, TagInBody, ...
    size_t offset;
};

// Phase 1: reads one decoded prototype file.
PrototypeHeader read_prototype(const std::vector<tags::TagToken>& tokens);

// Parses the token slice of a single slot header (SlotBegin..BodyBegin
// exclusive at both ends).
SlotSignature parse_signature(const std::vector<tags::TagToken>& tokens);

// Canonical re-encoder: fixed section order (name, links, comments, slots).
std::vector<tags::TagToken> write_prototype(const PrototypeHeader& header);

} // namespace omega::header
