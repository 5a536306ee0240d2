#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace omega::tags {

// Reserved two-byte UTF-8 range 0xCB80..0xCBBF (codepoints U+02C0..U+02FF),
// 64 pairs total. Assignments are listed in docs/format.md.
inline constexpr uint8_t kLeadByte = 0xCB;
inline constexpr uint8_t kFirstTail = 0x80;
inline constexpr uint8_t kLastTail = 0xBF;
inline constexpr char32_t kFirstCodepoint = 0x02C0;
inline constexpr char32_t kLastCodepoint = 0x02FF;

enum class TagKind : uint8_t {
    ReceiverSelf,       // CB99
    ReceiverShared,     // CB91
    ReceiverCloned,     // CB90
    ExactType,          // CB9A
    LeftAssoc,          // CBB1 followed by ASCII digit '0'..'9'
    RightAssoc,         // CBB2 followed by ASCII digit '0'..'9'
    CommutativityOn,    // CBA0
    SuperscriptStart,   // CB84
    SuperscriptStop,    // CB86
    SubscriptStart,     // CB85
    SubscriptStop,      // CB87
    AssignmentArrow,    // CBBF

    // Structural markers used by the header layout.
    PrototypeBegin,     // CB80
    InheritLinkSolid,   // CB81
    InheritLinkDotted,  // CB82
    EyeOpen,            // CB83
    SlotBegin,          // CB88
    BodyBegin,          // CB89
    CommentBegin,       // CB8A
    CommentEnd,         // CB8B
    PreconditionBegin,  // CB8C
    PostconditionBegin, // CB8D
    AccessSpec,         // CB8E
};

const char* tag_kind_name(TagKind kind);

enum class CodecErrorCode {
    NotReservedRange,
    UnassignedTag,
    InvalidUtf8,
    ReservedInText,
    MissingPriorityDigit,
};

struct CodecError : std::runtime_error {
    CodecError(CodecErrorCode code, size_t offset, const std::string& what);
    CodecErrorCode code;
    size_t offset;
};

struct TagToken {
    enum class Type { Text, Tag };

    Type type = Type::Text;
    std::string text;     // Text only; raw UTF-8 bytes
    TagKind kind{};       // Tag only
    int digit = -1;       // LeftAssoc / RightAssoc payload, 0..9
    size_t offset = 0;    // byte offset in the decoded stream

    static TagToken make_text(std::string t, size_t offset = 0);
    static TagToken make_tag(TagKind kind, size_t offset = 0, int digit = -1);

    bool same_content(const TagToken& other) const;
};

// Maps a reserved byte pair to its kind. Throws CodecError with
// NotReservedRange outside [0xCB80..0xCBBF] and UnassignedTag for
// reserved-but-unallocated pairs.
TagKind classify_tag(uint8_t lead, uint8_t tail);

// Byte encoding of a kind (without any priority digit payload).
std::pair<uint8_t, uint8_t> tag_bytes(TagKind kind);

// Splits a byte stream into maximal text runs and tags. The concatenation
// of the results reproduces the input byte for byte.
std::vector<TagToken> decode_stream(std::string_view bytes);

std::string encode_stream(const std::vector<TagToken>& tokens);

} // namespace omega::tags
