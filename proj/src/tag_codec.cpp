#include "omega/tag_codec.hpp"

#include "omega/utf8.hpp"

#include <array>
#include <optional>

namespace omega::tags {

namespace {

struct TagEntry {
    uint8_t tail;
    TagKind kind;
    const char* name;
};

// The full allocation table over the reserved range. Everything else in
// [CB80..CBBF] decodes as UnassignedTag.
constexpr std::array<TagEntry, 23> kTable = {{
    {0x99, TagKind::ReceiverSelf, "ReceiverSelf"},
    {0x91, TagKind::ReceiverShared, "ReceiverShared"},
    {0x90, TagKind::ReceiverCloned, "ReceiverCloned"},
    {0x9A, TagKind::ExactType, "ExactType"},
    {0xB1, TagKind::LeftAssoc, "LeftAssoc"},
    {0xB2, TagKind::RightAssoc, "RightAssoc"},
    {0xA0, TagKind::CommutativityOn, "CommutativityOn"},
    {0x84, TagKind::SuperscriptStart, "SuperscriptStart"},
    {0x86, TagKind::SuperscriptStop, "SuperscriptStop"},
    {0x85, TagKind::SubscriptStart, "SubscriptStart"},
    {0x87, TagKind::SubscriptStop, "SubscriptStop"},
    {0xBF, TagKind::AssignmentArrow, "AssignmentArrow"},
    {0x80, TagKind::PrototypeBegin, "PrototypeBegin"},
    {0x81, TagKind::InheritLinkSolid, "InheritLinkSolid"},
    {0x82, TagKind::InheritLinkDotted, "InheritLinkDotted"},
    {0x83, TagKind::EyeOpen, "EyeOpen"},
    {0x88, TagKind::SlotBegin, "SlotBegin"},
    {0x89, TagKind::BodyBegin, "BodyBegin"},
    {0x8A, TagKind::CommentBegin, "CommentBegin"},
    {0x8B, TagKind::CommentEnd, "CommentEnd"},
    {0x8C, TagKind::PreconditionBegin, "PreconditionBegin"},
    {0x8D, TagKind::PostconditionBegin, "PostconditionBegin"},
    {0x8E, TagKind::AccessSpec, "AccessSpec"},
}};

std::optional<TagEntry> entry_for_tail(uint8_t tail) {
    for (const auto& e : kTable)
        if (e.tail == tail) return e;
    return std::nullopt;
}

const TagEntry& entry_for_kind(TagKind kind) {
    for (const auto& e : kTable)
        if (e.kind == kind) return e;
    throw std::logic_error("unknown TagKind");
}

bool has_digit_payload(TagKind k) {
    return k == TagKind::LeftAssoc || k == TagKind::RightAssoc;
}

} // namespace

const char* tag_kind_name(TagKind kind) { return entry_for_kind(kind).name; }

CodecError::CodecError(CodecErrorCode code_, size_t offset_, const std::string& what_)
    : std::runtime_error(what_), code(code_), offset(offset_) {}

TagToken TagToken::make_text(std::string t, size_t offset_) {
    TagToken tok;
    tok.type = Type::Text;
    tok.text = std::move(t);
    tok.offset = offset_;
    return tok;
}

TagToken TagToken::make_tag(TagKind kind_, size_t offset_, int digit_) {
    TagToken tok;
    tok.type = Type::Tag;
    tok.kind = kind_;
    tok.digit = digit_;
    tok.offset = offset_;
    return tok;
}

bool TagToken::same_content(const TagToken& other) const {
    if (type != other.type) return false;
    if (type == Type::Text) return text == other.text;
    return kind == other.kind && digit == other.digit;
}

TagKind classify_tag(uint8_t lead, uint8_t tail) {
    if (lead != kLeadByte || tail < kFirstTail || tail > kLastTail)
        throw CodecError(CodecErrorCode::NotReservedRange, 0,
                         "byte pair outside the reserved tag range");
    auto e = entry_for_tail(tail);
    if (!e)
        throw CodecError(CodecErrorCode::UnassignedTag, 0,
                         "reserved byte pair has no assigned meaning");
    return e->kind;
}

std::pair<uint8_t, uint8_t> tag_bytes(TagKind kind) {
    return {kLeadByte, entry_for_kind(kind).tail};
}

std::vector<TagToken> decode_stream(std::string_view bytes) {
    std::vector<TagToken> out;
    std::string run;
    size_t run_start = 0;

    auto flush = [&](size_t) {
        if (!run.empty()) {
            out.push_back(TagToken::make_text(std::move(run), run_start));
            run.clear();
        }
    };

    size_t i = 0;
    while (i < bytes.size()) {
        auto d = utf8::decode(bytes, i);
        if (!d)
            throw CodecError(CodecErrorCode::InvalidUtf8, i, "malformed UTF-8 sequence");
        if (d->cp >= kFirstCodepoint && d->cp <= kLastCodepoint) {
            const uint8_t tail = static_cast<uint8_t>(bytes[i + 1]);
            auto e = entry_for_tail(tail);
            if (!e)
                throw CodecError(CodecErrorCode::UnassignedTag, i,
                                 "reserved byte pair has no assigned meaning");
            flush(i);
            int digit = -1;
            size_t len = d->length;
            if (has_digit_payload(e->kind)) {
                if (i + 2 >= bytes.size() || bytes[i + 2] < '0' || bytes[i + 2] > '9')
                    throw CodecError(CodecErrorCode::MissingPriorityDigit, i,
                                     "associativity tag requires a digit payload");
                digit = bytes[i + 2] - '0';
                len += 1;
            }
            out.push_back(TagToken::make_tag(e->kind, i, digit));
            i += len;
            run_start = i;
        } else {
            if (run.empty()) run_start = i;
            run.append(bytes.substr(i, d->length));
            i += d->length;
        }
    }
    flush(i);
    return out;
}

std::string encode_stream(const std::vector<TagToken>& tokens) {
    std::string out;
    for (const auto& tok : tokens) {
        if (tok.type == TagToken::Type::Text) {
            size_t i = 0;
            while (i < tok.text.size()) {
                auto d = utf8::decode(tok.text, i);
                if (!d)
                    throw CodecError(CodecErrorCode::InvalidUtf8, out.size() + i,
                                     "text run is not valid UTF-8");
                if (d->cp >= kFirstCodepoint && d->cp <= kLastCodepoint)
                    throw CodecError(CodecErrorCode::ReservedInText, out.size() + i,
                                     "text run contains a reserved codepoint");
                i += d->length;
            }
            out += tok.text;
        } else {
            auto [lead, tail] = tag_bytes(tok.kind);
            out.push_back(static_cast<char>(lead));
            out.push_back(static_cast<char>(tail));
            if (has_digit_payload(tok.kind)) {
                if (tok.digit < 0 || tok.digit > 9)
                    throw CodecError(CodecErrorCode::MissingPriorityDigit, out.size(),
                                     "associativity tag requires a digit 0..9");
                out.push_back(static_cast<char>('0' + tok.digit));
            }
        }
    }
    return out;
}

} // namespace omega::tags
