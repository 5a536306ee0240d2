#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omega/tag_codec.hpp"
#include "omega/utf8.hpp"

#include <random>
#include <string>

using namespace omega;
using tags::CodecError;
using tags::CodecErrorCode;
using tags::TagKind;
using tags::TagToken;

namespace {

std::string bytes(std::initializer_list<int> list) {
    std::string out;
    for (int b : list) out.push_back(static_cast<char>(b));
    return out;
}

// Valid, tag-free text with a few multi-byte codepoints thrown in.
std::string random_text(std::mt19937& rng) {
    static const char32_t pool[] = {U'a', U'b', U'z', U' ', U'\n', U'0',
                                    0x2124 /* ℤ */, 0x0394 /* Δ */, 0x4E2D,
                                    0x1F600, 0x2190 /* ← */, 0x25CF /* ● */};
    std::uniform_int_distribution<size_t> len(1, 12);
    std::uniform_int_distribution<size_t> pick(0, std::size(pool) - 1);
    std::string out;
    const size_t n = len(rng);
    for (size_t i = 0; i < n; ++i) utf8::append(out, pool[pick(rng)]);
    return out;
}

std::vector<TagToken> random_tokens(std::mt19937& rng) {
    static const TagKind kinds[] = {
        TagKind::ReceiverSelf,   TagKind::ReceiverShared,  TagKind::ReceiverCloned,
        TagKind::ExactType,      TagKind::LeftAssoc,       TagKind::RightAssoc,
        TagKind::CommutativityOn, TagKind::SuperscriptStart, TagKind::SuperscriptStop,
        TagKind::SubscriptStart, TagKind::SubscriptStop,   TagKind::AssignmentArrow,
        TagKind::PrototypeBegin, TagKind::InheritLinkSolid, TagKind::InheritLinkDotted,
        TagKind::EyeOpen,        TagKind::SlotBegin,        TagKind::BodyBegin,
        TagKind::CommentBegin,   TagKind::CommentEnd,       TagKind::PreconditionBegin,
        TagKind::PostconditionBegin, TagKind::AccessSpec,
    };
    std::uniform_int_distribution<size_t> count(0, 20);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<size_t> pick(0, std::size(kinds) - 1);
    std::uniform_int_distribution<int> digit(0, 9);

    std::vector<TagToken> out;
    const size_t n = count(rng);
    bool last_was_text = false;
    for (size_t i = 0; i < n; ++i) {
        if (!last_was_text && coin(rng)) {
            out.push_back(TagToken::make_text(random_text(rng)));
            last_was_text = true;
        } else {
            const TagKind k = kinds[pick(rng)];
            const bool payload = k == TagKind::LeftAssoc || k == TagKind::RightAssoc;
            out.push_back(TagToken::make_tag(k, 0, payload ? digit(rng) : -1));
            last_was_text = false;
        }
    }
    return out;
}

} // namespace

TEST_CASE("published tag assignments classify as listed") {
    CHECK(tags::classify_tag(0xCB, 0x99) == TagKind::ReceiverSelf);
    CHECK(tags::classify_tag(0xCB, 0x91) == TagKind::ReceiverShared);
    CHECK(tags::classify_tag(0xCB, 0x90) == TagKind::ReceiverCloned);
    CHECK(tags::classify_tag(0xCB, 0x9A) == TagKind::ExactType);
    CHECK(tags::classify_tag(0xCB, 0xB1) == TagKind::LeftAssoc);
    CHECK(tags::classify_tag(0xCB, 0xB2) == TagKind::RightAssoc);
    CHECK(tags::classify_tag(0xCB, 0xA0) == TagKind::CommutativityOn);
    CHECK(tags::classify_tag(0xCB, 0x84) == TagKind::SuperscriptStart);
    CHECK(tags::classify_tag(0xCB, 0x86) == TagKind::SuperscriptStop);
    CHECK(tags::classify_tag(0xCB, 0x85) == TagKind::SubscriptStart);
    CHECK(tags::classify_tag(0xCB, 0x87) == TagKind::SubscriptStop);
    CHECK(tags::classify_tag(0xCB, 0xBF) == TagKind::AssignmentArrow);
}

TEST_CASE("classify_tag rejects pairs outside the reserved range") {
    CHECK_THROWS_WITH_AS(static_cast<void>(tags::classify_tag(0xCB, 0x41)),
                         "byte pair outside the reserved tag range", CodecError);
    try {
        static_cast<void>(tags::classify_tag(0xCC, 0x80));
        FAIL("expected CodecError");
    } catch (const CodecError& e) {
        CHECK(e.code == CodecErrorCode::NotReservedRange);
    }
}

TEST_CASE("classify_tag reports unassigned reserved pairs") {
    try {
        static_cast<void>(tags::classify_tag(0xCB, 0x8F));
        FAIL("expected CodecError");
    } catch (const CodecError& e) {
        CHECK(e.code == CodecErrorCode::UnassignedTag);
    }
}

TEST_CASE("decode splits text and tags") {
    const std::string input = "x " + bytes({0xCB, 0xBF}) + " 1";
    auto toks = tags::decode_stream(input);
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].type == TagToken::Type::Text);
    CHECK(toks[0].text == "x ");
    CHECK(toks[1].type == TagToken::Type::Tag);
    CHECK(toks[1].kind == TagKind::AssignmentArrow);
    CHECK(toks[1].offset == 2);
    CHECK(toks[2].text == " 1");
}

TEST_CASE("decode of empty input") {
    CHECK(tags::decode_stream("").empty());
}

TEST_CASE("associativity tags carry their digit") {
    auto toks = tags::decode_stream(bytes({0xCB, 0xB1}) + "7");
    REQUIRE(toks.size() == 1);
    CHECK(toks[0].kind == TagKind::LeftAssoc);
    CHECK(toks[0].digit == 7);

    CHECK_THROWS_AS(tags::decode_stream(bytes({0xCB, 0xB1}) + "x"), CodecError);
    CHECK_THROWS_AS(tags::decode_stream(bytes({0xCB, 0xB2})), CodecError);
}

TEST_CASE("encode basics") {
    CHECK(tags::encode_stream({TagToken::make_text("abc")}) == "abc");
    CHECK(tags::encode_stream({TagToken::make_tag(TagKind::CommutativityOn)}) ==
          bytes({0xCB, 0xA0}));
}

TEST_CASE("encode rejects reserved codepoints inside text") {
    try {
        tags::encode_stream({TagToken::make_text("a" + bytes({0xCB, 0x99}))});
        FAIL("expected CodecError");
    } catch (const CodecError& e) {
        CHECK(e.code == CodecErrorCode::ReservedInText);
    }
}

TEST_CASE("decode rejects malformed UTF-8 with its offset") {
    try {
        tags::decode_stream("ab" + bytes({0xC0, 0xAF}));
        FAIL("expected CodecError");
    } catch (const CodecError& e) {
        CHECK(e.code == CodecErrorCode::InvalidUtf8);
        CHECK(e.offset == 2);
    }
    // truncated sequence at the end
    CHECK_THROWS_AS(tags::decode_stream(bytes({0xE2, 0x82})), CodecError);
}

TEST_CASE("round trip: tokens -> bytes -> tokens") {
    std::mt19937 rng(20240901);
    for (int iter = 0; iter < 500; ++iter) {
        auto toks = random_tokens(rng);
        const std::string encoded = tags::encode_stream(toks);
        auto back = tags::decode_stream(encoded);
        REQUIRE(back.size() == toks.size());
        for (size_t i = 0; i < toks.size(); ++i)
            CHECK(back[i].same_content(toks[i]));
        CHECK(tags::encode_stream(back) == encoded);
    }
}

TEST_CASE("plain text files pass through unchanged") {
    std::mt19937 rng(7);
    for (int iter = 0; iter < 100; ++iter) {
        const std::string text = random_text(rng);
        auto toks = tags::decode_stream(text);
        CHECK(tags::encode_stream(toks) == text);
    }
}
