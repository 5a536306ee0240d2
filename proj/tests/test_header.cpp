#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omega/header.hpp"
#include "omega/tag_codec.hpp"

#include <string>

using namespace omega;
using namespace omega::header;
using tags::TagKind;
using tags::TagToken;

namespace {

TagToken text(const std::string& s) { return TagToken::make_text(s); }
TagToken tag(TagKind k, int digit = -1) { return TagToken::make_tag(k, 0, digit); }

FormattedName styled(std::initializer_list<NameSegment> segs) {
    FormattedName n;
    n.segments = segs;
    return n;
}

SlotSignature sig_of(std::vector<TagToken> toks) { return parse_signature(toks); }

} // namespace

TEST_CASE("canonical_name strips styles and keeps spaces") {
    CHECK(canonical_name(styled({{"ℕ", Style::Normal}, {"32", Style::Subscript}})) ==
          "ℕ32");
    CHECK(canonical_name(FormattedName("ℕ32")) == "ℕ32");
    CHECK(canonical_name(FormattedName("add first")) == "add first");
}

TEST_CASE("canonical_name is style-invariant and idempotent") {
    auto a = styled({{"if", Style::Normal}});
    auto b = styled({{"i", Style::Normal}, {"f", Style::Superscript}});
    CHECK(canonical_name(a) == canonical_name(b));
    CHECK(canonical_name(FormattedName(canonical_name(a))) == canonical_name(a));
}

TEST_CASE("standard signature: receiver, one parameter, return type") {
    auto sig = sig_of({tag(TagKind::ReceiverShared),
                       text(" factorial (n: ℤ) : ℤ")});
    CHECK_FALSE(sig.is_operator());
    REQUIRE(sig.keywords.size() == 1);
    CHECK(canonical_name(sig.keywords[0]) == "factorial");
    CHECK(sig.receiver_position == 0);
    CHECK(sig.receiver_kind == ReceiverKind::Shared);
    REQUIRE(sig.params.size() == 1);
    CHECK(canonical_name(sig.params[0].name) == "n");
    CHECK(sig.params[0].type->is_named("ℤ"));
    CHECK_FALSE(sig.params[0].delayed);
    REQUIRE(sig.return_type.has_value());
    CHECK(sig.return_type->is_named("ℤ"));
    CHECK(canonical_key(sig) == "A0 factorial A1");
}

TEST_CASE("operator signature with delayed parameter") {
    auto sig = sig_of({tag(TagKind::LeftAssoc, 2), tag(TagKind::ReceiverShared),
                       text(" && {other: Boolean} : Boolean")});
    REQUIRE(sig.is_operator());
    CHECK(sig.op->priority == 2);
    CHECK(sig.op->assoc == Assoc::Left);
    CHECK_FALSE(sig.op->commutative);
    CHECK(sig.op->arity == OperatorArity::BinaryInfix);
    REQUIRE(sig.params.size() == 1);
    CHECK(sig.params[0].delayed);
    CHECK(sig.params[0].type->is_named("Boolean"));
}

TEST_CASE("commutative operator with exact-receiver parameter") {
    auto sig = sig_of({tag(TagKind::LeftAssoc, 7), tag(TagKind::CommutativityOn),
                       tag(TagKind::ReceiverShared), text(" + (other: "),
                       tag(TagKind::ExactType), text(") : "), tag(TagKind::ExactType)});
    REQUIRE(sig.is_operator());
    CHECK(sig.op->priority == 7);
    CHECK(sig.op->commutative);
    CHECK(sig.params[0].type->kind == TypeRef::Kind::ExactReceiver);
    CHECK(sig.return_type->kind == TypeRef::Kind::ExactReceiver);
}

TEST_CASE("keyword before the receiver and receiver-last forms") {
    auto nw = sig_of({text("new "), tag(TagKind::ReceiverShared), text(" : "),
                      tag(TagKind::ExactType)});
    CHECK(nw.receiver_position == 1);
    CHECK(canonical_key(nw) == "new A0");

    auto sq = sig_of({tag(TagKind::ReceiverShared), text(" sqrt : ℝ"),
                      tag(TagKind::SubscriptStart), text("32"),
                      tag(TagKind::SubscriptStop)});
    CHECK(sq.receiver_position == 0);
    CHECK(canonical_key(sq) == "A0 sqrt");
    CHECK(sq.return_type->is_named("ℝ32"));
}

TEST_CASE("interleaved keywords and parameters") {
    auto sig = sig_of({text("if "), tag(TagKind::ReceiverShared),
                       text(" then {t: T} else {e: T} : T")});
    REQUIRE(sig.keywords.size() == 3);
    CHECK(sig.receiver_position == 1);
    CHECK(sig.params[0].after_keyword == 2);
    CHECK(sig.params[1].after_keyword == 3);
    CHECK(canonical_key(sig) == "if A0 then A1 else A2");
    CHECK(receiver_placeholder_index(sig) == 0);
    CHECK(placeholder_count(sig) == 3);
}

TEST_CASE("delayed receiver and untyped delayed parameter") {
    auto sig = sig_of({text("while {"), tag(TagKind::ReceiverShared),
                       text("} do {body}")});
    CHECK(sig.receiver_delayed);
    CHECK(sig.receiver_position == 1);
    REQUIRE(sig.params.size() == 1);
    CHECK(sig.params[0].delayed);
    CHECK_FALSE(sig.params[0].type.has_value());
    CHECK(canonical_key(sig) == "while A0 do A1");
}

TEST_CASE("multi-word keywords form one keyword run") {
    auto sig = sig_of({tag(TagKind::ReceiverShared), text(" add first (x: ℤ)")});
    REQUIRE(sig.keywords.size() == 1);
    CHECK(canonical_name(sig.keywords[0]) == "add first");
    CHECK(canonical_key(sig) == "A0 add first A1");
}

TEST_CASE("signature error cases") {
    CHECK_THROWS_AS(sig_of({text("orphan (x: T)")}), HeaderError);
    try {
        sig_of({text("orphan (x: T)")});
    } catch (const HeaderError& e) {
        CHECK(e.code == "MissingReceiverMark");
    }
    try {
        sig_of({tag(TagKind::ReceiverShared), text(" a "), tag(TagKind::ReceiverShared)});
    } catch (const HeaderError& e) {
        CHECK(e.code == "MultipleReceiverMarks");
    }
    try {
        sig_of({tag(TagKind::LeftAssoc, 3), tag(TagKind::ReceiverShared),
                text(" one two (x: T)")});
    } catch (const HeaderError& e) {
        CHECK(e.code == "OperatorWithManyKeywords");
    }
}

namespace {

PrototypeHeader pixel_header() {
    PrototypeHeader h;
    h.name = FormattedName("Pixel");
    h.links.push_back({FormattedName("Clone"), true, false});
    h.links.push_back({FormattedName("Print"), true, true});
    h.comments.push_back("a point on the screen");

    auto attr = [](const char* name) {
        Slot s;
        s.signature.keywords = {FormattedName(name)};
        s.signature.receiver_position = 0;
        s.signature.receiver_kind = ReceiverKind::Cloned;
        s.signature.return_type = TypeRef::named("ℤ");
        return s;
    };
    h.slots.push_back(attr("x"));
    h.slots.push_back(attr("y"));

    Slot setter;
    setter.signature.keywords = {FormattedName("x"), FormattedName("y")};
    setter.signature.receiver_position = 0;
    setter.signature.params = {
        {FormattedName("px"), TypeRef::named("ℤ"), false, 1},
        {FormattedName("py"), TypeRef::named("ℤ"), false, 2},
    };
    setter.signature.return_type = TypeRef::exact_receiver();
    setter.raw_body = "x ← y ← (px, py)\n●";
    h.slots.push_back(setter);

    Slot nw;
    nw.signature.keywords = {FormattedName("new")};
    nw.signature.receiver_position = 1;
    nw.signature.return_type = TypeRef::exact_receiver();
    nw.raw_body = "clone";
    h.slots.push_back(nw);

    Slot dist;
    dist.signature.keywords = {FormattedName("distance")};
    dist.signature.receiver_position = 0;
    dist.signature.params = {{FormattedName("other"), TypeRef::exact_receiver(), false, 1}};
    dist.signature.return_type = TypeRef::named("ℝ32");
    dist.signature.preconditions.push_back("other ≠ ●");
    dist.raw_body = "0";
    h.slots.push_back(dist);
    return h;
}

} // namespace

TEST_CASE("prototype header round trip through bytes") {
    PrototypeHeader original = pixel_header();
    auto tokens = write_prototype(original);
    const std::string bytes = tags::encode_stream(tokens);
    auto decoded = tags::decode_stream(bytes);
    PrototypeHeader back = read_prototype(decoded);

    CHECK(headers_equivalent(original, back));
    REQUIRE(back.slots.size() == 5);
    CHECK(back.slots[0].signature.receiver_kind == ReceiverKind::Cloned);
    CHECK(back.slots[1].signature.receiver_kind == ReceiverKind::Cloned);
    CHECK(back.slots[0].is_attribute());
    CHECK_FALSE(back.slots[2].is_attribute());
    CHECK(back.comments.size() == 1);
    CHECK(back.links.size() == 2);
    CHECK(back.links[1].eye_open);

    // a second pass is byte-identical
    CHECK(tags::encode_stream(write_prototype(back)) == bytes);
}

TEST_CASE("minimal prototype: name only") {
    auto toks = std::vector<TagToken>{tag(TagKind::PrototypeBegin), text("Empty\n")};
    auto h = read_prototype(toks);
    CHECK(canonical_name(h.name) == "Empty");
    CHECK(h.slots.empty());
    CHECK(h.links.empty());
}

TEST_CASE("generic parameters on the prototype name") {
    auto toks = std::vector<TagToken>{tag(TagKind::PrototypeBegin),
                                      text("Collection(V)\n")};
    auto h = read_prototype(toks);
    CHECK(canonical_name(h.name) == "Collection");
    REQUIRE(h.generics.size() == 1);
    CHECK(canonical_name(h.generics[0]) == "V");
}

TEST_CASE("access specifications") {
    auto toks = std::vector<TagToken>{
        tag(TagKind::PrototypeBegin), text("P\n"),
        tag(TagKind::SlotBegin), tag(TagKind::ReceiverShared), text(" f : ℤ"),
        tag(TagKind::AccessSpec), text("s"),
        tag(TagKind::BodyBegin), text("\n1\n"),
        tag(TagKind::SlotBegin), tag(TagKind::ReceiverShared), text(" g : ℤ"),
        tag(TagKind::AccessSpec), text("n Main, Pixel"),
        tag(TagKind::BodyBegin), text("\n2\n"),
        tag(TagKind::SlotBegin), tag(TagKind::ReceiverShared), text(" h : ℤ"),
        tag(TagKind::AccessSpec), text("d util"),
        tag(TagKind::BodyBegin), text("\n3\n"),
    };
    auto h = read_prototype(toks);
    REQUIRE(h.slots.size() == 3);
    CHECK(h.slots[0].signature.access.kind == AccessRule::Kind::SelfOnly);
    CHECK(h.slots[1].signature.access.kind == AccessRule::Kind::Named);
    CHECK(h.slots[1].signature.access.names ==
          std::vector<std::string>{"Main", "Pixel"});
    CHECK(h.slots[2].signature.access.kind == AccessRule::Kind::Directory);
    CHECK(h.slots[2].signature.access.directory == "util");
}

TEST_CASE("a tag inside the body region is rejected") {
    auto toks = std::vector<TagToken>{
        tag(TagKind::PrototypeBegin), text("P\n"),
        tag(TagKind::SlotBegin), tag(TagKind::ReceiverShared), text(" f : ℤ"),
        tag(TagKind::BodyBegin), text("\n1 "),
        tag(TagKind::ReceiverSelf), text(" 2\n"),
    };
    try {
        read_prototype(toks);
        FAIL("expected TagInBody");
    } catch (const HeaderError& e) {
        CHECK(e.code == "TagInBody");
    }
}

TEST_CASE("duplicate slot keywords are rejected") {
    auto toks = std::vector<TagToken>{
        tag(TagKind::PrototypeBegin), text("P\n"),
        tag(TagKind::SlotBegin), tag(TagKind::ReceiverShared), text(" f : ℤ"),
        tag(TagKind::BodyBegin), text("\n1\n"),
        tag(TagKind::SlotBegin), tag(TagKind::ReceiverShared), text(" f : ℤ"),
        tag(TagKind::BodyBegin), text("\n2\n"),
    };
    try {
        read_prototype(toks);
        FAIL("expected DuplicateSlotKeywords");
    } catch (const HeaderError& e) {
        CHECK(e.code == "DuplicateSlotKeywords");
    }
}

TEST_CASE("assertion zones are captured verbatim") {
    auto toks = std::vector<TagToken>{
        tag(TagKind::PrototypeBegin), text("P\n"),
        tag(TagKind::SlotBegin), tag(TagKind::ReceiverShared),
        text(" at (i: ℤ) put (v: ℤ)"),
        tag(TagKind::PreconditionBegin), text("i ≥ 1"),
        tag(TagKind::PreconditionBegin), text("i ≤ count"),
        tag(TagKind::PostconditionBegin), text("count = old count"),
        tag(TagKind::BodyBegin), text("\n\n"),
    };
    auto h = read_prototype(toks);
    REQUIRE(h.slots.size() == 1);
    const auto& sig = h.slots[0].signature;
    CHECK(sig.preconditions ==
          std::vector<std::string>{"i ≥ 1", "i ≤ count"});
    CHECK(sig.postconditions == std::vector<std::string>{"count = old count"});
    CHECK(h.slots[0].raw_body == "");
}
