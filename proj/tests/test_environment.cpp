#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omega/environment.hpp"

#include <algorithm>
#include <random>

using namespace omega;
using namespace omega::env;
using header::PrototypeHeader;
using header::ReceiverKind;
using header::Slot;
using header::SlotSignature;

namespace {

PrototypeHeader proto(const std::string& name,
                      std::vector<std::pair<std::string, bool>> parents = {}) {
    PrototypeHeader h;
    h.name = FormattedName(name);
    h.source_path = "lib/" + name + ".omg";
    for (auto& [p, solid] : parents) h.links.push_back({FormattedName(p), solid, false});
    return h;
}

// keyword list given as canonical strings; receiver first; one ARG per '_'
Slot std_slot(std::vector<std::string> words, size_t receiver_pos = 0,
              const char* ret = nullptr) {
    Slot s;
    size_t keyword_index = 0;
    for (auto& w : words) {
        if (w == "_") {
            s.signature.params.push_back({FormattedName("a" + std::to_string(
                                              s.signature.params.size())),
                                          TypeRef::named("ℤ"), false, keyword_index});
        } else {
            s.signature.keywords.push_back(FormattedName(w));
            ++keyword_index;
        }
    }
    s.signature.receiver_position = receiver_pos;
    if (ret) s.signature.return_type = TypeRef::named(ret);
    s.raw_body = "0";
    return s;
}

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
    return std::any_of(diags.begin(), diags.end(),
                       [&](const Diagnostic& d) { return d.code == code; });
}

// The published lookup example: String inherits Hashable then Comparable,
// Hashable inherits Clone then Print, Print and Comparable both reach Utils.
std::vector<PrototypeHeader> string_corpus() {
    std::vector<PrototypeHeader> headers;
    headers.push_back(proto("Clone"));
    headers.push_back(proto("Utils"));
    headers.push_back(proto("Print", {{"Utils", false}}));
    headers.push_back(proto("Hashable", {{"Clone", true}, {"Print", true}}));
    headers.push_back(proto("Comparable", {{"Utils", false}}));
    headers.push_back(proto("String", {{"Hashable", true}, {"Comparable", true}}));
    headers.push_back(proto("Boolean", {{"Print", false}, {"Utils", false}}));

    auto& clone_proto = headers[0];
    Slot clone_slot = std_slot({"clone"});
    clone_slot.signature.return_type = TypeRef::exact_receiver();
    clone_proto.slots.push_back(clone_slot);
    return headers;
}

} // namespace

TEST_CASE("lookup order reproduces the String example") {
    auto built = build_environment(string_corpus());
    CHECK(built.diagnostics.empty());
    CHECK(lookup_order(built.env, "String") ==
          std::vector<std::string>{"Hashable", "Clone", "Print", "Utils", "Comparable"});
    CHECK(lookup_order(built.env, "Boolean") ==
          std::vector<std::string>{"Print", "Utils"});
    CHECK(lookup_order(built.env, "Clone").empty());
}

TEST_CASE("each ancestor appears exactly once") {
    auto built = build_environment(string_corpus());
    auto order = lookup_order(built.env, "String");
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("build is deterministic under input permutations") {
    auto headers = string_corpus();
    auto a = build_environment(headers);
    std::mt19937 rng(99);
    for (int i = 0; i < 10; ++i) {
        auto shuffled = headers;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto b = build_environment(shuffled);
        CHECK(lookup_order(a.env, "String") == lookup_order(b.env, "String"));
        CHECK(a.env.trie.nodes.size() == b.env.trie.nodes.size());
        std::vector<std::string> pa, pb;
        for (auto& [k, _] : a.env.prototypes) pa.push_back(k);
        for (auto& [k, _] : b.env.prototypes) pb.push_back(k);
        CHECK(pa == pb);
    }
}

TEST_CASE("inheritance cycles are reported") {
    std::vector<PrototypeHeader> headers;
    headers.push_back(proto("A", {{"B", true}}));
    headers.push_back(proto("B", {{"A", true}}));
    auto built = build_environment(headers);
    CHECK(has_code(built.diagnostics, "InheritanceCycle"));
}

TEST_CASE("unknown parents are reported") {
    std::vector<PrototypeHeader> headers;
    headers.push_back(proto("A", {{"Nowhere", true}}));
    auto built = build_environment(headers);
    CHECK(has_code(built.diagnostics, "UnknownParent"));
}

TEST_CASE("canonical name collisions are reported") {
    std::vector<PrototypeHeader> headers;
    PrototypeHeader a;
    a.name.segments = {{"ℕ", Style::Normal}, {"32", Style::Subscript}};
    a.source_path = "lib/a.omg";
    PrototypeHeader b;
    b.name = FormattedName("ℕ32");
    b.source_path = "lib/b.omg";
    headers.push_back(a);
    headers.push_back(b);
    auto built = build_environment(headers);
    CHECK(has_code(built.diagnostics, "NameCollision"));
}

TEST_CASE("empty header set builds an empty environment") {
    auto built = build_environment({});
    CHECK(built.env.prototypes.empty());
    CHECK(built.env.trie.nodes.size() == 1);
    CHECK(built.diagnostics.empty());
}

TEST_CASE("signature trie shares prefixes over the published vocabulary") {
    std::vector<PrototypeHeader> headers;
    auto boolean = proto("Boolean");
    boolean.slots.push_back(std_slot({"while", "_", "do", "_"}, 1)); // while {c} do {b}
    boolean.slots.push_back(std_slot({"if", "then", "_"}, 1));
    boolean.slots.push_back(std_slot({"if", "then", "_", "else", "_"}, 1));
    headers.push_back(boolean);
    auto coll = proto("Collection");
    coll.slots.push_back(std_slot({"add first", "_"}));
    coll.slots.push_back(std_slot({"add last", "_"}));
    coll.slots.push_back(std_slot({"add to", "_"}));
    coll.slots.push_back(std_slot({"append", "_"}));
    headers.push_back(coll);

    auto built = build_environment(headers);
    CHECK(built.diagnostics.empty());
    const auto& trie = built.env.trie;

    size_t terminals = 0;
    for (const auto& node : trie.nodes) terminals += node.terminal.size();
    CHECK(terminals == 7);

    // every slot's full item path lands on a node holding that slot
    for (const auto& [canon, p] : built.env.prototypes) {
        for (size_t si = 0; si < p.slots.size(); ++si) {
            auto node = trie.walk(header::signature_items(p.slots[si].signature));
            REQUIRE(node.has_value());
            const auto& term = trie.nodes[*node].terminal;
            CHECK(std::find(term.begin(), term.end(), SlotId{canon, si}) != term.end());
        }
    }

    // "if then" and "if then else" share the [if RECEIVER then ARG] prefix
    auto short_form = trie.walk(
        header::signature_items(boolean.slots[1].signature));
    REQUIRE(short_form.has_value());
    const auto& node = trie.nodes[*short_form];
    CHECK(node.terminal.size() == 1);
    CHECK(node.children.size() == 1); // the "else" continuation hangs off it
}

TEST_CASE("slot resolution walks the lookup order") {
    auto headers = string_corpus();
    // Boolean: if then else; True redefines it
    headers[6].slots.push_back(std_slot({"if", "then", "_", "else", "_"}, 1, "ℤ"));
    auto true_proto = proto("True", {{"Boolean", true}});
    true_proto.slots.push_back(std_slot({"if", "then", "_", "else", "_"}, 1, "ℤ"));
    headers.push_back(true_proto);

    auto built = build_environment(headers);
    CHECK(built.diagnostics.empty());

    auto on_boolean = resolve_slot(built.env, "Boolean", {"if", "then", "else"});
    REQUIRE(on_boolean.has_value());
    CHECK(on_boolean->id.proto == "Boolean");

    auto on_true = resolve_slot(built.env, "True", {"if", "then", "else"});
    REQUIRE(on_true.has_value());
    CHECK(on_true->id.proto == "True"); // redefinition found first

    auto clone = resolve_slot(built.env, "String", {"clone"});
    REQUIRE(clone.has_value());
    CHECK(clone->id.proto == "Clone");

    CHECK_FALSE(resolve_slot(built.env, "String", {"nonsense"}).has_value());
}

TEST_CASE("access rules") {
    std::vector<PrototypeHeader> headers;
    auto fib = proto("Fib");
    Slot fibonacci = std_slot({"fibonacci", "_"}, 0, "ℤ");
    Slot fiborec = std_slot({"fiborec", "_"}, 0, "ℤ");
    fiborec.signature.access.kind = header::AccessRule::Kind::SelfOnly;
    fib.slots.push_back(fibonacci);
    fib.slots.push_back(fiborec);
    headers.push_back(fib);
    headers.push_back(proto("Main"));
    headers.push_back(proto("FibChild", {{"Fib", true}}));

    auto built = build_environment(headers);
    const SlotId pub{"Fib", 0}, priv{"Fib", 1};

    CHECK(check_access(built.env, "Main", pub).allowed);
    CHECK_FALSE(check_access(built.env, "Main", priv).allowed);
    CHECK(check_access(built.env, "Fib", priv).allowed);
    CHECK(check_access(built.env, "FibChild", priv).allowed);
}

TEST_CASE("directory access uses the declaring file's directory") {
    std::vector<PrototypeHeader> headers;
    auto lib = proto("Lib");
    Slot s = std_slot({"helper"}, 0, "ℤ");
    s.signature.access.kind = header::AccessRule::Kind::Directory;
    s.signature.access.directory = "internal";
    lib.slots.push_back(s);
    headers.push_back(lib);

    auto inside = proto("Inside");
    inside.source_path = "lib/internal/Inside.omg";
    headers.push_back(inside);
    auto outside = proto("Outside");
    outside.source_path = "app/Outside.omg";
    headers.push_back(outside);

    auto built = build_environment(headers);
    const SlotId helper{"Lib", 0};
    CHECK(check_access(built.env, "Inside", helper).allowed);
    CHECK_FALSE(check_access(built.env, "Outside", helper).allowed);
}

TEST_CASE("assertion inheritance") {
    std::vector<PrototypeHeader> headers;
    auto coll = proto("Collection");
    Slot atput = std_slot({"at", "_", "put", "_"});
    atput.signature.preconditions.push_back("index must be valid");
    atput.signature.postconditions.push_back("count has not changed");
    coll.slots.push_back(atput);
    headers.push_back(coll);

    auto vec = proto("Vector", {{"Collection", true}});
    vec.slots.push_back(std_slot({"at", "_", "put", "_"})); // no local assertions
    headers.push_back(vec);

    auto strict = proto("Strict", {{"Collection", true}});
    Slot strict_atput = std_slot({"at", "_", "put", "_"});
    strict_atput.signature.preconditions.push_back("slot is writable");
    strict.slots.push_back(strict_atput);
    headers.push_back(strict);

    auto loose = proto("Loose", {{"Collection", true}});
    Slot loose_atput = std_slot({"at", "_", "put", "_"});
    loose_atput.signature.preconditions.push_back("ignore Collection");
    loose.slots.push_back(loose_atput);
    headers.push_back(loose);

    auto built = build_environment(headers);
    CHECK(built.diagnostics.empty());

    auto inherited = collect_assertions(built.env, SlotId{"Vector", 0});
    REQUIRE(inherited.preconditions.size() == 1);
    CHECK(inherited.preconditions[0] ==
          std::pair<std::string, std::string>{"Collection", "index must be valid"});
    REQUIRE(inherited.postconditions.size() == 1);

    auto added = collect_assertions(built.env, SlotId{"Strict", 0});
    REQUIRE(added.preconditions.size() == 2);
    CHECK(added.preconditions[0].first == "Strict");
    CHECK(added.preconditions[1].first == "Collection");

    auto suppressed = collect_assertions(built.env, SlotId{"Loose", 0});
    CHECK(suppressed.preconditions.empty());
    CHECK(suppressed.postconditions.size() == 1); // only pre was ignored

    auto none = collect_assertions(built.env, SlotId{"Collection", 0});
    CHECK(none.preconditions.size() == 1); // its own
}

TEST_CASE("assignability distinguishes link kinds") {
    std::vector<PrototypeHeader> headers;
    headers.push_back(proto("Print"));
    headers.push_back(proto("Boolean", {{"Print", false}}));
    headers.push_back(proto("True", {{"Boolean", true}}));
    auto built = build_environment(headers);

    CHECK(assignable(built.env, "True", "Boolean"));
    CHECK(assignable(built.env, "True", "True"));
    CHECK_FALSE(assignable(built.env, "Boolean", "Print")); // dotted link
    CHECK(reachable(built.env, "Boolean", "Print"));
    CHECK_FALSE(assignable(built.env, "Boolean", "True")); // wrong direction
}

TEST_CASE("eye flags change nothing observable") {
    auto headers = string_corpus();
    auto plain = build_environment(headers);
    for (auto& h : headers)
        for (auto& l : h.links) l.eye_open = !l.eye_open;
    auto flipped = build_environment(headers);

    CHECK(lookup_order(plain.env, "String") == lookup_order(flipped.env, "String"));
    auto a = resolve_slot(plain.env, "String", {"clone"});
    auto b = resolve_slot(flipped.env, "String", {"clone"});
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->id == b->id);
}

TEST_CASE("type name classification") {
    std::vector<PrototypeHeader> headers;
    auto coll = proto("Collection");
    coll.generics.push_back(FormattedName("V"));
    headers.push_back(coll);
    headers.push_back(proto("Pixel"));
    auto built = build_environment(headers);

    CHECK(classify_type_name(built.env, "Collection", "V") == TypeNameClass::Generic);
    CHECK(classify_type_name(built.env, "Pixel", "Pixel") == TypeNameClass::Prototype);
    CHECK(classify_type_name(built.env, "Pixel", "T") == TypeNameClass::Generic);
    CHECK(classify_type_name(built.env, "Pixel", "Mystery") == TypeNameClass::Unknown);
}
