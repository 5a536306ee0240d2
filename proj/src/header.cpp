#include "omega/header.hpp"

#include "omega/utf8.hpp"

#include <algorithm>
#include <set>

namespace omega::header {

using tags::TagKind;
using tags::TagToken;

HeaderError::HeaderError(std::string code_, size_t offset_, const std::string& what_)
    : std::runtime_error(what_), code(std::move(code_)), offset(offset_) {}

namespace {

[[noreturn]] void malformed(size_t offset, const std::string& why) {
    throw HeaderError("MalformedHeader", offset, why);
}

bool is_ws(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_sig_punct(char32_t c) {
    return c == '(' || c == ')' || c == '{' || c == '}' || c == ',' || c == ':';
}

std::string trimmed(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && is_ws(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_ws(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool is_structural(TagKind k) {
    switch (k) {
    case TagKind::PrototypeBegin:
    case TagKind::InheritLinkSolid:
    case TagKind::InheritLinkDotted:
    case TagKind::EyeOpen:
    case TagKind::SlotBegin:
    case TagKind::BodyBegin:
    case TagKind::CommentBegin:
    case TagKind::CommentEnd:
    case TagKind::PreconditionBegin:
    case TagKind::PostconditionBegin:
    case TagKind::AccessSpec:
        return true;
    default:
        return false;
    }
}

// ---------------------------------------------------------------------------
// Signature micro-lexer: flattens a token slice into words, punctuation and
// receiver/exact-type marks, applying superscript/subscript style tags.

struct SigTok {
    enum class Kind { Word, Punct, Receiver, Exact };
    Kind kind = Kind::Word;
    FormattedName word;
    char punct = 0;
    ReceiverKind receiver = ReceiverKind::Shared;
    size_t offset = 0;
};

struct MetaTags {
    std::optional<OperatorInfo> op_meta; // priority + assoc, arity filled later
    bool commutative = false;
};

struct SigLex {
    std::vector<SigTok> toks;
    MetaTags meta;
};

SigLex lex_signature(const std::vector<TagToken>& tokens, size_t from, size_t to) {
    SigLex out;
    Style style = Style::Normal;
    FormattedName word;
    bool open = false;
    size_t word_offset = 0;

    auto flush = [&]() {
        if (!open) return;
        word.normalize();
        if (!word.empty()) {
            SigTok t;
            t.kind = SigTok::Kind::Word;
            t.word = std::move(word);
            t.offset = word_offset;
            out.toks.push_back(std::move(t));
        }
        word = FormattedName{};
        open = false;
    };

    for (size_t i = from; i < to; ++i) {
        const TagToken& tok = tokens[i];
        if (tok.type == TagToken::Type::Text) {
            size_t p = 0;
            while (p < tok.text.size()) {
                auto d = utf8::decode(tok.text, p);
                if (!d) malformed(tok.offset + p, "invalid UTF-8 in signature");
                if (is_ws(d->cp)) {
                    flush();
                } else if (is_sig_punct(d->cp)) {
                    flush();
                    SigTok t;
                    t.kind = SigTok::Kind::Punct;
                    t.punct = static_cast<char>(d->cp);
                    t.offset = tok.offset + p;
                    out.toks.push_back(t);
                } else {
                    if (!open) {
                        open = true;
                        word_offset = tok.offset + p;
                    }
                    if (word.segments.empty() || word.segments.back().style != style)
                        word.segments.push_back({"", style});
                    word.segments.back().text += tok.text.substr(p, d->length);
                }
                p += d->length;
            }
            continue;
        }
        switch (tok.kind) {
        case TagKind::SuperscriptStart:
            if (style != Style::Normal) malformed(tok.offset, "nested style tag");
            style = Style::Superscript;
            break;
        case TagKind::SubscriptStart:
            if (style != Style::Normal) malformed(tok.offset, "nested style tag");
            style = Style::Subscript;
            break;
        case TagKind::SuperscriptStop:
            if (style != Style::Superscript) malformed(tok.offset, "unmatched style stop");
            style = Style::Normal;
            break;
        case TagKind::SubscriptStop:
            if (style != Style::Subscript) malformed(tok.offset, "unmatched style stop");
            style = Style::Normal;
            break;
        case TagKind::ReceiverShared:
        case TagKind::ReceiverCloned: {
            flush();
            SigTok t;
            t.kind = SigTok::Kind::Receiver;
            t.receiver = tok.kind == TagKind::ReceiverCloned ? ReceiverKind::Cloned
                                                             : ReceiverKind::Shared;
            t.offset = tok.offset;
            out.toks.push_back(t);
            break;
        }
        case TagKind::ExactType: {
            flush();
            SigTok t;
            t.kind = SigTok::Kind::Exact;
            t.offset = tok.offset;
            out.toks.push_back(t);
            break;
        }
        case TagKind::LeftAssoc:
        case TagKind::RightAssoc:
            if (out.meta.op_meta) malformed(tok.offset, "duplicate associativity tag");
            out.meta.op_meta = OperatorInfo{
                tok.digit,
                tok.kind == TagKind::LeftAssoc ? Assoc::Left : Assoc::Right,
                false,
                OperatorArity::BinaryInfix,
            };
            break;
        case TagKind::CommutativityOn:
            if (out.meta.commutative) malformed(tok.offset, "duplicate commutativity tag");
            out.meta.commutative = true;
            break;
        default:
            malformed(tok.offset, std::string("unexpected tag in signature: ") +
                                      tags::tag_kind_name(tok.kind));
        }
    }
    if (style != Style::Normal)
        malformed(to > from ? tokens[to - 1].offset : 0, "unterminated style tag");
    flush();
    return out;
}

FormattedName join_words(const std::vector<FormattedName>& words) {
    FormattedName out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i) out.segments.push_back({" ", Style::Normal});
        for (const auto& seg : words[i].segments) out.segments.push_back(seg);
    }
    out.normalize();
    return out;
}

// ---------------------------------------------------------------------------
// Signature parser over SigToks.

struct SigParser {
    const std::vector<SigTok>& toks;
    size_t pos = 0;

    const SigTok* peek() const { return pos < toks.size() ? &toks[pos] : nullptr; }
    const SigTok& next() {
        if (pos >= toks.size()) malformed(last_offset(), "unexpected end of signature");
        return toks[pos++];
    }
    size_t last_offset() const { return toks.empty() ? 0 : toks.back().offset; }
    bool at_punct(char c) const {
        const SigTok* t = peek();
        return t && t->kind == SigTok::Kind::Punct && t->punct == c;
    }
    void expect_punct(char c, const char* what) {
        if (!at_punct(c)) malformed(peek() ? peek()->offset : last_offset(), what);
        ++pos;
    }

    TypeRef parse_type() {
        const SigTok& t = next();
        if (t.kind == SigTok::Kind::Exact) return TypeRef::exact_receiver();
        if (t.kind == SigTok::Kind::Punct && t.punct == '(') {
            std::vector<TypeRef> elems;
            elems.push_back(parse_type());
            while (at_punct(',')) {
                ++pos;
                elems.push_back(parse_type());
            }
            expect_punct(')', "expected ')' in type");
            if (elems.size() == 1) return std::move(elems.front()); // grouping
            return TypeRef::tuple(std::move(elems));
        }
        if (t.kind != SigTok::Kind::Word)
            malformed(t.offset, "expected a type");
        std::vector<FormattedName> words{t.word};
        while (peek() && peek()->kind == SigTok::Kind::Word)
            words.push_back(next().word);
        std::vector<TypeRef> args;
        if (at_punct('(')) {
            ++pos;
            args.push_back(parse_type());
            while (at_punct(',')) {
                ++pos;
                args.push_back(parse_type());
            }
            expect_punct(')', "expected ')' after type arguments");
        }
        return TypeRef::named(join_words(words), std::move(args));
    }

    // name [':' type] for parameters; undelayed parameters require a type.
    Parameter parse_param(bool delayed, char close, size_t keyword_count) {
        Parameter p;
        p.delayed = delayed;
        p.after_keyword = keyword_count;
        std::vector<FormattedName> words;
        while (peek() && peek()->kind == SigTok::Kind::Word)
            words.push_back(next().word);
        if (words.empty())
            malformed(peek() ? peek()->offset : last_offset(), "expected parameter name");
        p.name = join_words(words);
        if (at_punct(':')) {
            ++pos;
            p.type = parse_type();
        } else if (!delayed) {
            malformed(peek() ? peek()->offset : last_offset(),
                      "parameter requires a declared type");
        }
        expect_punct(close, "unterminated parameter declaration");
        return p;
    }
};

SlotSignature parse_signature_impl(const SigLex& lex) {
    SlotSignature sig;
    SigParser p{lex.toks};
    std::vector<FormattedName> run;
    bool have_receiver = false;

    auto flush_keyword = [&]() {
        if (!run.empty()) {
            sig.keywords.push_back(join_words(run));
            run.clear();
        }
    };

    while (const SigTok* t = p.peek()) {
        if (t->kind == SigTok::Kind::Word) {
            run.push_back(t->word);
            ++p.pos;
            continue;
        }
        if (t->kind == SigTok::Kind::Receiver) {
            flush_keyword();
            if (have_receiver)
                throw HeaderError("MultipleReceiverMarks", t->offset,
                                  "signature declares more than one receiver");
            have_receiver = true;
            sig.receiver_position = sig.keywords.size();
            sig.receiver_kind = t->receiver;
            ++p.pos;
            continue;
        }
        if (t->kind == SigTok::Kind::Exact)
            malformed(t->offset, "exact-type mark outside a type position");
        // punctuation
        if (t->punct == '(') {
            flush_keyword();
            ++p.pos;
            sig.params.push_back(p.parse_param(false, ')', sig.keywords.size()));
            continue;
        }
        if (t->punct == '{') {
            flush_keyword();
            ++p.pos;
            if (p.peek() && p.peek()->kind == SigTok::Kind::Receiver) {
                if (have_receiver)
                    throw HeaderError("MultipleReceiverMarks", p.peek()->offset,
                                      "signature declares more than one receiver");
                have_receiver = true;
                sig.receiver_position = sig.keywords.size();
                sig.receiver_kind = p.peek()->receiver;
                sig.receiver_delayed = true;
                ++p.pos;
                p.expect_punct('}', "expected '}' after delayed receiver");
            } else {
                sig.params.push_back(p.parse_param(true, '}', sig.keywords.size()));
            }
            continue;
        }
        if (t->punct == ':') {
            flush_keyword();
            ++p.pos;
            sig.return_type = p.parse_type();
            if (p.peek()) malformed(p.peek()->offset, "trailing tokens after return type");
            break;
        }
        malformed(t->offset, std::string("unexpected '") + t->punct + "' in signature");
    }
    flush_keyword();

    if (!have_receiver)
        throw HeaderError("MissingReceiverMark", p.last_offset(),
                          "signature has no receiver mark");
    if (sig.keywords.empty())
        malformed(p.last_offset(), "signature has no keyword");

    if (lex.meta.commutative && !lex.meta.op_meta)
        malformed(p.last_offset(), "commutativity tag on a non-operator slot");

    if (lex.meta.op_meta) {
        OperatorInfo info = *lex.meta.op_meta;
        info.commutative = lex.meta.commutative;
        if (sig.keywords.size() != 1)
            throw HeaderError("OperatorWithManyKeywords", p.last_offset(),
                              "operator slots carry exactly one keyword");
        if (sig.params.size() == 1 && sig.receiver_position == 0 &&
            sig.params[0].after_keyword == 1) {
            info.arity = OperatorArity::BinaryInfix;
        } else if (sig.params.empty() && sig.receiver_position == 1) {
            info.arity = OperatorArity::UnaryPrefix;
        } else if (sig.params.empty() && sig.receiver_position == 0) {
            info.arity = OperatorArity::UnaryPostfix;
        } else {
            malformed(p.last_offset(), "unsupported operator shape");
        }
        if (info.commutative && info.arity != OperatorArity::BinaryInfix)
            malformed(p.last_offset(), "commutativity applies to binary operators only");
        sig.op = info;
    }
    return sig;
}

AccessRule parse_access(const std::string& payload, size_t offset) {
    AccessRule rule;
    const std::string text = trimmed(payload);
    if (text.empty()) malformed(offset, "empty access specification");
    switch (text[0]) {
    case 'p':
        rule.kind = AccessRule::Kind::Public;
        break;
    case 's':
        rule.kind = AccessRule::Kind::SelfOnly;
        break;
    case 'n': {
        rule.kind = AccessRule::Kind::Named;
        std::string rest = trimmed(text.substr(1));
        size_t start = 0;
        while (start <= rest.size()) {
            size_t comma = rest.find(',', start);
            std::string item = trimmed(rest.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start));
            if (!item.empty()) rule.names.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (rule.names.empty()) malformed(offset, "access list names no prototype");
        break;
    }
    case 'd':
        rule.kind = AccessRule::Kind::Directory;
        rule.directory = trimmed(text.substr(1));
        if (rule.directory.empty()) malformed(offset, "access directory is empty");
        break;
    default:
        malformed(offset, "unknown access specification");
    }
    return rule;
}

// Proto name zone: words, optionally followed by (G1, G2, ...).
void parse_name_zone(const SigLex& lex, FormattedName& name,
                     std::vector<FormattedName>& generics, size_t zone_offset) {
    SigParser p{lex.toks};
    if (lex.meta.op_meta || lex.meta.commutative)
        malformed(zone_offset, "operator tags in a prototype name");
    std::vector<FormattedName> words;
    while (p.peek() && p.peek()->kind == SigTok::Kind::Word)
        words.push_back(p.next().word);
    if (words.empty()) malformed(zone_offset, "prototype name is empty");
    name = join_words(words);
    if (p.at_punct('(')) {
        ++p.pos;
        while (true) {
            std::vector<FormattedName> gw;
            while (p.peek() && p.peek()->kind == SigTok::Kind::Word)
                gw.push_back(p.next().word);
            if (gw.empty())
                malformed(p.peek() ? p.peek()->offset : zone_offset,
                          "empty generic parameter");
            generics.push_back(join_words(gw));
            if (p.at_punct(',')) {
                ++p.pos;
                continue;
            }
            break;
        }
        p.expect_punct(')', "unterminated generic parameter list");
    }
    if (p.peek()) malformed(p.peek()->offset, "trailing tokens after prototype name");
}

std::string strip_body_framing(std::string text) {
    if (!text.empty() && text.front() == '\n') text.erase(text.begin());
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

} // namespace

std::vector<SigItem> signature_items(const SlotSignature& sig) {
    std::vector<SigItem> items;
    auto emit_boundary = [&](size_t k) {
        if (sig.receiver_position == k) items.push_back({SigItem::Kind::Receiver, "", 0});
        for (size_t pi = 0; pi < sig.params.size(); ++pi)
            if (sig.params[pi].after_keyword == k)
                items.push_back({SigItem::Kind::Param, "", pi});
    };
    for (size_t k = 0; k < sig.keywords.size(); ++k) {
        emit_boundary(k);
        const std::string canon = canonical_name(sig.keywords[k]);
        size_t start = 0;
        while (start <= canon.size()) {
            size_t space = canon.find(' ', start);
            std::string word =
                canon.substr(start, space == std::string::npos ? std::string::npos
                                                               : space - start);
            if (!word.empty()) items.push_back({SigItem::Kind::Word, word, 0});
            if (space == std::string::npos) break;
            start = space + 1;
        }
    }
    emit_boundary(sig.keywords.size());
    return items;
}

std::string canonical_key(const SlotSignature& sig) {
    std::string key;
    size_t placeholder = 0;
    for (const auto& item : signature_items(sig)) {
        if (!key.empty()) key += " ";
        if (item.kind == SigItem::Kind::Word)
            key += item.word;
        else
            key += "A" + std::to_string(placeholder++);
    }
    return key;
}

size_t placeholder_count(const SlotSignature& sig) { return 1 + sig.params.size(); }

size_t receiver_placeholder_index(const SlotSignature& sig) {
    size_t placeholder = 0;
    for (const auto& item : signature_items(sig)) {
        if (item.kind == SigItem::Kind::Receiver) return placeholder;
        if (item.kind == SigItem::Kind::Param) ++placeholder;
    }
    return 0;
}

bool headers_equivalent(const PrototypeHeader& a, const PrototypeHeader& b) {
    if (a.name != b.name || a.generics != b.generics || a.comments != b.comments)
        return false;
    if (a.links.size() != b.links.size() || a.slots.size() != b.slots.size())
        return false;
    for (size_t i = 0; i < a.links.size(); ++i) {
        if (a.links[i].parent != b.links[i].parent ||
            a.links[i].polymorphic != b.links[i].polymorphic ||
            a.links[i].eye_open != b.links[i].eye_open)
            return false;
    }
    for (size_t i = 0; i < a.slots.size(); ++i) {
        if (!(a.slots[i].signature == b.slots[i].signature)) return false;
        if (a.slots[i].raw_body != b.slots[i].raw_body) return false;
    }
    return true;
}

SlotSignature parse_signature(const std::vector<TagToken>& tokens) {
    return parse_signature_impl(lex_signature(tokens, 0, tokens.size()));
}

PrototypeHeader read_prototype(const std::vector<TagToken>& tokens) {
    PrototypeHeader header;
    size_t i = 0;

    auto is_tag = [&](size_t k, TagKind kind) {
        return k < tokens.size() && tokens[k].type == TagToken::Type::Tag &&
               tokens[k].kind == kind;
    };

    // Collects [i, j) where j is the next structural tag.
    auto zone_end = [&](size_t from) {
        size_t j = from;
        while (j < tokens.size() &&
               !(tokens[j].type == TagToken::Type::Tag && is_structural(tokens[j].kind)))
            ++j;
        return j;
    };

    if (i < tokens.size() && tokens[i].type == TagToken::Type::Text) {
        if (!trimmed(tokens[i].text).empty())
            malformed(tokens[i].offset, "text before the prototype marker");
        ++i;
    }
    if (!is_tag(i, TagKind::PrototypeBegin))
        malformed(i < tokens.size() ? tokens[i].offset : 0,
                  "file does not start with a prototype marker");
    ++i;

    {
        size_t j = zone_end(i);
        parse_name_zone(lex_signature(tokens, i, j), header.name, header.generics,
                        i < tokens.size() ? tokens[i].offset : 0);
        i = j;
    }

    std::set<std::string> slot_keys;

    while (i < tokens.size()) {
        const TagToken& tok = tokens[i];
        if (tok.type == TagToken::Type::Text) {
            if (!trimmed(tok.text).empty())
                malformed(tok.offset, "stray text between sections");
            ++i;
            continue;
        }
        switch (tok.kind) {
        case TagKind::InheritLinkSolid:
        case TagKind::InheritLinkDotted: {
            InheritLink link;
            link.polymorphic = tok.kind == TagKind::InheritLinkSolid;
            ++i;
            if (is_tag(i, TagKind::EyeOpen)) {
                link.eye_open = true;
                ++i;
            }
            size_t j = zone_end(i);
            SigLex lex = lex_signature(tokens, i, j);
            std::vector<FormattedName> words;
            for (const auto& t : lex.toks) {
                if (t.kind != SigTok::Kind::Word)
                    malformed(t.offset, "unexpected token in inheritance link");
                words.push_back(t.word);
            }
            if (words.empty()) malformed(tok.offset, "inheritance link names no parent");
            link.parent = join_words(words);
            header.links.push_back(std::move(link));
            i = j;
            break;
        }
        case TagKind::CommentBegin: {
            ++i;
            std::string text;
            size_t start = i;
            while (i < tokens.size() && !is_tag(i, TagKind::CommentEnd)) {
                if (tokens[i].type != TagToken::Type::Text)
                    malformed(tokens[i].offset, "tag inside a comment");
                text += tokens[i].text;
                ++i;
            }
            if (!is_tag(i, TagKind::CommentEnd))
                malformed(start < tokens.size() ? tokens[start].offset : 0,
                          "unterminated comment");
            ++i;
            header.comments.push_back(trimmed(text));
            break;
        }
        case TagKind::SlotBegin: {
            const size_t sig_begin = tok.offset;
            ++i;
            size_t j = zone_end(i);
            Slot slot;
            slot.sig_span = {sig_begin, j < tokens.size() ? tokens[j].offset : sig_begin};
            slot.signature = parse_signature_impl(lex_signature(tokens, i, j));
            i = j;

            // access, assertion zones, then an optional body
            while (i < tokens.size()) {
                if (is_tag(i, TagKind::AccessSpec)) {
                    ++i;
                    size_t k = zone_end(i);
                    std::string payload;
                    for (size_t t = i; t < k; ++t) {
                        if (tokens[t].type != TagToken::Type::Text)
                            malformed(tokens[t].offset, "tag inside access specification");
                        payload += tokens[t].text;
                    }
                    slot.signature.access =
                        parse_access(payload, i < tokens.size() ? tokens[i].offset : 0);
                    i = k;
                    continue;
                }
                if (is_tag(i, TagKind::PreconditionBegin) ||
                    is_tag(i, TagKind::PostconditionBegin)) {
                    const bool pre = tokens[i].kind == TagKind::PreconditionBegin;
                    ++i;
                    size_t k = zone_end(i);
                    std::string text;
                    for (size_t t = i; t < k; ++t) {
                        if (tokens[t].type != TagToken::Type::Text)
                            malformed(tokens[t].offset, "tag inside an assertion zone");
                        text += tokens[t].text;
                    }
                    if (pre)
                        slot.signature.preconditions.push_back(trimmed(text));
                    else
                        slot.signature.postconditions.push_back(trimmed(text));
                    i = k;
                    continue;
                }
                break;
            }

            if (is_tag(i, TagKind::BodyBegin)) {
                ++i;
                std::string body;
                const size_t body_offset = i < tokens.size() ? tokens[i].offset : 0;
                if (i < tokens.size() && tokens[i].type == TagToken::Type::Text) {
                    body = tokens[i].text;
                    ++i;
                }
                const bool framed = !body.empty() && body.front() == '\n';
                if (i < tokens.size()) {
                    const TagToken& t = tokens[i];
                    const bool terminator =
                        t.type == TagToken::Type::Tag &&
                        (t.kind == TagKind::SlotBegin ||
                         t.kind == TagKind::InheritLinkSolid ||
                         t.kind == TagKind::InheritLinkDotted ||
                         t.kind == TagKind::CommentBegin);
                    if (!terminator)
                        throw HeaderError("TagInBody", t.offset,
                                          "tag inside a slot body");
                }
                slot.raw_body = strip_body_framing(std::move(body));
                slot.body_offset = body_offset + (framed ? 1 : 0);
            }

            const std::string key = canonical_key(slot.signature);
            if (!slot_keys.insert(key).second)
                throw HeaderError("DuplicateSlotKeywords", sig_begin,
                                  "duplicate slot '" + key + "'");
            header.slots.push_back(std::move(slot));
            break;
        }
        case TagKind::PrototypeBegin:
            malformed(tok.offset, "multiple prototypes in one file");
        default:
            malformed(tok.offset, std::string("unexpected tag between sections: ") +
                                      tags::tag_kind_name(tok.kind));
        }
    }
    return header;
}

// ---------------------------------------------------------------------------
// Canonical writer.

namespace {

struct TokenBuilder {
    std::vector<TagToken> tokens;

    void text(std::string_view s) {
        if (s.empty()) return;
        if (!tokens.empty() && tokens.back().type == TagToken::Type::Text)
            tokens.back().text += s;
        else
            tokens.push_back(TagToken::make_text(std::string(s)));
    }
    void tag(TagKind kind, int digit = -1) {
        tokens.push_back(TagToken::make_tag(kind, 0, digit));
    }

    void name(const FormattedName& n) {
        for (const auto& seg : n.segments) {
            switch (seg.style) {
            case Style::Normal:
                text(seg.text);
                break;
            case Style::Superscript:
                tag(TagKind::SuperscriptStart);
                text(seg.text);
                tag(TagKind::SuperscriptStop);
                break;
            case Style::Subscript:
                tag(TagKind::SubscriptStart);
                text(seg.text);
                tag(TagKind::SubscriptStop);
                break;
            }
        }
    }

    void type(const TypeRef& t) {
        switch (t.kind) {
        case TypeRef::Kind::ExactReceiver:
            tag(TagKind::ExactType);
            break;
        case TypeRef::Kind::Named:
            name(t.name);
            if (!t.params.empty()) {
                text("(");
                for (size_t i = 0; i < t.params.size(); ++i) {
                    if (i) text(", ");
                    type(t.params[i]);
                }
                text(")");
            }
            break;
        case TypeRef::Kind::Tuple:
            text("(");
            for (size_t i = 0; i < t.params.size(); ++i) {
                if (i) text(", ");
                type(t.params[i]);
            }
            text(")");
            break;
        case TypeRef::Kind::Block:
            text(display(t)); // not produced by the reader; best effort
            break;
        }
    }
};

} // namespace

std::vector<TagToken> write_prototype(const PrototypeHeader& header) {
    TokenBuilder b;
    b.tag(TagKind::PrototypeBegin);
    b.name(header.name);
    if (!header.generics.empty()) {
        b.text("(");
        for (size_t i = 0; i < header.generics.size(); ++i) {
            if (i) b.text(", ");
            b.name(header.generics[i]);
        }
        b.text(")");
    }
    b.text("\n");

    for (const auto& link : header.links) {
        b.tag(link.polymorphic ? TagKind::InheritLinkSolid : TagKind::InheritLinkDotted);
        if (link.eye_open) b.tag(TagKind::EyeOpen);
        b.name(link.parent);
        b.text("\n");
    }
    for (const auto& comment : header.comments) {
        b.tag(TagKind::CommentBegin);
        b.text(comment);
        b.tag(TagKind::CommentEnd);
        b.text("\n");
    }

    for (const auto& slot : header.slots) {
        const SlotSignature& sig = slot.signature;
        b.tag(TagKind::SlotBegin);
        if (sig.op) {
            b.tag(sig.op->assoc == Assoc::Left ? TagKind::LeftAssoc : TagKind::RightAssoc,
                  sig.op->priority);
            if (sig.op->commutative) b.tag(TagKind::CommutativityOn);
        }
        bool first = true;
        auto space = [&]() {
            if (!first) b.text(" ");
            first = false;
        };
        for (const auto& item : signature_items(sig)) {
            switch (item.kind) {
            case SigItem::Kind::Receiver:
                space();
                if (sig.receiver_delayed) b.text("{");
                b.tag(sig.receiver_kind == ReceiverKind::Cloned ? TagKind::ReceiverCloned
                                                                : TagKind::ReceiverShared);
                if (sig.receiver_delayed) b.text("}");
                break;
            case SigItem::Kind::Param: {
                const Parameter& p = sig.params[item.param_index];
                space();
                b.text(p.delayed ? "{" : "(");
                b.name(p.name);
                if (p.type) {
                    b.text(": ");
                    b.type(*p.type);
                }
                b.text(p.delayed ? "}" : ")");
                break;
            }
            case SigItem::Kind::Word:
                space();
                b.text(item.word);
                break;
            }
        }
        if (sig.return_type) {
            b.text(" : ");
            b.type(*sig.return_type);
        }
        if (sig.access.kind != AccessRule::Kind::Public) {
            b.tag(TagKind::AccessSpec);
            switch (sig.access.kind) {
            case AccessRule::Kind::SelfOnly:
                b.text("s");
                break;
            case AccessRule::Kind::Named: {
                std::string out = "n ";
                for (size_t i = 0; i < sig.access.names.size(); ++i) {
                    if (i) out += ", ";
                    out += sig.access.names[i];
                }
                b.text(out);
                break;
            }
            case AccessRule::Kind::Directory:
                b.text("d " + sig.access.directory);
                break;
            case AccessRule::Kind::Public:
                break;
            }
        }
        for (const auto& pre : sig.preconditions) {
            b.tag(TagKind::PreconditionBegin);
            b.text(pre);
        }
        for (const auto& post : sig.postconditions) {
            b.tag(TagKind::PostconditionBegin);
            b.text(post);
        }
        if (slot.raw_body) {
            b.tag(TagKind::BodyBegin);
            b.text("\n" + *slot.raw_body + "\n");
        } else {
            b.text("\n");
        }
    }
    return std::move(b.tokens);
}

} // namespace omega::header
