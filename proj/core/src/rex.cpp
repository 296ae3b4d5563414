// SPDX-License-Identifier: Apache-2.0
#include "rulegen/rex.hpp"

#include <cctype>
#include <memory>

namespace rulegen::rex {

namespace {

constexpr std::size_t kMaxProgram = 20000;

using ByteSet = std::array<std::uint64_t, 4>;

void set_byte(ByteSet& set, unsigned char c) {
    set[c >> 6] |= (std::uint64_t{1} << (c & 63));
}

bool has_byte(const ByteSet& set, unsigned char c) {
    return (set[c >> 6] >> (c & 63)) & 1;
}

void set_range(ByteSet& set, unsigned char lo, unsigned char hi) {
    for (unsigned c = lo; c <= hi; ++c) {
        set_byte(set, static_cast<unsigned char>(c));
    }
}

void negate(ByteSet& set) {
    for (auto& word : set) {
        word = ~word;
    }
}

void add_case_folded(ByteSet& set) {
    for (unsigned c = 'a'; c <= 'z'; ++c) {
        if (has_byte(set, static_cast<unsigned char>(c))) {
            set_byte(set, static_cast<unsigned char>(c - 'a' + 'A'));
        }
    }
    for (unsigned c = 'A'; c <= 'Z'; ++c) {
        if (has_byte(set, static_cast<unsigned char>(c))) {
            set_byte(set, static_cast<unsigned char>(c - 'A' + 'a'));
        }
    }
}

bool is_word_byte(int c) {
    if (c < 0) {
        return false;
    }
    return std::isalnum(c) || c == '_';
}

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct Node {
    enum class Kind { byte_class, concat, alternate, repeat, assertion, empty } kind;
    ByteSet bytes{};                      // byte_class
    std::vector<NodePtr> children;        // concat / alternate / repeat(1)
    int rep_min = 0;
    int rep_max = -1;                     // -1: unbounded
    int assert_kind = 0;                  // 0 ^, 1 $, 2 \b, 3 \B
};

NodePtr make_node(Node::Kind kind) {
    auto n = std::make_unique<Node>();
    n->kind = kind;
    return n;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
  public:
    Parser(std::string_view pattern, bool icase, bool dotall)
        : p_(pattern), icase_(icase), dotall_(dotall) {}

    NodePtr parse() {
        NodePtr node = parse_alternate();
        if (pos_ != p_.size()) {
            throw ParseError("unexpected '" + std::string(1, p_[pos_]) + "'", pos_);
        }
        return node;
    }

  private:
    bool eof() const { return pos_ >= p_.size(); }
    char peek() const { return p_[pos_]; }

    NodePtr parse_alternate() {
        auto alt = make_node(Node::Kind::alternate);
        alt->children.push_back(parse_concat());
        while (!eof() && peek() == '|') {
            ++pos_;
            alt->children.push_back(parse_concat());
        }
        if (alt->children.size() == 1) {
            return std::move(alt->children.front());
        }
        return alt;
    }

    NodePtr parse_concat() {
        auto cat = make_node(Node::Kind::concat);
        while (!eof() && peek() != '|' && peek() != ')') {
            cat->children.push_back(parse_repeat());
        }
        if (cat->children.empty()) {
            return make_node(Node::Kind::empty);
        }
        if (cat->children.size() == 1) {
            return std::move(cat->children.front());
        }
        return cat;
    }

    NodePtr parse_repeat() {
        NodePtr atom = parse_atom();
        while (!eof()) {
            char c = peek();
            int min = 0;
            int max = -1;
            if (c == '*') {
                min = 0;
                max = -1;
                ++pos_;
            } else if (c == '+') {
                min = 1;
                max = -1;
                ++pos_;
            } else if (c == '?') {
                min = 0;
                max = 1;
                ++pos_;
            } else if (c == '{') {
                auto bounds = parse_bounds();
                min = bounds.first;
                max = bounds.second;
            } else {
                break;
            }
            if (!eof() && peek() == '?') {
                ++pos_;  // lazy marker accepted; match semantics stay longest
            }
            if (atom->kind == Node::Kind::assertion || atom->kind == Node::Kind::empty) {
                throw ParseError("quantifier on a zero-width expression", pos_);
            }
            auto rep = make_node(Node::Kind::repeat);
            rep->rep_min = min;
            rep->rep_max = max;
            rep->children.push_back(std::move(atom));
            atom = std::move(rep);
        }
        return atom;
    }

    std::pair<int, int> parse_bounds() {
        std::size_t start = pos_;
        ++pos_;  // '{'
        auto read_int = [&]() -> int {
            if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) {
                return -1;
            }
            long value = 0;
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
                value = value * 10 + (peek() - '0');
                if (value > 1000) {
                    throw ParseError("repetition bound too large", pos_);
                }
                ++pos_;
            }
            return static_cast<int>(value);
        };
        int min = read_int();
        if (min < 0) {
            throw ParseError("malformed repetition", start);
        }
        int max = min;
        if (!eof() && peek() == ',') {
            ++pos_;
            if (!eof() && peek() == '}') {
                max = -1;
            } else {
                max = read_int();
                if (max < 0) {
                    throw ParseError("malformed repetition", start);
                }
            }
        }
        if (eof() || peek() != '}') {
            throw ParseError("unterminated repetition", start);
        }
        ++pos_;
        if (max != -1 && max < min) {
            throw ParseError("repetition bounds out of order", start);
        }
        return {min, max};
    }

    NodePtr parse_atom() {
        if (eof()) {
            throw ParseError("unexpected end of pattern", pos_);
        }
        char c = peek();
        if (c == '(') {
            std::size_t open = pos_;
            ++pos_;
            if (!eof() && peek() == '?') {
                ++pos_;
                if (!eof() && (peek() == ':' || peek() == 'i')) {
                    ++pos_;  // (?: and (?i prefixes tolerated
                } else {
                    throw ParseError("unsupported group modifier", pos_);
                }
            }
            NodePtr inner = parse_alternate();
            if (eof() || peek() != ')') {
                throw ParseError("unbalanced parenthesis", open);
            }
            ++pos_;
            return inner;
        }
        if (c == ')') {
            throw ParseError("unbalanced parenthesis", pos_);
        }
        if (c == '[') {
            return parse_class();
        }
        if (c == '*' || c == '+' || c == '?') {
            throw ParseError("quantifier with nothing to repeat", pos_);
        }
        if (c == '^') {
            ++pos_;
            auto node = make_node(Node::Kind::assertion);
            node->assert_kind = 0;
            return node;
        }
        if (c == '$') {
            ++pos_;
            auto node = make_node(Node::Kind::assertion);
            node->assert_kind = 1;
            return node;
        }
        if (c == '.') {
            ++pos_;
            auto node = make_node(Node::Kind::byte_class);
            set_range(node->bytes, 0x00, 0xFF);
            if (!dotall_) {
                node->bytes['\n' >> 6] &= ~(std::uint64_t{1} << ('\n' & 63));
            }
            return node;
        }
        if (c == '\\') {
            return parse_escape();
        }
        ++pos_;
        auto node = make_node(Node::Kind::byte_class);
        set_byte(node->bytes, static_cast<unsigned char>(c));
        if (icase_) {
            add_case_folded(node->bytes);
        }
        return node;
    }

    // fills `set` for class-style escapes; returns false if the escape is an
    // assertion (\b \B) which cannot appear inside [...]
    bool escape_to_set(ByteSet& set, std::size_t at) {
        char c = p_[pos_++];
        switch (c) {
            case 'd': set_range(set, '0', '9'); return true;
            case 'D': set_range(set, '0', '9'); negate(set); return true;
            case 'w':
                set_range(set, 'a', 'z');
                set_range(set, 'A', 'Z');
                set_range(set, '0', '9');
                set_byte(set, '_');
                return true;
            case 'W':
                set_range(set, 'a', 'z');
                set_range(set, 'A', 'Z');
                set_range(set, '0', '9');
                set_byte(set, '_');
                negate(set);
                return true;
            case 's':
                for (unsigned char ws : {' ', '\t', '\n', '\r', '\f', '\v'}) {
                    set_byte(set, ws);
                }
                return true;
            case 'S':
                for (unsigned char ws : {' ', '\t', '\n', '\r', '\f', '\v'}) {
                    set_byte(set, ws);
                }
                negate(set);
                return true;
            case 'n': set_byte(set, '\n'); return true;
            case 'r': set_byte(set, '\r'); return true;
            case 't': set_byte(set, '\t'); return true;
            case 'f': set_byte(set, '\f'); return true;
            case 'v': set_byte(set, '\v'); return true;
            case '0': set_byte(set, '\0'); return true;
            case 'x': {
                if (pos_ + 1 >= p_.size() || !std::isxdigit(static_cast<unsigned char>(p_[pos_])) ||
                    !std::isxdigit(static_cast<unsigned char>(p_[pos_ + 1]))) {
                    throw ParseError("malformed \\x escape", at);
                }
                auto hex = [](char h) -> unsigned {
                    if (h >= '0' && h <= '9') return static_cast<unsigned>(h - '0');
                    if (h >= 'a' && h <= 'f') return static_cast<unsigned>(h - 'a' + 10);
                    return static_cast<unsigned>(h - 'A' + 10);
                };
                unsigned value = hex(p_[pos_]) * 16 + hex(p_[pos_ + 1]);
                pos_ += 2;
                set_byte(set, static_cast<unsigned char>(value));
                return true;
            }
            case 'b':
            case 'B':
                return false;
            default:
                if (std::isalnum(static_cast<unsigned char>(c))) {
                    throw ParseError(std::string("unsupported escape \\") + c, at);
                }
                set_byte(set, static_cast<unsigned char>(c));  // escaped metacharacter
                return true;
        }
    }

    NodePtr parse_escape() {
        std::size_t at = pos_;
        ++pos_;  // backslash
        if (eof()) {
            throw ParseError("trailing backslash", at);
        }
        char c = peek();
        ByteSet set{};
        if (!escape_to_set(set, at)) {
            auto node = make_node(Node::Kind::assertion);
            node->assert_kind = c == 'b' ? 2 : 3;
            return node;
        }
        auto node = make_node(Node::Kind::byte_class);
        node->bytes = set;
        if (icase_) {
            add_case_folded(node->bytes);
        }
        return node;
    }

    NodePtr parse_class() {
        std::size_t open = pos_;
        ++pos_;  // '['
        bool negated = false;
        if (!eof() && peek() == '^') {
            negated = true;
            ++pos_;
        }
        ByteSet set{};
        bool first = true;
        while (true) {
            if (eof()) {
                throw ParseError("unterminated character class", open);
            }
            char c = peek();
            if (c == ']' && !first) {
                ++pos_;
                break;
            }
            first = false;
            ByteSet item{};
            bool single = false;
            unsigned char single_byte = 0;
            if (c == '\\') {
                std::size_t at = pos_;
                ++pos_;
                if (eof()) {
                    throw ParseError("trailing backslash in class", at);
                }
                if (!escape_to_set(item, at)) {
                    throw ParseError("\\b is not valid inside a class", at);
                }
                // treat one-byte escapes as range-capable endpoints
                int count = 0;
                for (unsigned b = 0; b < 256 && count <= 1; ++b) {
                    if (has_byte(item, static_cast<unsigned char>(b))) {
                        ++count;
                        single_byte = static_cast<unsigned char>(b);
                    }
                }
                single = count == 1;
            } else {
                ++pos_;
                single = true;
                single_byte = static_cast<unsigned char>(c);
                set_byte(item, single_byte);
            }
            if (single && !eof() && peek() == '-' && pos_ + 1 < p_.size() && p_[pos_ + 1] != ']') {
                ++pos_;  // '-'
                char hi_char = peek();
                unsigned char hi;
                if (hi_char == '\\') {
                    std::size_t at = pos_;
                    ++pos_;
                    ByteSet hi_set{};
                    if (eof() || !escape_to_set(hi_set, at)) {
                        throw ParseError("bad range endpoint", at);
                    }
                    int count = 0;
                    unsigned char only = 0;
                    for (unsigned b = 0; b < 256; ++b) {
                        if (has_byte(hi_set, static_cast<unsigned char>(b))) {
                            ++count;
                            only = static_cast<unsigned char>(b);
                        }
                    }
                    if (count != 1) {
                        throw ParseError("bad range endpoint", at);
                    }
                    hi = only;
                } else {
                    ++pos_;
                    hi = static_cast<unsigned char>(hi_char);
                }
                if (hi < single_byte) {
                    throw ParseError("character range out of order", open);
                }
                set_range(set, single_byte, hi);
            } else {
                for (std::size_t w = 0; w < item.size(); ++w) {
                    set[w] |= item[w];
                }
            }
        }
        if (icase_) {
            add_case_folded(set);  // fold before negation so [^a] excludes 'A' too
        }
        if (negated) {
            negate(set);
        }
        auto node = make_node(Node::Kind::byte_class);
        node->bytes = set;
        return node;
    }

    std::string_view p_;
    std::size_t pos_ = 0;
    bool icase_;
    bool dotall_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Compiler: AST -> instruction list
// ---------------------------------------------------------------------------

struct Pattern::Matcher {
    // compilation context
    std::vector<Inst>* insts;
    std::vector<ByteSet>* bitmaps;

    std::int32_t emit(Inst inst) {
        if (insts->size() >= kMaxProgram) {
            throw ParseError("pattern expands to too many states", 0);
        }
        insts->push_back(inst);
        return static_cast<std::int32_t>(insts->size() - 1);
    }

    std::int32_t add_bitmap(const ByteSet& set) {
        for (std::size_t i = 0; i < bitmaps->size(); ++i) {
            if ((*bitmaps)[i] == set) {
                return static_cast<std::int32_t>(i);
            }
        }
        bitmaps->push_back(set);
        return static_cast<std::int32_t>(bitmaps->size() - 1);
    }

    // compiles node; returns entry pc; patches all dangling exits to `next`
    // strategy: compile in reverse (continuation passing): given `next`, return entry.
    std::int32_t compile(const Node& node, std::int32_t next) {
        switch (node.kind) {
            case Node::Kind::empty:
                return next;
            case Node::Kind::byte_class: {
                Inst inst;
                inst.op = Op::byte;
                inst.x = next;
                inst.bitmap = add_bitmap(node.bytes);
                return emit(inst);
            }
            case Node::Kind::assertion: {
                Inst inst;
                inst.op = Op::assertion;
                inst.x = next;
                inst.kind = node.assert_kind == 0   ? Assert::text_start
                            : node.assert_kind == 1 ? Assert::text_end
                            : node.assert_kind == 2 ? Assert::word_boundary
                                                    : Assert::not_word_boundary;
                return emit(inst);
            }
            case Node::Kind::concat: {
                std::int32_t entry = next;
                for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
                    entry = compile(**it, entry);
                }
                return entry;
            }
            case Node::Kind::alternate: {
                std::int32_t entry = compile(*node.children.back(), next);
                for (auto it = node.children.rbegin() + 1; it != node.children.rend(); ++it) {
                    std::int32_t branch = compile(**it, next);
                    Inst split;
                    split.op = Op::split;
                    split.x = branch;
                    split.y = entry;
                    entry = emit(split);
                }
                return entry;
            }
            case Node::Kind::repeat: {
                const Node& body = *node.children.front();
                int min = node.rep_min;
                int max = node.rep_max;
                std::int32_t entry = next;
                if (max == -1) {
                    // star/plus tail: loop node
                    Inst split;
                    split.op = Op::split;
                    split.x = -1;  // patched to body entry below
                    split.y = next;
                    std::int32_t loop = emit(split);
                    std::int32_t body_entry = compile(body, loop);
                    (*insts)[static_cast<std::size_t>(loop)].x = body_entry;
                    entry = loop;
                } else {
                    // (max - min) optional copies
                    for (int i = min; i < max; ++i) {
                        std::int32_t body_entry = compile(body, entry);
                        Inst split;
                        split.op = Op::split;
                        split.x = body_entry;
                        split.y = next;
                        entry = emit(split);
                    }
                }
                for (int i = 0; i < min; ++i) {
                    entry = compile(body, entry);
                }
                return entry;
            }
        }
        return next;
    }
};

Pattern Pattern::compile(std::string_view pattern, bool icase, bool dotall) {
    Parser parser(pattern, icase, dotall);
    NodePtr ast = parser.parse();
    Pattern out;
    Matcher ctx{&out.insts_, &out.bitmaps_};
    Inst match;
    match.op = Op::match;
    std::int32_t match_pc = ctx.emit(match);
    out.start_ = ctx.compile(*ast, match_pc);
    return out;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

struct ThreadList {
    std::vector<std::int32_t> pcs;
    std::vector<std::uint32_t> mark;  // epoch per instruction
    std::uint32_t epoch = 0;

    void reset(std::size_t n) {
        if (mark.size() != n) {
            mark.assign(n, 0);
            epoch = 0;
        }
        if (++epoch == 0) {  // wrapped: stale marks could collide
            std::fill(mark.begin(), mark.end(), 0);
            epoch = 1;
        }
        pcs.clear();
    }

    bool seen(std::int32_t pc) {
        auto i = static_cast<std::size_t>(pc);
        if (mark[i] == epoch) {
            return true;
        }
        mark[i] = epoch;
        return false;
    }
};

}  // namespace

std::optional<std::size_t> Pattern::match_at(std::string_view text, std::size_t start,
                                             std::uint64_t& budget) const {
    thread_local ThreadList current;
    thread_local ThreadList next_list;
    current.reset(insts_.size());
    next_list.reset(insts_.size());

    std::size_t best = SIZE_MAX;
    auto prev_char = [&](std::size_t pos) -> int {
        return pos == 0 ? -1 : static_cast<unsigned char>(text[pos - 1]);
    };
    auto next_char = [&](std::size_t pos) -> int {
        return pos >= text.size() ? -1 : static_cast<unsigned char>(text[pos]);
    };

    // iterative epsilon closure into `list`
    auto add_thread = [&](ThreadList& list, std::int32_t pc, std::size_t pos) {
        std::vector<std::int32_t> stack{pc};
        while (!stack.empty()) {
            if (budget == 0) {
                return false;
            }
            --budget;
            std::int32_t cur = stack.back();
            stack.pop_back();
            if (list.seen(cur)) {
                continue;
            }
            const Inst& inst = insts_[static_cast<std::size_t>(cur)];
            switch (inst.op) {
                case Op::jump:
                    stack.push_back(inst.x);
                    break;
                case Op::split:
                    stack.push_back(inst.y);
                    stack.push_back(inst.x);
                    break;
                case Op::assertion: {
                    bool pass = false;
                    switch (inst.kind) {
                        case Assert::text_start: pass = pos == 0; break;
                        case Assert::text_end: pass = pos == text.size(); break;
                        case Assert::word_boundary:
                            pass = is_word_byte(prev_char(pos)) != is_word_byte(next_char(pos));
                            break;
                        case Assert::not_word_boundary:
                            pass = is_word_byte(prev_char(pos)) == is_word_byte(next_char(pos));
                            break;
                    }
                    if (pass) {
                        stack.push_back(inst.x);
                    }
                    break;
                }
                case Op::byte:
                case Op::match:
                    list.pcs.push_back(cur);
                    break;
            }
        }
        return true;
    };

    if (!add_thread(current, start_, start)) {
        return std::nullopt;
    }
    std::size_t pos = start;
    while (true) {
        // harvest matches in the current set
        for (std::int32_t pc : current.pcs) {
            if (insts_[static_cast<std::size_t>(pc)].op == Op::match) {
                best = pos;  // longest so far: overwritten as pos advances
            }
        }
        if (pos >= text.size() || current.pcs.empty()) {
            break;
        }
        unsigned char c = static_cast<unsigned char>(text[pos]);
        next_list.reset(insts_.size());
        for (std::int32_t pc : current.pcs) {
            const Inst& inst = insts_[static_cast<std::size_t>(pc)];
            if (inst.op != Op::byte) {
                continue;
            }
            if (budget == 0) {
                return std::nullopt;
            }
            --budget;
            if (has_byte(bitmaps_[static_cast<std::size_t>(inst.bitmap)], c)) {
                if (!add_thread(next_list, inst.x, pos + 1)) {
                    return std::nullopt;
                }
            }
        }
        // only the thread sets move; each list keeps its own mark/epoch pair
        std::swap(current.pcs, next_list.pcs);
        ++pos;
    }
    return best;
}

std::optional<std::vector<Pattern::Span>> Pattern::find_all(std::string_view text,
                                                            std::uint64_t step_budget) const {
    std::vector<Span> spans;
    std::uint64_t budget = step_budget;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = match_at(text, pos, budget);
        if (!end) {
            return std::nullopt;  // budget exhausted
        }
        if (*end != SIZE_MAX) {
            spans.push_back({pos, *end});
            pos = *end > pos ? *end : pos + 1;
        } else {
            ++pos;
        }
    }
    return spans;
}

std::optional<bool> Pattern::search(std::string_view text, std::uint64_t step_budget) const {
    std::uint64_t budget = step_budget;
    for (std::size_t pos = 0; pos <= text.size(); ++pos) {
        auto end = match_at(text, pos, budget);
        if (!end) {
            return std::nullopt;
        }
        if (*end != SIZE_MAX) {
            return true;
        }
    }
    return false;
}

}  // namespace rulegen::rex
