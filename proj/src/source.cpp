#include "weaver/source.hpp"

#include "lexer.hpp"
#include "weaver/error.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <unordered_set>

namespace weaver {

using detail::LogicalLine;
using detail::TokKind;
using detail::Token;

std::string to_string(const LineId& id) { return id.file + ":" + std::to_string(id.line); }

std::string_view kind_name(StmtKind kind) {
    switch (kind) {
        case StmtKind::FunctionDef: return "def";
        case StmtKind::ClassDef: return "class";
        case StmtKind::Decorator: return "decorator";
        case StmtKind::If: return "if";
        case StmtKind::Elif: return "elif";
        case StmtKind::Else: return "else";
        case StmtKind::For: return "for";
        case StmtKind::While: return "while";
        case StmtKind::Return: return "return";
        case StmtKind::Assign: return "assign";
        case StmtKind::AugAssign: return "augassign";
        case StmtKind::AnnAssign: return "annassign";
        case StmtKind::Expr: return "expr";
        case StmtKind::Docstring: return "docstring";
        case StmtKind::Import: return "import";
        case StmtKind::Pass: return "pass";
        case StmtKind::Break: return "break";
        case StmtKind::Continue: return "continue";
        case StmtKind::Raise: return "raise";
        case StmtKind::Assert: return "assert";
        case StmtKind::Del: return "del";
        case StmtKind::Global: return "global";
    }
    return "?";
}

bool is_block_header(StmtKind kind) {
    switch (kind) {
        case StmtKind::FunctionDef:
        case StmtKind::ClassDef:
        case StmtKind::If:
        case StmtKind::Elif:
        case StmtKind::Else:
        case StmtKind::For:
        case StmtKind::While: return true;
        default: return false;
    }
}

bool is_decision(StmtKind kind) {
    return kind == StmtKind::If || kind == StmtKind::Elif || kind == StmtKind::For || kind == StmtKind::While;
}

bool is_executable(StmtKind kind) {
    switch (kind) {
        case StmtKind::FunctionDef:
        case StmtKind::ClassDef:
        case StmtKind::Decorator:
        case StmtKind::Else:
        case StmtKind::Docstring:
        case StmtKind::Global: return false;
        default: return true;
    }
}

std::optional<int> SourceUnit::statement_at(int line) const {
    auto it = first_line_index.upper_bound(line);
    if (it == first_line_index.begin()) return std::nullopt;
    --it;
    const auto& stmt = statements[static_cast<std::size_t>(it->second)];
    if (line >= stmt.line && line <= stmt.last_line) return it->second;
    return std::nullopt;
}

std::optional<int> SourceUnit::statement_starting_at(int line) const {
    auto it = first_line_index.find(line);
    if (it == first_line_index.end()) return std::nullopt;
    return it->second;
}

namespace {

using Tokens = std::vector<Token>;
using TokIt = Tokens::const_iterator;

bool is_op(const Token& t, std::string_view op) { return t.kind == TokKind::Op && t.text == op; }
bool is_name(const Token& t, std::string_view word) { return t.kind == TokKind::Name && t.text == word; }
bool is_open(const Token& t) { return t.kind == TokKind::Op && (t.text == "(" || t.text == "[" || t.text == "{"); }
bool is_close(const Token& t) { return t.kind == TokKind::Op && (t.text == ")" || t.text == "]" || t.text == "}"); }

bool is_aug_op(const Token& t) {
    static const std::unordered_set<std::string> ops = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                                        ">>=", "<<=", "&=", "|=", "^=", "@="};
    return t.kind == TokKind::Op && ops.count(t.text) > 0;
}

void add_unique(std::vector<std::string>& names, const std::string& name) {
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
}

/// Finds the first token at bracket depth zero (relative to `begin`) matching `pred`.
template <typename Pred>
TokIt find_top_level(TokIt begin, TokIt end, Pred pred) {
    int depth = 0;
    for (auto it = begin; it != end; ++it) {
        if (depth == 0 && pred(*it)) return it;
        if (is_open(*it)) ++depth;
        if (is_close(*it)) --depth;
    }
    return end;
}

class NameCollector {
public:
    NameCollector(const std::string& file) : file_(file) {}

    /// Names read by an expression. Comprehension and lambda bound names
    /// are excluded; walrus targets are reported through `walrus`.
    void collect(TokIt begin, TokIt end, std::vector<std::string>& refs, std::vector<std::string>& walrus) const {
        std::unordered_set<std::string> bound;
        // Comprehension targets and lambda parameters.
        for (auto it = begin; it != end; ++it) {
            if (is_name(*it, "for")) {
                for (auto jt = it + 1; jt != end && !is_name(*jt, "in"); ++jt) {
                    if (jt->kind == TokKind::Name && !detail::is_keyword(jt->text) && !is_op(*(jt - 1), "."))
                        bound.insert(jt->text);
                }
            } else if (is_name(*it, "lambda")) {
                bool expect_param = true;
                for (auto jt = it + 1; jt != end && !is_op(*jt, ":"); ++jt) {
                    if (expect_param && jt->kind == TokKind::Name) {
                        bound.insert(jt->text);
                        expect_param = false;
                    } else if (is_op(*jt, ",") || is_op(*jt, "*") || is_op(*jt, "**")) {
                        expect_param = true;
                    }
                }
            }
        }
        int depth = 0;
        for (auto it = begin; it != end; ++it) {
            const Token& t = *it;
            if (is_open(t)) ++depth;
            if (is_close(t)) --depth;
            if (t.kind == TokKind::String && t.fstring) {
                collect_fstring(t, refs, walrus);
                continue;
            }
            if (t.kind != TokKind::Name || detail::is_keyword(t.text)) continue;
            if (it != begin && is_op(*(it - 1), ".")) continue;
            auto next = it + 1;
            if (next != end && is_op(*next, ":=")) {
                add_unique(walrus, t.text);
                continue;
            }
            if (depth > 0 && next != end && is_op(*next, "=")) continue;  // keyword argument
            if (bound.count(t.text) > 0) continue;
            add_unique(refs, t.text);
        }
    }

    void collect_fstring(const Token& t, std::vector<std::string>& refs, std::vector<std::string>& walrus) const {
        const std::string& body = t.string_body;
        std::size_t i = 0;
        while (i < body.size()) {
            if (body[i] == '{') {
                if (i + 1 < body.size() && body[i + 1] == '{') {
                    i += 2;
                    continue;
                }
                int depth = 1;
                std::size_t j = i + 1;
                std::size_t field_end = std::string::npos;
                while (j < body.size() && depth > 0) {
                    char c = body[j];
                    if (c == '{' || c == '(' || c == '[') ++depth;
                    if (c == '}' || c == ')' || c == ']') --depth;
                    if (depth == 1 && (c == '!' || c == ':') && field_end == std::string::npos &&
                        !(c == '!' && j + 1 < body.size() && body[j + 1] == '=')) {
                        field_end = j;
                    }
                    ++j;
                }
                std::size_t stop = field_end == std::string::npos ? j - 1 : field_end;
                std::string expr = body.substr(i + 1, stop > i + 1 ? stop - i - 1 : 0);
                if (!expr.empty() && expr.back() == '=') expr.pop_back();
                try {
                    auto toks = detail::lex_fragment(expr, file_, t.line);
                    collect(toks.cbegin(), toks.cend(), refs, walrus);
                } catch (const SyntaxError&) {
                    // Unparseable field: contributes no names.
                }
                i = j;
            } else {
                ++i;
            }
        }
    }

    /// Assignment target list. Plain names are strong defs; subscript and
    /// attribute writes define (partially) and read their base name.
    void target(TokIt begin, TokIt end, Statement& stmt) const {
        bool expect_start = true;
        for (auto it = begin; it != end; ++it) {
            const Token& t = *it;
            if (expect_start && (is_op(t, "(") || is_op(t, "[") || is_op(t, "*"))) continue;
            if (is_op(t, ",")) {
                expect_start = true;
                continue;
            }
            if (is_op(t, ")") || is_op(t, "]")) continue;
            if (t.kind == TokKind::Name && expect_start && !detail::is_keyword(t.text)) {
                expect_start = false;
                auto next = it + 1;
                if (next != end && (is_op(*next, ".") || is_op(*next, "[") || is_op(*next, "("))) {
                    add_unique(stmt.defined, t.text);
                    add_unique(stmt.partial_defs, t.text);
                    add_unique(stmt.referenced, t.text);
                    // Consume the access chain up to the end of this element.
                    int depth = 0;
                    auto jt = next;
                    for (; jt != end; ++jt) {
                        if (depth == 0 && (is_op(*jt, ",") || is_op(*jt, ")") || is_op(*jt, "]"))) break;
                        if (is_open(*jt)) ++depth;
                        if (is_close(*jt)) {
                            --depth;
                            if (depth < 0) break;
                        }
                    }
                    std::vector<std::string> walrus;
                    collect(next, jt, stmt.referenced, walrus);
                    for (auto& w : walrus) add_unique(stmt.defined, w);
                    it = jt - 1;
                } else {
                    add_unique(stmt.defined, t.text);
                }
                continue;
            }
            // Anything else inside a target (e.g. starred expression pieces) is read.
            if (t.kind == TokKind::Name && !detail::is_keyword(t.text)) add_unique(stmt.referenced, t.text);
        }
    }

    void expression(TokIt begin, TokIt end, Statement& stmt) const {
        std::vector<std::string> walrus;
        collect(begin, end, stmt.referenced, walrus);
        for (auto& w : walrus) add_unique(stmt.defined, w);
        method_calls(begin, end, stmt);
    }

    /// `obj.method(...)` may update `obj` in place (`xs.append(v)`), so it
    /// counts as a partial def of `obj` unless the method is a well-known
    /// read-only accessor.
    void method_calls(TokIt begin, TokIt end, Statement& stmt) const {
        static const std::unordered_set<std::string> read_only = {
            "get",     "keys",     "values",  "items",   "copy",    "count",    "index",   "find",
            "rfind",   "startswith", "endswith", "lower", "upper",   "strip",    "lstrip",  "rstrip",
            "split",   "rsplit",   "join",    "format",  "replace", "isdigit",  "isalpha", "isalnum",
            "isspace", "islower",  "isupper", "encode",  "decode",  "title",    "capitalize", "zfill",
            "issubset", "issuperset", "isdisjoint", "union", "intersection", "difference", "bit_length"};
        for (auto it = begin; it != end; ++it) {
            if (it->kind != TokKind::Name || detail::is_keyword(it->text)) continue;
            if (it != begin && is_op(*(it - 1), ".")) continue;
            auto dot = it + 1;
            if (dot == end || !is_op(*dot, ".")) continue;
            auto method = dot + 1;
            if (method == end || method->kind != TokKind::Name) continue;
            auto paren = method + 1;
            if (paren == end || !is_op(*paren, "(")) continue;
            if (read_only.count(method->text) > 0) continue;
            if (std::find(stmt.referenced.begin(), stmt.referenced.end(), it->text) == stmt.referenced.end()) continue;
            add_unique(stmt.defined, it->text);
            add_unique(stmt.partial_defs, it->text);
        }
    }

private:
    const std::string& file_;
};

struct PendingStatement {
    Statement stmt;
    bool opens_block = false;
};

class Parser {
public:
    Parser(std::string_view text, std::string path) : path_(std::move(path)), names_(path_) {
        unit_.path = path_;
        unit_.text = std::string(text);
    }

    SourceUnit run() {
        auto lexed = detail::lex(unit_.text, path_);
        unit_.physical_lines = std::move(lexed.physical_lines);
        unit_.comment_columns = std::move(lexed.comment_columns);

        for (const auto& logical : lexed.lines) classify(logical);
        build_blocks();
        assign_functions();
        for (std::size_t i = 0; i < unit_.statements.size(); ++i) {
            const auto& s = unit_.statements[i];
            unit_.first_line_index[s.line] = static_cast<int>(i);
            if (is_executable(s.kind)) unit_.executable_lines.insert(s.line);
            if (is_decision(s.kind)) unit_.decision_lines.insert(s.line);
        }
        return std::move(unit_);
    }

private:
    int indent_of(int line) const {
        const std::string& text = unit_.physical_lines[static_cast<std::size_t>(line - 1)];
        int col = 0;
        for (char c : text) {
            if (c == ' ') {
                ++col;
            } else if (c == '\t') {
                col = (col / 8 + 1) * 8;
            } else if (c == '\f') {
                col = 0;
            } else {
                break;
            }
        }
        return col;
    }

    [[noreturn]] void unsupported(int line, const std::string& what) const {
        throw UnsupportedConstruct(path_, line, what);
    }
    [[noreturn]] void syntax(int line, const std::string& what) const { throw SyntaxError(path_, line, what); }

    std::string join(TokIt begin, TokIt end) const {
        std::string out;
        const Token* prev = nullptr;
        for (auto it = begin; it != end; ++it) {
            if (prev != nullptr) {
                bool glue = (prev->line == it->line &&
                             prev->column + static_cast<int>(prev->text.size()) == it->column);
                if (!glue) out += ' ';
            }
            out += it->text;
            prev = &*it;
        }
        return out;
    }

    /// Locates the ':' that ends a compound-statement header and rejects inline bodies.
    TokIt header_colon(const Tokens& toks, TokIt from, int line) const {
        auto colon = find_top_level(from, toks.cend(), [](const Token& t) { return is_op(t, ":"); });
        // Skip lambda colons at depth zero: the header colon is the last top-level one.
        TokIt last = toks.cend();
        int depth = 0;
        for (auto it = from; it != toks.cend(); ++it) {
            if (depth == 0 && is_op(*it, ":")) last = it;
            if (is_open(*it)) ++depth;
            if (is_close(*it)) --depth;
        }
        if (colon == toks.cend()) syntax(line, "expected ':'");
        if (last + 1 != toks.cend()) unsupported(line, "statement body on the same line as its header");
        return last;
    }

    void classify(const LogicalLine& logical) {
        const Tokens& toks = logical.tokens;
        Statement s;
        s.line = logical.first_line;
        s.last_line = std::max(logical.last_line, logical.first_line);
        s.indent = indent_of(s.line);
        s.code = join(toks.cbegin(), toks.cend());
        const Token& first = toks.front();
        int line = s.line;

        auto rest = toks.cbegin() + 1;
        if (first.kind == TokKind::Name) {
            const std::string& w = first.text;
            if (w == "try" || w == "except" || w == "finally" || w == "with" || w == "async" || w == "await") {
                unsupported(line, w);
            }
            if (w == "match" && toks.size() > 1 && is_op(toks.back(), ":") && !is_op(toks[1], "=") &&
                !is_op(toks[1], ".") && !is_op(toks[1], "(") && !is_op(toks[1], "[")) {
                unsupported(line, "match");
            }
            if (w == "def") {
                s.kind = StmtKind::FunctionDef;
                if (toks.size() < 2 || toks[1].kind != TokKind::Name) syntax(line, "expected function name");
                auto colon = header_colon(toks, rest, line);
                s.defined.push_back(toks[1].text);
                auto open = rest + 1;
                if (open == toks.cend() || !is_op(*open, "(")) syntax(line, "expected '('");
                auto close = find_top_level(open + 1, colon, [](const Token& t) { return is_op(t, ")"); });
                if (close == colon) syntax(line, "expected ')'");
                // Parameters: names at the start of each top-level element.
                bool expect = true;
                int depth = 0;
                std::vector<std::string> params;
                for (auto it = open + 1; it != close; ++it) {
                    if (is_open(*it)) ++depth;
                    if (is_close(*it)) --depth;
                    if (depth != 0) continue;
                    if (is_op(*it, ",")) {
                        expect = true;
                    } else if (is_op(*it, "*") || is_op(*it, "**") || is_op(*it, "/")) {
                        // marker, next name (if any) is still a parameter
                    } else if (expect && it->kind == TokKind::Name) {
                        params.push_back(it->text);
                        expect = false;
                    } else {
                        expect = false;
                    }
                }
                std::vector<std::string> walrus;
                std::vector<std::string> refs;
                names_.collect(open + 1, colon, refs, walrus);
                for (auto& r : refs) {
                    if (std::find(params.begin(), params.end(), r) == params.end()) add_unique(s.referenced, r);
                }
                pending_params_[unit_.statements.size()] = std::move(params);
                push(std::move(s), true);
                return;
            }
            if (w == "class") {
                s.kind = StmtKind::ClassDef;
                if (toks.size() < 2 || toks[1].kind != TokKind::Name) syntax(line, "expected class name");
                auto colon = header_colon(toks, rest, line);
                s.defined.push_back(toks[1].text);
                names_.expression(rest + 1, colon, s);
                push(std::move(s), true);
                return;
            }
            if (w == "if" || w == "elif" || w == "while") {
                s.kind = w == "if" ? StmtKind::If : w == "elif" ? StmtKind::Elif : StmtKind::While;
                auto colon = header_colon(toks, rest, line);
                if (colon == rest) syntax(line, "expected condition");
                names_.expression(rest, colon, s);
                push(std::move(s), true);
                return;
            }
            if (w == "else") {
                s.kind = StmtKind::Else;
                if (toks.size() < 2 || !is_op(toks[1], ":")) syntax(line, "expected ':' after else");
                if (toks.size() > 2) unsupported(line, "statement body on the same line as its header");
                push(std::move(s), true);
                return;
            }
            if (w == "for") {
                s.kind = StmtKind::For;
                auto colon = header_colon(toks, rest, line);
                auto in = find_top_level(rest, colon, [](const Token& t) { return is_name(t, "in"); });
                if (in == colon) syntax(line, "expected 'in'");
                names_.target(rest, in, s);
                names_.expression(in + 1, colon, s);
                push(std::move(s), true);
                return;
            }
            if (w == "return" || w == "raise" || w == "assert" || w == "del" || w == "yield") {
                s.kind = w == "return"   ? StmtKind::Return
                         : w == "raise"  ? StmtKind::Raise
                         : w == "assert" ? StmtKind::Assert
                         : w == "del"    ? StmtKind::Del
                                         : StmtKind::Expr;
                auto from = w == "yield" ? toks.cbegin() : rest;
                names_.expression(from, toks.cend(), s);
                push(std::move(s), false);
                return;
            }
            if (w == "pass" || w == "break" || w == "continue") {
                s.kind = w == "pass" ? StmtKind::Pass : w == "break" ? StmtKind::Break : StmtKind::Continue;
                if (toks.size() > 1 && !is_op(toks[1], ";")) syntax(line, "unexpected tokens after " + w);
                push(std::move(s), false);
                return;
            }
            if (w == "global" || w == "nonlocal") {
                s.kind = StmtKind::Global;
                push(std::move(s), false);
                return;
            }
            if (w == "import" || w == "from") {
                s.kind = StmtKind::Import;
                import_names(toks, s);
                push(std::move(s), false);
                return;
            }
        }
        if (is_op(first, "@")) {
            s.kind = StmtKind::Decorator;
            names_.expression(rest, toks.cend(), s);
            push(std::move(s), false);
            return;
        }
        if (first.kind == TokKind::String &&
            std::all_of(toks.begin(), toks.end(), [](const Token& t) { return t.kind == TokKind::String; })) {
            s.kind = StmtKind::Docstring;
            push(std::move(s), false);
            return;
        }
        simple_statement(toks, s);
        push(std::move(s), false);
    }

    void import_names(const Tokens& toks, Statement& s) const {
        bool from = toks.front().text == "from";
        auto it = toks.cbegin() + 1;
        if (from) {
            while (it != toks.cend() && !is_name(*it, "import")) ++it;
            if (it == toks.cend()) syntax(s.line, "expected 'import'");
        }
        ++it;
        // Elements separated by commas: dotted.name [as alias]
        std::vector<std::string> element;
        auto finish = [&](std::vector<std::string>& parts) {
            if (parts.empty()) return;
            auto as = std::find(parts.begin(), parts.end(), "as");
            if (as != parts.end() && as + 1 != parts.end()) {
                add_unique(s.defined, *(as + 1));
            } else if (parts.front() != "*") {
                add_unique(s.defined, parts.front());
            }
            parts.clear();
        };
        for (; it != toks.cend(); ++it) {
            if (is_op(*it, "(") || is_op(*it, ")")) continue;
            if (is_op(*it, ",")) {
                finish(element);
                continue;
            }
            if (is_op(*it, ".")) continue;
            element.push_back(it->text);
        }
        finish(element);
    }

    void simple_statement(const Tokens& toks, Statement& s) const {
        // Semicolon-separated statements share one line.
        auto begin = toks.cbegin();
        bool any = false;
        while (begin != toks.cend()) {
            auto semi = find_top_level(begin, toks.cend(), [](const Token& t) { return is_op(t, ";"); });
            if (semi != begin) {
                one_simple(begin, semi, s, any);
                any = true;
            }
            begin = semi == toks.cend() ? semi : semi + 1;
        }
    }

    void one_simple(TokIt begin, TokIt end, Statement& s, bool not_first) const {
        auto aug = find_top_level(begin, end, [](const Token& t) { return is_aug_op(t); });
        if (aug != end) {
            if (!not_first) s.kind = StmtKind::AugAssign;
            names_.target(begin, aug, s);
            // Augmented targets are read as well as written.
            for (const auto& d : s.defined) add_unique(s.referenced, d);
            names_.expression(aug + 1, end, s);
            return;
        }
        std::vector<TokIt> eqs;
        int depth = 0;
        for (auto it = begin; it != end; ++it) {
            if (is_open(*it)) ++depth;
            if (is_close(*it)) --depth;
            if (depth == 0 && is_op(*it, "=")) eqs.push_back(it);
        }
        auto ann = find_top_level(begin, eqs.empty() ? end : eqs.front(), [](const Token& t) { return is_op(t, ":"); });
        bool lambda_first = begin != end && is_name(*begin, "lambda");
        if (ann != (eqs.empty() ? end : eqs.front()) && !lambda_first) {
            if (!not_first) s.kind = StmtKind::AnnAssign;
            if (!eqs.empty()) {
                names_.target(begin, ann, s);
                names_.expression(eqs.front() + 1, end, s);
            } else {
                // Bare annotation: declares nothing at runtime.
            }
            return;
        }
        if (!eqs.empty()) {
            if (!not_first) s.kind = StmtKind::Assign;
            auto seg_begin = begin;
            for (auto eq : eqs) {
                names_.target(seg_begin, eq, s);
                seg_begin = eq + 1;
            }
            names_.expression(seg_begin, end, s);
            return;
        }
        if (!not_first) s.kind = StmtKind::Expr;
        names_.expression(begin, end, s);
    }

    void push(Statement s, bool opens_block) {
        pending_.push_back(PendingStatement{std::move(s), opens_block});
        unit_.statements.push_back(pending_.back().stmt);
    }

    void build_blocks() {
        auto& stmts = unit_.statements;
        struct Frame {
            int header;        // -1 for module
            int body_indent;   // -1 until the first body statement fixes it
        };
        std::vector<Frame> stack{{-1, 0}};
        bool expect_body = false;
        // Last statement seen at each nesting level, for elif/else chaining.
        for (std::size_t i = 0; i < stmts.size(); ++i) {
            auto& s = stmts[i];
            int idx = static_cast<int>(i);
            if (expect_body) {
                int header_indent = stmts[static_cast<std::size_t>(stack.back().header)].indent;
                if (s.indent <= header_indent) syntax(s.line, "expected an indented block");
                stack.back().body_indent = s.indent;
                expect_body = false;
            } else {
                while (s.indent < stack.back().body_indent) {
                    stack.pop_back();
                    if (stack.empty()) syntax(s.line, "unindent does not match any outer indentation level");
                }
                if (s.indent != stack.back().body_indent) {
                    syntax(s.line, s.indent > stack.back().body_indent
                                       ? "unexpected indent"
                                       : "unindent does not match any outer indentation level");
                }
            }
            int parent = stack.back().header;
            s.parent = parent;
            auto& siblings = parent < 0 ? module_body_ : stmts[static_cast<std::size_t>(parent)].children;
            if (s.kind == StmtKind::Elif || s.kind == StmtKind::Else) {
                if (siblings.empty()) syntax(s.line, std::string("'") + std::string(kind_name(s.kind)) + "' without 'if'");
                int prev = siblings.back();
                auto& p = stmts[static_cast<std::size_t>(prev)];
                if (p.kind == StmtKind::For || p.kind == StmtKind::While) unsupported(s.line, "loop else clause");
                if (p.kind != StmtKind::If && p.kind != StmtKind::Elif) {
                    syntax(s.line, std::string("'") + std::string(kind_name(s.kind)) + "' without 'if'");
                }
                p.next_clause = idx;
                s.prev_clause = prev;
            }
            siblings.push_back(idx);
            if (pending_[i].opens_block) {
                stack.push_back(Frame{idx, -1});
                expect_body = true;
            }
        }
        if (expect_body) syntax(stmts.back().line, "expected an indented block");
    }

    void assign_functions() {
        auto& stmts = unit_.statements;
        for (std::size_t i = 0; i < stmts.size(); ++i) {
            auto& s = stmts[i];
            // Innermost enclosing def.
            int p = s.parent;
            while (p >= 0 && stmts[static_cast<std::size_t>(p)].kind != StmtKind::FunctionDef) {
                p = stmts[static_cast<std::size_t>(p)].parent;
            }
            if (p >= 0) s.function = header_to_function_.at(p);
            if (s.kind == StmtKind::FunctionDef) {
                FunctionInfo info;
                info.name = s.defined.front();
                info.header = static_cast<int>(i);
                info.params = pending_params_[i];
                int q = s.parent;
                if (q >= 0 && stmts[static_cast<std::size_t>(q)].kind == StmtKind::ClassDef) {
                    info.class_name = stmts[static_cast<std::size_t>(q)].defined.front();
                }
                header_to_function_[static_cast<int>(i)] = static_cast<int>(unit_.functions.size());
                unit_.functions.push_back(std::move(info));
            }
        }
    }

    std::string path_;
    SourceUnit unit_;
    NameCollector names_;
    std::vector<PendingStatement> pending_;
    std::vector<int> module_body_;
    std::map<std::size_t, std::vector<std::string>> pending_params_;
    std::map<int, int> header_to_function_;
};

}  // namespace

SourceUnit parse_unit(std::string_view text, std::string path) { return Parser(text, std::move(path)).run(); }

std::string strip_comments(std::string_view text) {
    auto lexed = detail::lex(text, "<text>");
    std::string out;
    for (std::size_t i = 0; i < lexed.physical_lines.size(); ++i) {
        std::string line = lexed.physical_lines[i];
        int col = lexed.comment_columns[i];
        if (col >= 0) line.resize(static_cast<std::size_t>(col));
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        out += line;
        out += '\n';
    }
    return out;
}

std::string module_name_for(std::string_view relative_path) {
    std::string p(relative_path);
    if (p.size() >= 3 && p.compare(p.size() - 3, 3, ".py") == 0) p.resize(p.size() - 3);
    while (p.rfind("./", 0) == 0) p.erase(0, 2);
    for (auto& c : p) {
        if (c == '/' || c == '\\') c = '.';
    }
    const std::string init = ".__init__";
    if (p.size() > init.size() && p.compare(p.size() - init.size(), init.size(), init) == 0) p.resize(p.size() - init.size());
    return p;
}

bool same_file(std::string_view a, std::string_view b) {
    namespace fs = std::filesystem;
    auto na = fs::path(a).lexically_normal();
    auto nb = fs::path(b).lexically_normal();
    if (na == nb) return true;
    auto suffix_of = [](const fs::path& shorter, const fs::path& longer) {
        std::vector<fs::path> s(shorter.begin(), shorter.end());
        std::vector<fs::path> l(longer.begin(), longer.end());
        if (s.empty() || s.size() > l.size()) return false;
        return std::equal(s.rbegin(), s.rend(), l.rbegin());
    };
    return suffix_of(na, nb) || suffix_of(nb, na);
}

}  // namespace weaver
