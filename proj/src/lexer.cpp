#include "lexer.hpp"

#include "weaver/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace weaver::detail {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",  "await", "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",   "yield"};

// Longest first so that greedy matching works.
constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=",
    "&=",  "|=",  "^=",  "@=",  "**",  "//", "<<", ">>", "+",  "-",  "*",  "/",  "%",  "@",  "&",  "|",
    "^",   "~",   "<",   ">",   "(",   ")",  "[",  "]",  "{",  "}",  ",",  ":",  ".",  ";",  "="};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
    if (word.size() > 2) return false;
    for (char c : word) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'f' && l != 'u') return false;
    }
    return true;
}

class Lexer {
public:
    Lexer(std::string_view text, const std::string& file, int first_line)
        : text_(text), file_(file), line_(first_line), line_start_(0) {}

    LexResult run() {
        LexResult out;
        // Physical lines.
        {
            std::size_t start = 0;
            while (start <= text_.size()) {
                auto nl = text_.find('\n', start);
                if (nl == std::string_view::npos) {
                    if (start < text_.size()) out.physical_lines.emplace_back(text_.substr(start));
                    break;
                }
                auto piece = text_.substr(start, nl - start);
                if (!piece.empty() && piece.back() == '\r') piece.remove_suffix(1);
                out.physical_lines.emplace_back(piece);
                start = nl + 1;
            }
        }
        out.comment_columns.assign(out.physical_lines.size(), -1);

        LogicalLine current;
        int depth = 0;
        std::vector<Token> stack;  // open brackets
        std::size_t pos = 0;
        auto flush = [&] {
            if (!current.tokens.empty()) {
                current.first_line = current.tokens.front().line;
                out.lines.push_back(std::move(current));
            }
            current = LogicalLine{};
        };

        while (pos < text_.size()) {
            char c = text_[pos];
            if (c == '\n') {
                if (depth == 0) flush();
                ++pos;
                ++line_;
                line_start_ = pos;
                continue;
            }
            if (c == '#') {
                auto idx = static_cast<std::size_t>(line_ - 1);
                if (idx < out.comment_columns.size()) out.comment_columns[idx] = column(pos);
                while (pos < text_.size() && text_[pos] != '\n') ++pos;
                continue;
            }
            if (c == '\\') {
                std::size_t next = pos + 1;
                if (next < text_.size() && text_[next] == '\r') ++next;
                if (next < text_.size() && text_[next] == '\n') {
                    pos = next + 1;
                    ++line_;
                    line_start_ = pos;
                    continue;
                }
                throw SyntaxError(file_, line_, "unexpected character after line continuation");
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
                ++pos;
                continue;
            }
            if (c == '"' || c == '\'') {
                current.tokens.push_back(read_string(pos, ""));
                current.last_line = line_;
                continue;
            }
            if (ident_start(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < text_.size() && ident_char(static_cast<unsigned char>(text_[pos]))) ++pos;
                std::string_view word = text_.substr(start, pos - start);
                if (pos < text_.size() && (text_[pos] == '"' || text_[pos] == '\'') && is_string_prefix(word)) {
                    current.tokens.push_back(read_string(pos, word, start));
                    current.last_line = line_;
                    continue;
                }
                current.tokens.push_back(Token{TokKind::Name, std::string(word), line_, column(start), false, {}});
                current.last_line = line_;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos + 1])))) {
                std::size_t start = pos;
                bool hex = c == '0' && pos + 1 < text_.size() && (text_[pos + 1] == 'x' || text_[pos + 1] == 'X');
                while (pos < text_.size()) {
                    char d = text_[pos];
                    if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
                        ++pos;
                    } else if ((d == '+' || d == '-') && !hex && pos > start &&
                               (text_[pos - 1] == 'e' || text_[pos - 1] == 'E')) {
                        ++pos;
                    } else {
                        break;
                    }
                }
                current.tokens.push_back(
                    Token{TokKind::Number, std::string(text_.substr(start, pos - start)), line_, column(start), false, {}});
                current.last_line = line_;
                continue;
            }
            // Operators.
            bool matched = false;
            for (auto op : kOperators) {
                if (text_.substr(pos, op.size()) == op) {
                    Token tok{TokKind::Op, std::string(op), line_, column(pos), false, {}};
                    if (op == "(" || op == "[" || op == "{") {
                        ++depth;
                        stack.push_back(tok);
                    } else if (op == ")" || op == "]" || op == "}") {
                        if (stack.empty()) throw SyntaxError(file_, line_, "unmatched '" + std::string(op) + "'");
                        char open = stack.back().text[0];
                        char want = op == ")" ? '(' : op == "]" ? '[' : '{';
                        if (open != want) {
                            throw SyntaxError(file_, line_, "closing '" + std::string(op) + "' does not match '" +
                                                                 stack.back().text + "'");
                        }
                        stack.pop_back();
                        --depth;
                    }
                    current.tokens.push_back(std::move(tok));
                    current.last_line = line_;
                    pos += op.size();
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                throw SyntaxError(file_, line_, std::string("invalid character '") + c + "'");
            }
        }
        if (depth != 0) {
            throw SyntaxError(file_, stack.back().line, "'" + stack.back().text + "' was never closed");
        }
        flush();
        return out;
    }

private:
    int column(std::size_t pos) const { return static_cast<int>(pos - line_start_); }

    Token read_string(std::size_t& pos, std::string_view prefix, std::size_t token_start = std::string_view::npos) {
        if (token_start == std::string_view::npos) token_start = pos;
        int start_line = line_;
        int start_col = column(token_start);
        char quote = text_[pos];
        bool triple = text_.substr(pos, 3) == std::string(3, quote);
        std::size_t open_len = triple ? 3 : 1;
        pos += open_len;
        std::size_t body_start = pos;
        while (true) {
            if (pos >= text_.size()) throw SyntaxError(file_, start_line, "unterminated string literal");
            char c = text_[pos];
            if (c == '\\') {
                if (pos + 1 < text_.size() && text_[pos + 1] == '\n') {
                    ++line_;
                    line_start_ = pos + 2;
                }
                pos += 2;
                continue;
            }
            if (c == '\n') {
                if (!triple) throw SyntaxError(file_, start_line, "unterminated string literal");
                ++line_;
                line_start_ = pos + 1;
                ++pos;
                continue;
            }
            if (c == quote) {
                if (!triple) break;
                if (text_.substr(pos, 3) == std::string(3, quote)) break;
            }
            ++pos;
        }
        std::size_t body_end = pos;
        pos += open_len;
        bool is_f = std::any_of(prefix.begin(), prefix.end(), [](char ch) { return ch == 'f' || ch == 'F'; });
        Token tok{TokKind::String, std::string(text_.substr(token_start, pos - token_start)), start_line, start_col,
                  is_f, std::string(text_.substr(body_start, body_end - body_start))};
        return tok;
    }

    std::string_view text_;
    const std::string& file_;
    int line_;
    std::size_t line_start_;
};

}  // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

LexResult lex(std::string_view text, const std::string& file) { return Lexer(text, file, 1).run(); }

std::vector<Token> lex_fragment(std::string_view text, const std::string& file, int line) {
    auto result = Lexer(text, file, line).run();
    std::vector<Token> tokens;
    for (auto& l : result.lines) {
        for (auto& t : l.tokens) tokens.push_back(std::move(t));
    }
    return tokens;
}

}  // namespace weaver::detail
