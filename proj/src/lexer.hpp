#pragma once

// Internal tokenizer for the supported Python subset.

#include <string>
#include <string_view>
#include <vector>

namespace weaver::detail {

enum class TokKind { Name, Number, String, Op };

struct Token {
    TokKind kind;
    std::string text;
    int line = 0;
    int column = 0;
    bool fstring = false;
    std::string string_body;  // literal body for strings (prefix and quotes removed)
};

struct LogicalLine {
    std::vector<Token> tokens;
    int first_line = 0;
    int last_line = 0;
};

struct LexResult {
    std::vector<LogicalLine> lines;
    std::vector<int> comment_columns;  // indexed by physical line - 1
    std::vector<std::string> physical_lines;
};

/// Splits text into logical lines. Throws SyntaxError.
LexResult lex(std::string_view text, const std::string& file);

/// Tokenises a standalone expression fragment (used for f-string fields).
std::vector<Token> lex_fragment(std::string_view text, const std::string& file, int line);

bool is_keyword(std::string_view word);

}  // namespace weaver::detail
