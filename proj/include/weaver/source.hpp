#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace weaver {

/// A source line inside one subject file. Lines are 1-based.
struct LineId {
    std::string file;
    int line = 0;

    auto operator<=>(const LineId&) const = default;
};

std::string to_string(const LineId& id);

enum class StmtKind {
    FunctionDef,
    ClassDef,
    Decorator,
    If,
    Elif,
    Else,
    For,
    While,
    Return,
    Assign,
    AugAssign,
    AnnAssign,
    Expr,
    Docstring,
    Import,
    Pass,
    Break,
    Continue,
    Raise,
    Assert,
    Del,
    Global,
};

std::string_view kind_name(StmtKind kind);

bool is_block_header(StmtKind kind);
bool is_decision(StmtKind kind);
/// Statements that produce a line event when executed.
bool is_executable(StmtKind kind);

/// One logical statement. `line` is the first physical line; multi-line
/// statements extend to `last_line`.
struct Statement {
    int line = 0;
    int last_line = 0;
    int indent = 0;
    StmtKind kind = StmtKind::Expr;
    std::string code;  // logical text, comments removed, continuation lines joined

    std::vector<std::string> referenced;
    std::vector<std::string> defined;
    std::vector<std::string> partial_defs;  // subset of `defined` updated in place (x[i] = ..., x.f = ...)

    int parent = -1;                // enclosing block header (statement index)
    std::vector<int> children;      // body statements, in order
    int prev_clause = -1;           // if/elif preceding this elif/else
    int next_clause = -1;           // elif/else following this if/elif
    int function = -1;              // index into SourceUnit::functions of the enclosing def, -1 at module level
};

struct FunctionInfo {
    std::string name;
    std::string class_name;  // empty for free functions
    int header = -1;         // statement index of the def line
    std::vector<std::string> params;
};

struct SourceUnit {
    std::string path;
    std::string text;
    std::vector<std::string> physical_lines;       // without trailing newline
    std::vector<int> comment_columns;              // per physical line, -1 when the line has no comment
    std::vector<Statement> statements;
    std::vector<FunctionInfo> functions;
    std::set<int> executable_lines;
    std::set<int> decision_lines;

    /// Statement index whose physical span contains `line`.
    std::optional<int> statement_at(int line) const;
    /// Statement index whose first line is `line`.
    std::optional<int> statement_starting_at(int line) const;

    LineId line_id(int line) const { return LineId{path, line}; }
    int line_count() const { return static_cast<int>(physical_lines.size()); }

    std::map<int, int> first_line_index;  // first line -> statement index
};

/// Parses subject source restricted to the supported Python subset.
/// Throws SyntaxError or UnsupportedConstruct.
SourceUnit parse_unit(std::string_view text, std::string path);

/// Removes comments (respecting string literals) and trailing whitespace
/// from every line; line structure is preserved.
std::string strip_comments(std::string_view text);

/// Dotted module name for a path relative to a project root ("pkg/mod.py" -> "pkg.mod").
std::string module_name_for(std::string_view relative_path);

/// True when two subject paths name the same file: equal after
/// normalisation, or one is a path-component suffix of the other.
bool same_file(std::string_view a, std::string_view b);

}  // namespace weaver
