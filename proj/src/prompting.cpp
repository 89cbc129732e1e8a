#include "weaver/prompting.hpp"

#include "weaver/error.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#ifndef WEAVER_PROMPT_DIR
#define WEAVER_PROMPT_DIR "resources/prompts"
#endif

namespace weaver {

namespace {

const char* const kTemplateNames[] = {"generation", "regeneration", "seed", "repair"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of `{identifier}` starting at text[i], or 0.
std::size_t placeholder_at(const std::string& text, std::size_t i) {
    if (text[i] != '{' || i + 1 >= text.size() || !ident_start(text[i + 1])) return 0;
    std::size_t j = i + 2;
    while (j < text.size() && ident_char(text[j])) ++j;
    if (j >= text.size() || text[j] != '}') return 0;
    return j - i + 1;
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
        text.replace(pos, from.size(), to);
    }
}

// Rephrases the class clauses of a template for code outside any class.
std::string adapt_to_context(std::string text, const PromptContext& ctx) {
    if (!ctx.class_name.empty()) return text;
    const std::string owner = ctx.func_name.empty() ? "the module '{module}'" : "the function '{func_name}'";
    replace_all(text, "the function '{func_name}' within the class '{class_name}'",
                ctx.func_name.empty() ? owner : "the function '{func_name}' in the module '{module}'");
    replace_all(text, "the class '{class_name}'", owner);
    return text;
}

std::map<std::string, std::string> base_values(const PromptContext& ctx) {
    return {{"module", ctx.module},
            {"class_name", ctx.class_name},
            {"func_name", ctx.func_name},
            {"test_prefix", ctx.test_prefix},
            {"test_header", test_header(ctx)}};
}

Messages user_message(std::string content) { return {Message{"user", std::move(content)}}; }

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) out += lines[i] + "\n";
    return out;
}

bool is_fence(const std::string& line) {
    auto start = line.find_first_not_of(" \t");
    return start != std::string::npos && line.compare(start, 3, "```") == 0;
}

// Bodies of the fenced code blocks in `text`, in order.
std::vector<std::string> fenced_blocks(const std::string& text) {
    auto lines = split_lines(text);
    std::vector<std::string> blocks;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!is_fence(lines[i])) continue;
        std::size_t j = i + 1;
        while (j < lines.size() && !is_fence(lines[j])) ++j;
        blocks.push_back(join_lines(lines, i + 1, j));
        i = j;
    }
    return blocks;
}

std::string trim_blank_lines(const std::string& text) {
    auto lines = split_lines(text);
    auto blank = [](const std::string& l) { return l.find_first_not_of(" \t\r") == std::string::npos; };
    std::size_t b = 0, e = lines.size();
    while (b < e && blank(lines[b])) ++b;
    while (e > b && blank(lines[e - 1])) --e;
    return join_lines(lines, b, e);
}

std::regex test_def_regex(const std::string& prefix) {
    static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
    std::string escaped = std::regex_replace(prefix, special, R"(\$&)");
    return std::regex(R"((^|\n)[ \t]*(async[ \t]+)?def[ \t]+()" + escaped + R"(\w*)[ \t]*\()");
}

}  // namespace

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (const char* name : kTemplateNames) {
        auto path = dir / (std::string(name) + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("prompt template not found: " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        lib.templates_[name] = ss.str();
    }
    return lib;
}

std::filesystem::path PromptLibrary::default_dir() { return WEAVER_PROMPT_DIR; }

const std::string& PromptLibrary::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
    return it->second;
}

std::string render_template(const std::string& text, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        std::size_t len = placeholder_at(text, i);
        if (len == 0) {
            out += text[i++];
            continue;
        }
        std::string name = text.substr(i + 1, len - 2);
        auto it = values.find(name);
        if (it == values.end()) throw Error("no value for template placeholder {" + name + "}");
        out += it->second;
        i += len;
    }
    return out;
}

std::vector<std::string> placeholders(const std::string& text) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (std::size_t len = placeholder_at(text, i)) {
            names.push_back(text.substr(i + 1, len - 2));
            i += len - 1;
        }
    }
    return names;
}

PromptContext context_for(const SourceUnit& unit, const std::string& module, int line) {
    PromptContext ctx;
    ctx.module = module;
    auto idx = unit.statement_at(line);
    if (!idx) return ctx;
    int fn = unit.statements[static_cast<std::size_t>(*idx)].function;
    if (fn >= 0) {
        ctx.func_name = unit.functions[static_cast<std::size_t>(fn)].name;
        ctx.class_name = unit.functions[static_cast<std::size_t>(fn)].class_name;
    }
    return ctx;
}

std::string target_line_text(const SourceUnit& unit, int line) {
    auto idx = unit.statement_at(line);
    if (!idx) throw UnknownLine(unit.path, line);
    std::string code = unit.statements[static_cast<std::size_t>(*idx)].code;
    auto b = code.find_first_not_of(" \t");
    auto e = code.find_last_not_of(" \t\r\n");
    code = b == std::string::npos ? "" : code.substr(b, e - b + 1);
    return std::to_string(line) + ": " + code;
}

std::string test_header(const PromptContext& ctx) {
    std::string import;
    if (!ctx.class_name.empty()) {
        import = "from " + ctx.module + " import " + ctx.class_name;
    } else if (!ctx.func_name.empty()) {
        import = "from " + ctx.module + " import " + ctx.func_name;
    } else {
        import = "import " + ctx.module;
    }
    return import + "\n\n\ndef " + ctx.test_prefix;
}

Messages build_generation_prompt(const PromptLibrary& lib, const Slice& slice, const SourceUnit& unit,
                                 const PromptContext& ctx) {
    auto values = base_values(ctx);
    values["code_slice"] = trim_blank_lines(slice.rendered_text);
    if (!values["code_slice"].empty()) values["code_slice"].pop_back();
    values["target_line"] = target_line_text(unit, slice.target.line);
    return user_message(render_template(adapt_to_context(lib.get("generation"), ctx), values));
}

Messages build_regeneration_prompt(const PromptLibrary& lib, const std::string& annotated_slice,
                                   const TestCase* closest_test, const LineId& target, const SourceUnit& unit,
                                   const PromptContext& ctx) {
    if (closest_test == nullptr) throw Error("regeneration prompt needs a closest test");
    auto values = base_values(ctx);
    auto strip_final_newline = [](std::string s) {
        while (!s.empty() && s.back() == '\n') s.pop_back();
        return s;
    };
    values["closest_test"] = strip_final_newline(closest_test->source);
    values["code_slice_with_exec_inlines"] = strip_final_newline(annotated_slice);
    values["target_line"] = target_line_text(unit, target.line);
    return user_message(render_template(adapt_to_context(lib.get("regeneration"), ctx), values));
}

Messages build_seed_prompt(const PromptLibrary& lib, const SourceUnit& unit, const PromptContext& ctx,
                           int test_count) {
    auto values = base_values(ctx);
    std::string source = unit.text;
    while (!source.empty() && source.back() == '\n') source.pop_back();
    values["source"] = source;
    values["test_count"] = std::to_string(test_count);
    return user_message(render_template(lib.get("seed"), values));
}

Messages build_repair_prompt(const PromptLibrary& lib, const std::string& test_source,
                             const std::string& error_message, const PromptContext& ctx) {
    auto values = base_values(ctx);
    auto trimmed = [](std::string s) {
        while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
        return s;
    };
    values["test_source"] = trimmed(test_source);
    values["error_message"] = trimmed(error_message);
    return user_message(render_template(lib.get("repair"), values));
}

std::optional<std::string> extract_test(const std::string& response, const std::string& prefix) {
    std::optional<std::string> candidate;
    auto open = response.find("<answer>");
    if (open != std::string::npos) {
        auto begin = open + std::string("<answer>").size();
        auto close = response.find("</answer>", begin);
        std::string answer = response.substr(begin, close == std::string::npos ? std::string::npos : close - begin);
        auto blocks = fenced_blocks(answer);
        candidate = blocks.empty() ? trim_blank_lines(answer) : blocks.front();
    } else {
        auto blocks = fenced_blocks(response);
        if (!blocks.empty()) candidate = blocks.back();
    }
    if (!candidate || !std::regex_search(*candidate, test_def_regex(prefix))) return std::nullopt;
    return candidate;
}

std::optional<std::string> test_function_name(const std::string& source, const std::string& prefix) {
    std::smatch m;
    if (!std::regex_search(source, m, test_def_regex(prefix))) return std::nullopt;
    return m[3].str();
}

std::vector<std::string> split_tests(const std::string& source, const std::string& prefix) {
    auto lines = split_lines(source);
    auto top_level = [](const std::string& l) {
        return !l.empty() && l[0] != ' ' && l[0] != '\t' && l[0] != '#' && l[0] != ')' && l[0] != ']' && l[0] != '}';
    };
    // Top-level chunks: [start, end) with decorators attached to their def.
    std::vector<std::pair<std::size_t, std::size_t>> chunks;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!top_level(lines[i])) continue;
        bool after_decorator = !chunks.empty() && lines[chunks.back().first].starts_with("@") &&
                               lines[i - 1].starts_with("@");
        if (after_decorator) continue;
        if (!chunks.empty()) chunks.back().second = i;
        chunks.emplace_back(i, lines.size());
    }
    auto re = test_def_regex(prefix);
    std::vector<bool> is_test;
    std::size_t tests = 0;
    for (auto [b, e] : chunks) {
        std::string head;
        for (std::size_t i = b; i < e && head.empty(); ++i) {
            if (!lines[i].starts_with("@")) head = lines[i];
        }
        bool t = std::regex_search(head, re);
        is_test.push_back(t);
        tests += t ? 1 : 0;
    }
    if (tests <= 1) return tests == 1 ? std::vector<std::string>{source} : std::vector<std::string>{};

    std::vector<std::string> out;
    for (std::size_t k = 0; k < chunks.size(); ++k) {
        if (!is_test[k]) continue;
        std::string part;
        std::size_t first_chunk = chunks.empty() ? 0 : chunks.front().first;
        part += join_lines(lines, 0, first_chunk);
        for (std::size_t j = 0; j < chunks.size(); ++j) {
            if (is_test[j] && j != k) continue;
            part += join_lines(lines, chunks[j].first, chunks[j].second);
        }
        out.push_back(trim_blank_lines(part));
    }
    return out;
}

}  // namespace weaver
