#include "weaver/config.hpp"

#include "weaver/error.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace weaver {

namespace {

// The subset of TOML the configuration uses: [table] headers, key = value
// pairs with strings, integers, floats, booleans and arrays of strings.
using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;
using Table = std::map<std::string, std::pair<Value, int>>;  // key -> (value, line)

class TomlReader {
public:
    explicit TomlReader(const std::string& text) : text_(text) {}

    std::map<std::string, Table> read() {
        std::map<std::string, Table> tables;
        std::string current;
        tables[current];
        while (pos_ < text_.size()) {
            skip_blank();
            if (pos_ >= text_.size()) break;
            char c = text_[pos_];
            if (c == '\n') {
                advance();
                continue;
            }
            if (c == '#') {
                skip_comment();
                continue;
            }
            if (c == '[') {
                advance();
                skip_blank();
                std::string name = bare_key();
                skip_blank();
                expect(']');
                end_of_line();
                if (tables.count(name)) fail("table [" + name + "] defined twice");
                current = name;
                tables[current];
                continue;
            }
            int key_line = line_;
            std::string key = text_[pos_] == '"' ? basic_string() : bare_key();
            skip_blank();
            expect('=');
            skip_blank();
            Value v = value();
            end_of_line();
            auto& table = tables[current];
            if (table.count(key)) fail("duplicate key '" + key + "'");
            table[key] = {std::move(v), key_line};
        }
        return tables;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + message);
    }

    void advance() {
        if (text_[pos_] == '\n') ++line_;
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
    }

    void skip_comment() {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    }

    void skip_space_and_newlines() {
        for (;;) {
            skip_blank();
            if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
            if (pos_ < text_.size() && text_[pos_] == '\n') {
                advance();
                continue;
            }
            return;
        }
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    void end_of_line() {
        skip_blank();
        if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
        if (pos_ < text_.size() && text_[pos_] != '\n') fail("unexpected text after value");
    }

    std::string bare_key() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                       text_[pos_] == '-' || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ == start) fail("expected a key");
        return text_.substr(start, pos_ - start);
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_++];
            if (c == '\n') fail("unterminated string");
            if (c != '\\') {
                out += c;
                continue;
            }
            if (pos_ >= text_.size()) fail("unterminated escape");
            char e = text_[pos_++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(std::string("unsupported escape \\") + e);
            }
        }
        expect('"');
        return out;
    }

    std::string literal_string() {
        expect('\'');
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\'' && text_[pos_] != '\n') ++pos_;
        std::string out = text_.substr(start, pos_ - start);
        expect('\'');
        return out;
    }

    std::string any_string() { return text_[pos_] == '"' ? basic_string() : literal_string(); }

    Value value() {
        if (pos_ >= text_.size()) fail("missing value");
        char c = text_[pos_];
        if (c == '"' || c == '\'') return any_string();
        if (c == '[') {
            advance();
            std::vector<std::string> items;
            skip_space_and_newlines();
            while (pos_ < text_.size() && text_[pos_] != ']') {
                if (text_[pos_] != '"' && text_[pos_] != '\'') fail("arrays may only hold strings");
                items.push_back(any_string());
                skip_space_and_newlines();
                if (pos_ < text_.size() && text_[pos_] == ',') {
                    advance();
                    skip_space_and_newlines();
                }
            }
            expect(']');
            return items;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '#' && text_[pos_] != ' ' &&
               text_[pos_] != '\t' && text_[pos_] != '\r') {
            ++pos_;
        }
        std::string token = text_.substr(start, pos_ - start);
        if (token == "true") return true;
        if (token == "false") return false;
        std::string digits;
        for (char d : token) {
            if (d != '_') digits += d;
        }
        try {
            std::size_t used = 0;
            if (digits.find_first_of(".eE") == std::string::npos) {
                std::int64_t i = std::stoll(digits, &used);
                if (used == digits.size()) return i;
            } else {
                double d = std::stod(digits, &used);
                if (used == digits.size()) return d;
            }
        } catch (const std::exception&) {
        }
        fail("invalid value '" + token + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

class Fields {
public:
    Fields(std::string table, Table& values) : table_(std::move(table)), values_(values) {}

    ~Fields() noexcept(false) {
        if (std::uncaught_exceptions() == 0 && !values_.empty()) {
            throw ConfigError("unknown key '" + values_.begin()->first + "' in " + where());
        }
    }

    void get(const std::string& key, std::string& out) { take<std::string>(key, out, "a string"); }
    void get(const std::string& key, bool& out) { take<bool>(key, out, "a boolean"); }
    void get(const std::string& key, std::vector<std::string>& out) {
        take<std::vector<std::string>>(key, out, "an array of strings");
    }
    void get(const std::string& key, std::filesystem::path& out) {
        std::string s;
        if (take<std::string>(key, s, "a string")) out = s;
    }
    void get(const std::string& key, int& out) {
        std::int64_t v = out;
        if (take<std::int64_t>(key, v, "an integer")) out = static_cast<int>(v);
    }
    void get(const std::string& key, std::int64_t& out) { take<std::int64_t>(key, out, "an integer"); }
    void get(const std::string& key, double& out) {
        auto it = values_.find(key);
        if (it != values_.end() && std::holds_alternative<std::int64_t>(it->second.first)) {
            out = static_cast<double>(std::get<std::int64_t>(it->second.first));
            values_.erase(it);
            return;
        }
        take<double>(key, out, "a number");
    }

private:
    std::string where() const { return table_.empty() ? "the top level" : "[" + table_ + "]"; }

    template <typename T, typename Out>
    bool take(const std::string& key, Out& out, const char* what) {
        auto it = values_.find(key);
        if (it == values_.end()) return false;
        if (!std::holds_alternative<T>(it->second.first)) {
            throw ConfigError("config line " + std::to_string(it->second.second) + ": '" + key + "' in " + where() +
                              " must be " + what);
        }
        out = std::get<T>(it->second.first);
        values_.erase(it);
        return true;
    }

    std::string table_;
    Table& values_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    auto joined = (base / p).lexically_normal();
    return joined.has_filename() ? joined : joined.parent_path();
}

}  // namespace

void validate(const RunConfig& c) {
    if (c.seed_count < 0 || c.gen_retries_per_line < 0 || c.regen_retries_per_line < 0 || c.repair_attempts < 0) {
        throw ConfigError("retry and seed counts must not be negative");
    }
    if (!(c.test_timeout_s > 0)) throw ConfigError("run.test_timeout_s must be positive");
    if (!(c.wall_clock_budget_s > 0)) throw ConfigError("run.wall_clock_budget_s must be positive");
    if (c.workers < 1) throw ConfigError("run.workers must be at least 1");
    if (c.files.empty()) throw ConfigError("project.files must name at least one glob");
    if (c.test_prefix.empty()) throw ConfigError("run.test_prefix must not be empty");
    if (c.executor.kind != "shim" && c.executor.kind != "fixtures") {
        throw ConfigError("executor.kind must be \"shim\" or \"fixtures\"");
    }
    if (c.executor.kind == "fixtures" && c.executor.fixture_dir.empty()) {
        throw ConfigError("executor.fixture_dir is required for recorded traces");
    }
    validate(c.llm);
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    auto tables = TomlReader(text).read();
    RunConfig c;
    for (auto& [name, values] : tables) {
        if (name.empty()) {
            Fields f(name, values);
        } else if (name == "project") {
            Fields f(name, values);
            f.get("root", c.root);
            f.get("files", c.files);
            f.get("out", c.out_dir);
        } else if (name == "run") {
            Fields f(name, values);
            f.get("seed_count", c.seed_count);
            f.get("gen_retries_per_line", c.gen_retries_per_line);
            f.get("regen_retries_per_line", c.regen_retries_per_line);
            f.get("repair_attempts", c.repair_attempts);
            f.get("test_timeout_s", c.test_timeout_s);
            f.get("wall_clock_budget_s", c.wall_clock_budget_s);
            f.get("saturation_stop", c.saturation_stop);
            f.get("workers", c.workers);
            f.get("test_prefix", c.test_prefix);
            f.get("prompt_dir", c.prompt_dir);
        } else if (name == "llm") {
            Fields f(name, values);
            f.get("base_url", c.llm.base_url);
            f.get("model", c.llm.model);
            f.get("temperature", c.llm.temperature);
            f.get("max_tokens", c.llm.max_tokens);
            f.get("timeout_s", c.llm.timeout_s);
            f.get("max_retries", c.llm.max_retries);
            f.get("retry_backoff_s", c.llm.retry_backoff_s);
            f.get("token_budget", c.llm.token_budget);
            f.get("price_in_per_1k", c.llm.price_in_per_1k);
            f.get("price_out_per_1k", c.llm.price_out_per_1k);
            f.get("max_inflight", c.llm.max_inflight);
        } else if (name == "executor") {
            Fields f(name, values);
            f.get("kind", c.executor.kind);
            f.get("shim", c.executor.shim);
            f.get("fixture_dir", c.executor.fixture_dir);
        } else {
            throw ConfigError("unknown table [" + name + "]");
        }
    }
    c.root = resolve(base_dir, c.root);
    c.out_dir = resolve(base_dir, c.out_dir);
    c.prompt_dir = resolve(base_dir, c.prompt_dir);
    c.executor.fixture_dir = resolve(base_dir, c.executor.fixture_dir);
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto base = path.parent_path();
    return parse_config(ss.str(), base.empty() ? std::filesystem::path(".") : base);
}

std::vector<std::string> expand_globs(const std::filesystem::path& root, const std::vector<std::string>& globs) {
    namespace fs = std::filesystem;
    std::vector<std::string> out;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("project root is not a directory: " + root.string());
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        if (!it->is_regular_file()) continue;
        std::string rel = it->path().lexically_relative(root).generic_string();
        for (const auto& g : globs) {
            bool match = fnmatch(g.c_str(), rel.c_str(), FNM_PATHNAME) == 0;
            // A leading "**/" matches any number of directories, including none.
            if (!match && g.starts_with("**/")) {
                for (std::size_t from = 0; !match && from != std::string::npos;) {
                    match = fnmatch(g.c_str() + 3, rel.c_str() + from, FNM_PATHNAME) == 0;
                    auto slash = rel.find('/', from);
                    from = slash == std::string::npos ? slash : slash + 1;
                }
            }
            if (match) {
                out.push_back(rel);
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace weaver
