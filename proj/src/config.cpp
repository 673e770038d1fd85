#include "wmbench/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wmb {
namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& msg) {
    fail(ErrorCategory::Config, origin + ":" + std::to_string(line) + ": " + msg);
}

bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Removes a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\' && i + 1 < s.size()) {
                ++i;
            } else if (c == '"') {
                in_str = false;
            }
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

struct Parser {
    const std::string& origin;
    int line = 0;

    std::vector<std::string> split_path(const std::string& dotted) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : dotted) {
            if (c == '.') {
                if (cur.empty()) parse_fail(origin, line, "empty path segment in '" + dotted + "'");
                parts.push_back(cur);
                cur.clear();
            } else if (is_bare_char(c)) {
                cur.push_back(c);
            } else if (c == ' ' || c == '\t') {
                // permit spaces around dots
                if (!cur.empty()) parse_fail(origin, line, "unexpected space in key '" + dotted + "'");
            } else {
                parse_fail(origin, line, std::string("invalid character '") + c + "' in key");
            }
        }
        if (cur.empty()) parse_fail(origin, line, "empty path segment in '" + dotted + "'");
        parts.push_back(cur);
        return parts;
    }

    ConfigValue parse_value(const std::string& raw) {
        std::string s = strip(raw);
        if (s.empty()) parse_fail(origin, line, "missing value");
        ConfigValue out;
        out.line = line;
        if (s.front() == '"') {
            if (s.size() < 2 || s.back() != '"')
                parse_fail(origin, line, "unterminated string");
            std::string body = s.substr(1, s.size() - 2);
            std::string text;
            for (size_t i = 0; i < body.size(); ++i) {
                char c = body[i];
                if (c == '"') parse_fail(origin, line, "unescaped quote inside string");
                if (c == '\\') {
                    if (i + 1 >= body.size()) parse_fail(origin, line, "dangling escape");
                    char e = body[++i];
                    switch (e) {
                        case 'n': text.push_back('\n'); break;
                        case 't': text.push_back('\t'); break;
                        case '"': text.push_back('"'); break;
                        case '\\': text.push_back('\\'); break;
                        default:
                            parse_fail(origin, line, std::string("unsupported escape '\\") + e + "'");
                    }
                } else {
                    text.push_back(c);
                }
            }
            out.v = text;
            return out;
        }
        if (s.front() == '[') {
            if (s.back() != ']') parse_fail(origin, line, "unterminated array");
            std::string body = s.substr(1, s.size() - 2);
            ConfigArray arr;
            // split on commas outside strings
            std::string cur;
            bool in_str = false;
            for (size_t i = 0; i < body.size(); ++i) {
                char c = body[i];
                if (in_str) {
                    cur.push_back(c);
                    if (c == '\\' && i + 1 < body.size()) cur.push_back(body[++i]);
                    else if (c == '"') in_str = false;
                } else if (c == '"') {
                    cur.push_back(c);
                    in_str = true;
                } else if (c == ',') {
                    arr.push_back(parse_value(cur));
                    cur.clear();
                } else if (c == '[' || c == ']') {
                    parse_fail(origin, line, "nested arrays are not supported");
                } else {
                    cur.push_back(c);
                }
            }
            if (in_str) parse_fail(origin, line, "unterminated string in array");
            std::string last = strip(cur);
            if (!last.empty()) {
                arr.push_back(parse_value(last));
            } else if (!arr.empty()) {
                parse_fail(origin, line, "trailing comma requires no empty element");
            }
            out.v = arr;
            return out;
        }
        if (s == "true") { out.v = true; return out; }
        if (s == "false") { out.v = false; return out; }
        // number: accept integer/float syntax, including exponents and inf/nan rejected
        {
            const char* begin = s.c_str();
            char* end = nullptr;
            double d = std::strtod(begin, &end);
            if (end == begin + s.size() && s.find_first_not_of("+-.eE0123456789_") == std::string::npos) {
                out.v = d;
                return out;
            }
        }
        parse_fail(origin, line, "cannot parse value '" + s + "' (strings need quotes)");
    }

    // Walks a dotted path for a [table] header, creating tables on demand.
    // Inside table-arrays, a path segment naming an existing array descends
    // into its most recent element.
    ConfigTable* descend(ConfigTable* root, const std::vector<std::string>& parts,
                         size_t upto) {
        ConfigTable* cur = root;
        for (size_t i = 0; i < upto; ++i) {
            const std::string& name = parts[i];
            if (cur->values.count(name))
                parse_fail(origin, line, "'" + name + "' is already a value, not a table");
            auto ait = cur->arrays.find(name);
            if (ait != cur->arrays.end()) {
                cur = ait->second.back().get();
                continue;
            }
            auto [it, inserted] = cur->tables.try_emplace(name, nullptr);
            if (inserted) {
                it->second = std::make_shared<ConfigTable>();
                it->second->line = line;
            }
            cur = it->second.get();
        }
        return cur;
    }
};

}  // namespace

ConfigTable parse_config(const std::string& text, const std::string& origin) {
    ConfigTable root;
    Parser p{origin};
    ConfigTable* current = &root;
    // Tables explicitly opened by [header]; reopening one is an error.
    std::vector<const ConfigTable*> opened;

    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line;
        std::string s = strip(strip_comment(raw));
        if (s.empty()) continue;

        if (s.size() >= 4 && s[0] == '[' && s[1] == '[') {
            if (s.substr(s.size() - 2) != "]]")
                parse_fail(origin, p.line, "malformed [[header]]");
            auto parts = p.split_path(strip(s.substr(2, s.size() - 4)));
            ConfigTable* parent = p.descend(&root, parts, parts.size() - 1);
            const std::string& leaf = parts.back();
            if (parent->values.count(leaf) || parent->tables.count(leaf))
                parse_fail(origin, p.line, "'" + leaf + "' is already defined and cannot become an array of tables");
            auto elem = std::make_shared<ConfigTable>();
            elem->line = p.line;
            parent->arrays[leaf].push_back(elem);
            current = elem.get();
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') parse_fail(origin, p.line, "malformed [header]");
            auto parts = p.split_path(strip(s.substr(1, s.size() - 2)));
            ConfigTable* parent = p.descend(&root, parts, parts.size() - 1);
            const std::string& leaf = parts.back();
            if (parent->values.count(leaf) || parent->arrays.count(leaf))
                parse_fail(origin, p.line, "'" + leaf + "' is already defined with a different shape");
            auto [it, inserted] = parent->tables.try_emplace(leaf, nullptr);
            if (inserted) {
                it->second = std::make_shared<ConfigTable>();
                it->second->line = p.line;
            } else {
                for (const ConfigTable* t : opened)
                    if (t == it->second.get())
                        parse_fail(origin, p.line, "table '" + leaf + "' opened twice");
            }
            current = it->second.get();
            opened.push_back(current);
            continue;
        }

        size_t eq = std::string::npos;
        {
            bool in_str = false;
            for (size_t i = 0; i < s.size(); ++i) {
                char c = s[i];
                if (in_str) {
                    if (c == '\\') ++i;
                    else if (c == '"') in_str = false;
                } else if (c == '"') {
                    in_str = true;
                } else if (c == '=') {
                    eq = i;
                    break;
                }
            }
        }
        if (eq == std::string::npos)
            parse_fail(origin, p.line, "expected 'key = value' or a [header]");
        std::string key = strip(s.substr(0, eq));
        if (key.empty()) parse_fail(origin, p.line, "missing key before '='");
        for (char c : key)
            if (!is_bare_char(c))
                parse_fail(origin, p.line, "invalid key '" + key + "' (dotted keys belong in headers)");
        if (current->values.count(key) || current->tables.count(key) || current->arrays.count(key))
            parse_fail(origin, p.line, "duplicate key '" + key + "'");
        current->values[key] = p.parse_value(s.substr(eq + 1));
    }
    return root;
}

ConfigTable load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCategory::Io, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

const ConfigValue* TableView::find(const std::string& key) const {
    auto it = t_->values.find(key);
    return it == t_->values.end() ? nullptr : &it->second;
}

bool TableView::has(const std::string& key) const {
    return find(key) != nullptr;
}

std::string TableView::require_string(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v) fail(ErrorCategory::Config, ctx_ + ": missing required key '" + key + "'");
    if (!v->is_string()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be a string");
    return std::get<std::string>(v->v);
}

std::string TableView::get_string(const std::string& key, const std::string& dflt) const {
    const ConfigValue* v = find(key);
    if (!v) return dflt;
    if (!v->is_string()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be a string");
    return std::get<std::string>(v->v);
}

double TableView::get_number(const std::string& key, double dflt) const {
    const ConfigValue* v = find(key);
    if (!v) return dflt;
    if (!v->is_number()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be a number");
    return std::get<double>(v->v);
}

int64_t TableView::get_int(const std::string& key, int64_t dflt) const {
    const ConfigValue* v = find(key);
    if (!v) return dflt;
    if (!v->is_number()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be an integer");
    double d = std::get<double>(v->v);
    int64_t i = static_cast<int64_t>(d);
    if (static_cast<double>(i) != d)
        fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be an integer");
    return i;
}

uint64_t TableView::get_u64(const std::string& key, uint64_t dflt) const {
    const ConfigValue* v = find(key);
    if (!v) return dflt;
    if (!v->is_number()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be a non-negative integer");
    double d = std::get<double>(v->v);
    if (d < 0) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be non-negative");
    uint64_t u = static_cast<uint64_t>(d);
    if (static_cast<double>(u) != d)
        fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be an integer");
    return u;
}

bool TableView::get_bool(const std::string& key, bool dflt) const {
    const ConfigValue* v = find(key);
    if (!v) return dflt;
    if (!v->is_bool()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be true or false");
    return std::get<bool>(v->v);
}

std::vector<double> TableView::get_number_array(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v) return {};
    if (!v->is_array()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const ConfigValue& e : std::get<ConfigArray>(v->v)) {
        if (!e.is_number())
            fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must contain only numbers");
        out.push_back(std::get<double>(e.v));
    }
    return out;
}

std::vector<std::string> TableView::get_string_array(const std::string& key) const {
    const ConfigValue* v = find(key);
    if (!v) return {};
    if (!v->is_array()) fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const ConfigValue& e : std::get<ConfigArray>(v->v)) {
        if (!e.is_string())
            fail(ErrorCategory::Config, ctx_ + ": '" + key + "' must contain only strings");
        out.push_back(std::get<std::string>(e.v));
    }
    return out;
}

std::vector<const ConfigTable*> TableView::table_array(const std::string& key) const {
    auto it = t_->arrays.find(key);
    std::vector<const ConfigTable*> out;
    if (it == t_->arrays.end()) return out;
    for (const auto& p : it->second) out.push_back(p.get());
    return out;
}

const ConfigTable* TableView::table(const std::string& key) const {
    auto it = t_->tables.find(key);
    return it == t_->tables.end() ? nullptr : it->second.get();
}

void TableView::reject_unknown(const std::vector<std::string>& known) const {
    auto ok = [&known](const std::string& name) {
        for (const std::string& k : known)
            if (k == name) return true;
        return false;
    };
    for (const auto& [name, v] : t_->values)
        if (!ok(name))
            fail(ErrorCategory::Config, ctx_ + ": unknown key '" + name + "' (line " +
                                            std::to_string(v.line) + ")");
    for (const auto& [name, t] : t_->tables)
        if (!ok(name))
            fail(ErrorCategory::Config, ctx_ + ": unknown table '" + name + "'");
    for (const auto& [name, a] : t_->arrays)
        if (!ok(name))
            fail(ErrorCategory::Config, ctx_ + ": unknown table array '" + name + "'");
}

}  // namespace wmb
