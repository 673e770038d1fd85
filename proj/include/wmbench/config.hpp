#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "wmbench/errors.hpp"

namespace wmb {

// Declarative config file support: a TOML subset with [tables],
// [[arrays-of-tables]] (dotted paths allowed), and scalar/array values
// (strings, numbers, booleans). Unknown keys are rejected at the schema
// layer, not here. No dates, no inline tables, no multi-line strings.
struct ConfigValue;
struct ConfigTable;

using ConfigArray = std::vector<ConfigValue>;

struct ConfigValue {
    std::variant<bool, double, std::string, ConfigArray> v;
    int line = 0;

    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_array() const { return std::holds_alternative<ConfigArray>(v); }
};

struct ConfigTable {
    // Ordered maps keep diagnostics and serialization deterministic.
    std::map<std::string, ConfigValue> values;
    std::map<std::string, std::shared_ptr<ConfigTable>> tables;
    std::map<std::string, std::vector<std::shared_ptr<ConfigTable>>> arrays;
    int line = 0;
};

ConfigTable parse_config(const std::string& text, const std::string& origin);
ConfigTable load_config_file(const std::string& path);

// Schema helpers; all raise Config errors with the table context on misuse.
class TableView {
  public:
    TableView(const ConfigTable& t, std::string context)
        : t_(&t), ctx_(std::move(context)) {}

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& dflt) const;
    std::string require_string(const std::string& key) const;
    double get_number(const std::string& key, double dflt) const;
    int64_t get_int(const std::string& key, int64_t dflt) const;
    uint64_t get_u64(const std::string& key, uint64_t dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    std::vector<double> get_number_array(const std::string& key) const;
    std::vector<std::string> get_string_array(const std::string& key) const;
    std::vector<const ConfigTable*> table_array(const std::string& key) const;
    const ConfigTable* table(const std::string& key) const;  // null if absent

    // Rejects any key (value, table, or array name) not in `known`.
    void reject_unknown(const std::vector<std::string>& known) const;
    const std::string& context() const { return ctx_; }

  private:
    const ConfigValue* find(const std::string& key) const;
    const ConfigTable* t_;
    std::string ctx_;
};

}  // namespace wmb
