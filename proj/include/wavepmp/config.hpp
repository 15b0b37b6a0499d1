#pragma once

#include "wavepmp/common.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wavepmp {

/// Sectioned key-value configuration text:
///
///   [section]
///   key = value        # trailing comments allowed
///
/// Parsing is permissive about whitespace; dump() emits the normalized form
/// (sections and keys sorted), so dump(parse(dump(parse(s)))) is a fixed
/// point. Schema validation (unknown keys are errors) happens against an
/// explicit allow-list.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text) {
        ConfigFile cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = strip_comment(line);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": empty section name");
                cfg.data_[section];  // register even if empty
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": key outside of any section");
            cfg.data_[section][key] = value;
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    std::string dump() const {
        std::ostringstream out;
        bool first = true;
        for (const auto& [section, kv] : data_) {
            if (!first) out << "\n";
            first = false;
            out << "[" << section << "]\n";
            for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
        }
        return out.str();
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = data_.find(section);
        return s != data_.end() && s->second.count(key) > 0;
    }

    std::string get(const std::string& section, const std::string& key) const {
        const auto s = data_.find(section);
        if (s == data_.end() || !s->second.count(key))
            throw ConfigError("config: missing key [" + section + "] " + key);
        return s->second.at(key);
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        const std::string v = get(section, key);
        std::size_t pos = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &pos);
        } catch (const std::exception&) {
            throw ConfigError("config: [" + section + "] " + key + " is not a number: " + v);
        }
        if (pos != v.size())
            throw ConfigError("config: [" + section + "] " + key + " is not a number: " + v);
        return d;
    }

    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    long get_long(const std::string& section, const std::string& key) const {
        const std::string v = get(section, key);
        std::size_t pos = 0;
        long l = 0;
        try {
            l = std::stol(v, &pos);
        } catch (const std::exception&) {
            throw ConfigError("config: [" + section + "] " + key + " is not an integer: " + v);
        }
        if (pos != v.size())
            throw ConfigError("config: [" + section + "] " + key + " is not an integer: " + v);
        return l;
    }

    long get_long_or(const std::string& section, const std::string& key,
                     long fallback) const {
        return has(section, key) ? get_long(section, key) : fallback;
    }

    std::vector<int> get_int_list(const std::string& section, const std::string& key) const {
        const std::string v = get(section, key);
        std::vector<int> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (t.empty())
                throw ConfigError("config: [" + section + "] " + key + ": empty list entry");
            try {
                out.push_back(std::stoi(t));
            } catch (const std::exception&) {
                throw ConfigError("config: [" + section + "] " + key +
                                  ": bad list entry: " + t);
            }
        }
        if (out.empty())
            throw ConfigError("config: [" + section + "] " + key + ": empty list");
        return out;
    }

    std::vector<std::string> sections() const {
        std::vector<std::string> out;
        for (const auto& [s, kv] : data_) out.push_back(s);
        return out;
    }

    std::vector<std::string> keys(const std::string& section) const {
        std::vector<std::string> out;
        const auto s = data_.find(section);
        if (s != data_.end())
            for (const auto& [k, v] : s->second) out.push_back(k);
        return out;
    }

    /// Reject any section or key outside the allow-list.
    void validate_schema(
        const std::map<std::string, std::set<std::string>>& schema) const {
        for (const auto& [section, kv] : data_) {
            const auto s = schema.find(section);
            if (s == schema.end())
                throw ConfigError("config: unknown section [" + section + "]");
            for (const auto& [key, value] : kv)
                if (!s->second.count(key))
                    throw ConfigError("config: unknown key [" + section + "] " + key);
        }
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static std::string strip_comment(const std::string& line) {
        std::string out = line;
        for (const char c : {'#', ';'}) {
            const auto pos = out.find(c);
            if (pos != std::string::npos) out = out.substr(0, pos);
        }
        return trim(out);
    }

    std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace wavepmp
