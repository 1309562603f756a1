#pragma once

// Experiment harness plumbing: flat key=value config files, typed lookups
// with precondition-naming diagnostics, and the exit-code convention of
// the command line tool.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace poisbound {

// Exit codes: 0 pass, 1 runtime error, 2 config error, 3 bound-check failure.
inline constexpr int kExitPass = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBoundFailure = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key=value configuration; '#' starts a comment, blank lines are
/// skipped, keys may not repeat.
class Config {
public:
    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }

    static Config parse_text(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string();
                const auto b = s.find_last_not_of(" \t\r");
                return s.substr(a, b - a + 1);
            };
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key=value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty key");
            if (!cfg.values_.emplace(key, value).second)
                throw ConfigError("config: duplicate key '" + key + "'");
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("config: missing required key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        const auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key) const {
        return parse_double(key, get_string(key));
    }

    double get_double(const std::string& key, double dflt) const {
        const auto it = values_.find(key);
        return it == values_.end() ? dflt : parse_double(key, it->second);
    }

    std::uint64_t get_u64(const std::string& key) const {
        return parse_u64(key, get_string(key));
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        const auto it = values_.find(key);
        return it == values_.end() ? dflt : parse_u64(key, it->second);
    }

    /// Comma-separated list of doubles.
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& dflt) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        std::vector<double> out;
        std::istringstream in(it->second);
        std::string tok;
        while (std::getline(in, tok, ',')) out.push_back(parse_double(key, tok));
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not a number: " + v);
        }
    }

    static std::uint64_t parse_u64(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const unsigned long long x = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return static_cast<std::uint64_t>(x);
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key +
                              "' is not a non-negative integer: " + v);
        }
    }

    std::map<std::string, std::string> values_;
};

/// Throw a ConfigError naming the violated precondition.
inline void require(bool condition, const std::string& precondition) {
    if (!condition) throw ConfigError("precondition violated: " + precondition);
}

}  // namespace poisbound
