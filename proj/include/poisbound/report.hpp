#pragma once

// Report serialization: 17-significant-digit CSV rows and JSON views of
// bound reports, shared by the command line tool and the tests.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "poisbound/coupling.hpp"

namespace poisbound {

/// Shortest text that round-trips a double (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV accumulator with a fixed header row; numeric cells are rendered at
/// 17 significant digits so re-runs are byte-comparable.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) body_ += ',';
            body_ += columns[i];
        }
        body_ += '\n';
        width_ = columns.size();
    }

    class Row {
    public:
        explicit Row(CsvWriter& w) : w_(w) {}
        Row& cell(const std::string& s) {
            if (count_) line_ += ',';
            line_ += s;
            ++count_;
            return *this;
        }
        Row& cell(double v) { return cell(format_double(v)); }
        Row& cell(std::uint64_t v) { return cell(std::to_string(v)); }
        Row& cell(bool v) { return cell(std::string(v ? "1" : "0")); }
        ~Row() {
            while (count_ < w_.width_) cell(std::string());
            w_.body_ += line_;
            w_.body_ += '\n';
        }

    private:
        CsvWriter& w_;
        std::string line_;
        std::size_t count_ = 0;
    };

    Row row() { return Row(*this); }
    const std::string& str() const { return body_; }

private:
    std::string body_;
    std::size_t width_ = 0;
};

inline nlohmann::json to_json(const BoundReport& r) {
    nlohmann::json j;
    j["theorem"] = r.theorem;
    j["distance"] = r.distance;
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [name, value] : r.terms) terms[name] = value;
    j["terms"] = terms;
    j["bound"] = r.bound;
    if (r.exact_lhs) j["exact_lhs"] = *r.exact_lhs;
    if (r.satisfied) j["satisfied"] = *r.satisfied;
    return j;
}

}  // namespace poisbound
