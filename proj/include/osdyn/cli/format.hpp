#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "osdyn/analysis.hpp"

namespace osdyn::cli {

/// Shortest decimal text that parses back to the same double.
inline std::string fmt(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

/// One CSV line, comma separated, '\n' terminated. Fields are written as is.
inline void csv_row(std::ostream& os, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) {
            os << ',';
        }
        os << fields[i];
    }
    os << '\n';
}

/// `name = value` lines: values, then verdicts, then notes.
inline void write_report(std::ostream& os, const ConditionReport& r)
{
    for (const auto& [k, v] : r.values()) {
        os << k << " = " << fmt(v) << '\n';
    }
    for (const auto& [k, v] : r.verdicts()) {
        os << k << " = " << to_string(v) << '\n';
    }
    for (const auto& [k, v] : r.notes()) {
        os << k << " = " << v << '\n';
    }
}

/// Header and row for the CSV form of a report (values and verdicts only).
inline std::vector<std::string> report_header(const ConditionReport& r)
{
    std::vector<std::string> out;
    for (const auto& kv : r.values()) {
        out.push_back(kv.first);
    }
    for (const auto& kv : r.verdicts()) {
        out.push_back(kv.first);
    }
    return out;
}

inline std::vector<std::string> report_row(const ConditionReport& r)
{
    std::vector<std::string> out;
    for (const auto& kv : r.values()) {
        out.push_back(fmt(kv.second));
    }
    for (const auto& kv : r.verdicts()) {
        out.push_back(to_string(kv.second));
    }
    return out;
}

}  // namespace osdyn::cli
