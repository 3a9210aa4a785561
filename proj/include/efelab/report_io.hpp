#pragma once

// Plain-text and CSV emission. Reals are written with 12 significant digits.

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "efelab/functionals.hpp"

namespace efelab {

enum class OutputFormat { csv, text };

inline std::string format_number(double v) {
    char buf[32];
    if (v == 0.0) v = 0.0;  // no "-0"
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Ordered key/value report.
class FlatReport {
  public:
    void add(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }
    void add(std::string key, double value) { add(std::move(key), format_number(value)); }
    void add(std::string key, std::size_t value) { add(std::move(key), std::to_string(value)); }

    std::vector<std::pair<std::string, std::string>> const& rows() const noexcept { return rows_; }

    std::string render(OutputFormat f) const {
        std::ostringstream os;
        if (f == OutputFormat::csv) {
            os << "key,value\n";
            for (auto const& [k, v] : rows_) os << k << ',' << v << '\n';
        } else {
            std::size_t width = 0;
            for (auto const& kv : rows_) width = std::max(width, kv.first.size());
            for (auto const& [k, v] : rows_)
                os << k << std::string(width - k.size(), ' ') << "  " << v << '\n';
        }
        return os.str();
    }

  private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

/// One functional report as a flat list: value, then every term.
inline FlatReport flatten(FunctionalReport const& r, std::string const& prefix = "") {
    FlatReport out;
    out.add(prefix + "value", r.value);
    for (auto const& [k, v] : r.terms) out.add(prefix + k, v);
    return out;
}

}  // namespace efelab
