#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rmdyn {

/// Scalar or list entry of a record summary. NaN reals are written as JSON null.
using SummaryValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

struct Column {
    std::string name;
    bool integer = false;
};

/// Output unit of one experiment run: per-trial table, named summary values in
/// insertion order, plot series and notes on approximations or warnings.
struct ExperimentRecord {
    std::string kind;
    std::uint64_t seed = 0;
    std::string config_snapshot;
    std::vector<Column> columns;          // first column is trial_index
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, SummaryValue>> summary;
    std::vector<std::pair<std::string, std::vector<double>>> series;
    std::vector<std::string> notes;

    /// Replaces an existing key in place, otherwise appends.
    void set(const std::string& key, SummaryValue value);
    const SummaryValue* find(const std::string& key) const;
    /// Numeric summary value as double (NaN when missing or non-numeric).
    double real(const std::string& key) const;

    void set_series(const std::string& key, std::vector<double> values);
    const std::vector<double>* find_series(const std::string& key) const;
};

}  // namespace rmdyn
