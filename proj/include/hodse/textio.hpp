#pragma once

#include "hodse/functional.hpp"
#include "hodse/ustat.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

/// \file
/// Text ingestion for the command-line front end: headerless CSV sample
/// tables, flat key=value configuration files, and the compact functional
/// description grammar.  Kept inside the library so the parsers can be
/// exercised directly by the test suite.

namespace hodse {

/// Parse a headerless CSV numeric table (rows = observations, columns =
/// coordinates).  Accepts LF or CRLF line endings, leading/trailing blanks
/// around fields, scientific notation, and skips fully blank lines.  Ragged
/// rows or unparseable fields raise an input error naming line and column.
SampleMatrix read_csv_matrix(std::istream& in, const std::string& origin);

/// read_csv_matrix on the named file; missing file raises an input error.
SampleMatrix read_csv_file(const std::string& path);

/// Write a numeric table as CSV with one header row of column names.
void write_csv_table(std::ostream& out, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

/// Flat key=value configuration with dotted section prefixes.
///
/// Syntax per line: `key = value`, `#` starts a comment, blank lines ignored.
/// Every file must carry `schema_version = 1`.  Typed getters record which
/// keys were consumed; `finish()` raises an input error listing any keys that
/// were never consumed, so misspellings cannot pass silently.
class ConfigMap {
public:
    static ConfigMap parse(std::istream& in, const std::string& origin);
    static ConfigMap parse_file(const std::string& path);

    [[nodiscard]] bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback);
    std::string require_string(const std::string& key);
    long get_long(const std::string& key, long fallback);
    double get_double(const std::string& key, double fallback);
    bool get_bool(const std::string& key, bool fallback);

    /// Raise an input error listing all keys never consumed by a getter.
    void finish() const;

private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;

    [[nodiscard]] double parse_double(const std::string& key, const std::string& raw) const;
};

/// Result of parsing the functional mini-grammar.
///
/// Accepted forms:
///   poly:<expr>         e.g.  poly:x^2, poly:0.5 x1^2 x2 - 3 x3 / 2
///   sep:abs             coordinate-wise absolute value (optionally smoothed)
///   sep:pow:<p>         coordinate-wise |x|^p, p in (0,1]
///   sep:square          coordinate-wise square
///   sep:sin             coordinate-wise sine
/// A trailing `:h=<value>` attaches kernel smoothing at that bandwidth to the
/// sep:abs / sep:pow forms.
struct FunctionalDescription {
    bool is_polynomial = false;
    /// polynomial: sparse terms, variable index (0-based) -> exponent.
    std::vector<std::pair<std::map<long, int>, double>> poly_terms;
    long poly_min_dimension = 1;

    std::string scalar_name;  ///< abs | pow | square | sin
    double power = 1.0;       ///< exponent for pow
    double bandwidth = 0.0;   ///< from :h=, 0 when absent
};

/// Parse the grammar only (no model construction).
FunctionalDescription parse_functional(const std::string& text);

/// Build the model for dimension d.  `bandwidth_override` > 0 replaces any
/// `:h=` value; `max_order` sizes the smoothed derivative budget (it must be
/// at least the largest expansion order the caller will request).
FunctionalModel build_functional(const FunctionalDescription& desc, long d,
                                 double bandwidth_override, int max_order);

}  // namespace hodse
