#include "hodse/textio.hpp"

#include "hodse/errors.hpp"
#include "hodse/smoothing.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hodse {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number_field(const std::string& field, const std::string& origin, long line,
                          long column) {
    const std::string t = trim(field);
    if (t.empty()) {
        throw input_error(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": empty field");
    }
    const char* begin = t.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw input_error(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": cannot parse '" + t + "' as a number");
    }
    return v;
}

}  // namespace

SampleMatrix read_csv_matrix(std::istream& in, const std::string& origin) {
    std::vector<std::vector<double>> rows;
    std::string line;
    long line_no = 0;
    long width = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        long column = 1;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            const std::string field =
                comma == std::string::npos ? line.substr(start) : line.substr(start, comma - start);
            row.push_back(parse_number_field(field, origin, line_no, column));
            if (comma == std::string::npos) break;
            start = comma + 1;
            ++column;
        }
        if (width < 0) {
            width = static_cast<long>(row.size());
        } else if (static_cast<long>(row.size()) != width) {
            throw input_error(origin + ":" + std::to_string(line_no) + ": row has " +
                              std::to_string(row.size()) + " fields, expected " +
                              std::to_string(width));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw input_error(origin + ": no data rows");
    SampleMatrix m(static_cast<long>(rows.size()), width);
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < width; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

SampleMatrix read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open data file '" + path + "'");
    return read_csv_matrix(in, path);
}

void write_csv_table(std::ostream& out, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out << ',';
        out << columns[c];
    }
    out << '\n';
    std::ostringstream cell;
    cell.precision(17);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            cell.str(std::string());
            cell << row[c];
            out << cell.str();
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// ConfigMap
// ---------------------------------------------------------------------------

ConfigMap ConfigMap::parse(std::istream& in, const std::string& origin) {
    ConfigMap cfg;
    cfg.origin_ = origin;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw input_error(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw input_error(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        if (cfg.values_.count(key)) {
            throw input_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                              "'");
        }
        cfg.values_[key] = value;
    }
    const auto it = cfg.values_.find("schema_version");
    if (it == cfg.values_.end()) {
        throw input_error(origin + ": missing schema_version");
    }
    if (trim(it->second) != "1") {
        throw input_error(origin + ": unsupported schema_version '" + it->second + "'");
    }
    cfg.consumed_.insert("schema_version");
    return cfg;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file '" + path + "'");
    return parse(in, path);
}

bool ConfigMap::has(const std::string& key) const { return values_.count(key) != 0; }

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string ConfigMap::require_string(const std::string& key) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) {
        throw input_error(origin_ + ": missing required key '" + key + "'");
    }
    return it->second;
}

double ConfigMap::parse_double(const std::string& key, const std::string& raw) const {
    const char* begin = raw.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *trim(end).c_str() != '\0') {
        throw input_error(origin_ + ": key '" + key + "': cannot parse '" + raw +
                          "' as a number");
    }
    return v;
}

long ConfigMap::get_long(const std::string& key, long fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const double v = parse_double(key, it->second);
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v) {
        throw input_error(origin_ + ": key '" + key + "': expected an integer, got '" +
                          it->second + "'");
    }
    return l;
}

double ConfigMap::get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double(key, it->second);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string v = trim(it->second);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw input_error(origin_ + ": key '" + key + "': expected a boolean, got '" + v + "'");
}

void ConfigMap::finish() const {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string msg = origin_ + ": unknown key(s):";
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw input_error(msg);
    }
}

// ---------------------------------------------------------------------------
// Functional mini-grammar
// ---------------------------------------------------------------------------

namespace {

/// Tokenizer/parser for polynomial expressions: signed terms of products of
/// numbers and x<k>[^e] factors, with '*' or juxtaposition for products and
/// '/ <number>' dividing the running coefficient.
class PolyParser {
public:
    explicit PolyParser(std::string text) : s_(std::move(text)) {}

    void run(FunctionalDescription& out) {
        skip_ws();
        if (pos_ == s_.size()) throw input_error("polynomial expression is empty");
        bool first = true;
        while (pos_ < s_.size()) {
            double sign = 1.0;
            skip_ws();
            if (peek() == '+' || peek() == '-') {
                sign = peek() == '-' ? -1.0 : 1.0;
                ++pos_;
            } else if (!first) {
                throw input_error(err("expected '+' or '-' between terms"));
            }
            parse_term(sign, out);
            first = false;
            skip_ws();
        }
    }

private:
    const std::string s_;
    std::size_t pos_ = 0;

    [[nodiscard]] char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    [[nodiscard]] std::string err(const std::string& what) const {
        return "polynomial expression, position " + std::to_string(pos_ + 1) + ": " + what;
    }

    double parse_number() {
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw input_error(err("expected a number"));
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    long parse_int() {
        skip_ws();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) {
            throw input_error(err("expected a positive integer"));
        }
        long v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (peek() - '0');
            ++pos_;
        }
        return v;
    }

    void parse_term(double sign, FunctionalDescription& out) {
        double coeff = sign;
        std::map<long, int> exps;
        bool any = false;
        for (;;) {
            skip_ws();
            const char c = peek();
            if (c == '\0' || c == '+' || c == '-') break;
            if (c == '*') {
                ++pos_;
                continue;
            }
            if (c == '/') {
                ++pos_;
                skip_ws();
                const double div = parse_number();
                if (div == 0.0) throw input_error(err("division by zero"));
                coeff /= div;
                any = true;
                continue;
            }
            if (c == 'x' || c == 'X') {
                ++pos_;
                long index = 1;
                if (std::isdigit(static_cast<unsigned char>(peek()))) index = parse_int();
                if (index < 1) throw input_error(err("variable index must be >= 1"));
                int expo = 1;
                skip_ws();
                if (peek() == '^') {
                    ++pos_;
                    const long e = parse_int();
                    if (e < 1 || e > 64) throw input_error(err("exponent out of range"));
                    expo = static_cast<int>(e);
                }
                exps[index - 1] += expo;
                any = true;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                coeff *= parse_number();
                any = true;
                continue;
            }
            throw input_error(err(std::string("unexpected character '") + c + "'"));
        }
        if (!any) throw input_error(err("empty term"));
        for (const auto& [idx, e] : exps) {
            out.poly_min_dimension = std::max(out.poly_min_dimension, idx + 1);
        }
        out.poly_terms.emplace_back(std::move(exps), coeff);
    }
};

std::vector<std::string> split_colon(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t colon = text.find(':', start);
        if (colon == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, colon - start));
        start = colon + 1;
    }
}

}  // namespace

FunctionalDescription parse_functional(const std::string& text) {
    FunctionalDescription desc;
    const std::string t = trim(text);
    if (t.rfind("poly:", 0) == 0) {
        desc.is_polynomial = true;
        PolyParser parser(t.substr(5));
        parser.run(desc);
        return desc;
    }
    if (t.rfind("sep:", 0) != 0) {
        throw input_error("functional '" + t + "': expected poly:<expr> or sep:<name>");
    }
    std::vector<std::string> parts = split_colon(t.substr(4));
    // Peel an optional trailing h=<value>.
    if (!parts.empty() && parts.back().rfind("h=", 0) == 0) {
        const std::string raw = parts.back().substr(2);
        const char* begin = raw.c_str();
        char* end = nullptr;
        desc.bandwidth = std::strtod(begin, &end);
        if (end == begin || *end != '\0' || !(desc.bandwidth > 0.0)) {
            throw input_error("functional bandwidth 'h=" + raw + "' is not a positive number");
        }
        parts.pop_back();
    }
    if (parts.empty() || parts[0].empty()) {
        throw input_error("functional '" + t + "': missing separable family name");
    }
    desc.scalar_name = parts[0];
    if (desc.scalar_name == "pow") {
        if (parts.size() != 2) {
            throw input_error("functional 'sep:pow' needs an exponent, e.g. sep:pow:0.5");
        }
        const char* begin = parts[1].c_str();
        char* end = nullptr;
        desc.power = std::strtod(begin, &end);
        if (end == begin || *end != '\0') {
            throw input_error("functional exponent '" + parts[1] + "' is not a number");
        }
        if (!(desc.power > 0.0 && desc.power <= 1.0)) {
            throw input_error("functional exponent must lie in (0, 1]");
        }
        return desc;
    }
    if (parts.size() != 1) {
        throw input_error("functional '" + t + "': unexpected extra ':' parts");
    }
    if (desc.scalar_name != "abs" && desc.scalar_name != "square" && desc.scalar_name != "sin") {
        throw input_error("functional family '" + desc.scalar_name +
                          "' not recognized (want abs, pow, square, sin)");
    }
    return desc;
}

FunctionalModel build_functional(const FunctionalDescription& desc, long d,
                                 double bandwidth_override, int max_order) {
    if (d < 1) throw input_error("functional dimension must be >= 1");
    if (desc.is_polynomial) {
        if (desc.poly_min_dimension > d) {
            throw input_error("polynomial references x" + std::to_string(desc.poly_min_dimension) +
                              " but the data has only " + std::to_string(d) + " column(s)");
        }
        std::map<std::vector<int>, double> terms;
        for (const auto& [sparse, coeff] : desc.poly_terms) {
            std::vector<int> key(static_cast<std::size_t>(d), 0);
            for (const auto& [idx, e] : sparse) key[static_cast<std::size_t>(idx)] = e;
            terms[key] += coeff;
        }
        return FunctionalModel::polynomial(std::move(terms), d);
    }

    const double h = bandwidth_override > 0.0 ? bandwidth_override : desc.bandwidth;
    if (desc.scalar_name == "abs" || desc.scalar_name == "pow") {
        const double p = desc.scalar_name == "abs" ? 1.0 : desc.power;
        const ScalarSpec spec =
            desc.scalar_name == "abs" ? ScalarSpec::abs_value() : ScalarSpec::power(p);
        std::shared_ptr<const SmoothedFunctional> smoother;
        if (h > 0.0) {
            smoother = std::make_shared<SmoothedFunctional>(default_profile(), h, p,
                                                            std::max(max_order, 2));
        }
        return FunctionalModel::separable(spec, d, smoother);
    }
    if (h > 0.0) {
        throw input_error("bandwidth applies to sep:abs and sep:pow only");
    }
    if (desc.scalar_name == "square") return FunctionalModel::separable(ScalarSpec::square(), d);
    if (desc.scalar_name == "sin") return FunctionalModel::separable(ScalarSpec::sine(), d);
    throw input_error("functional family '" + desc.scalar_name + "' not recognized");
}

}  // namespace hodse
