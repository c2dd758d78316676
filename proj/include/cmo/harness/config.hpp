#ifndef CMO_HARNESS_CONFIG_HPP
#define CMO_HARNESS_CONFIG_HPP

#include "cmo/engine.hpp"
#include "cmo/problems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cmo::harness {

/// Shortest round-trip decimal form; "inf"/"-inf"/"nan" for non-finite values.
inline std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Plain-text config format: `key = value` lines, `[table]` headers, `#` comments.
// Values are double-quoted strings, integers, floats, true/false, or bracketed arrays.

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct Value {
    std::variant<bool, std::int64_t, double, std::string, std::vector<Value>> data;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct Entry {
    std::string key;
    Value value;
    std::size_t line = 0;
    std::size_t column = 0;
};

/// Tables in order of appearance; the root table has an empty name.
struct Table {
    std::string name;
    std::size_t line = 1;
    std::size_t column = 1;
    std::vector<Entry> entries;
};

struct Document {
    std::vector<Table> tables;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Document parse() {
        Document doc;
        doc.tables.push_back(Table{});
        std::set<std::string> seen_tables{""};
        while (true) {
            skip_blank_lines();
            if (eof()) {
                break;
            }
            if (peek() == '[') {
                const auto l = line_;
                const auto c = col_;
                advance();
                skip_spaces();
                std::string name = bare_key();
                while (peek() == '.') {
                    advance();
                    name += '.' + bare_key();
                }
                skip_spaces();
                expect(']');
                if (!seen_tables.insert(name).second) {
                    throw ParseError(l, c, "duplicate table [" + name + "]");
                }
                doc.tables.push_back(Table{name, l, c, {}});
            } else {
                const auto l = line_;
                const auto c = col_;
                std::string key = bare_key();
                skip_spaces();
                expect('=');
                skip_spaces();
                Value v = value();
                auto& entries = doc.tables.back().entries;
                for (const auto& e : entries) {
                    if (e.key == key) {
                        throw ParseError(l, c, "duplicate key '" + key + "'");
                    }
                }
                entries.push_back({std::move(key), std::move(v), l, c});
            }
            end_of_line();
        }
        return doc;
    }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, col_, what); }

    void expect(char c) {
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        advance();
    }

    void skip_spaces() {
        while (peek() == ' ' || peek() == '\t' || peek() == '\r') {
            advance();
        }
    }

    void skip_comment() {
        if (peek() == '#') {
            while (!eof() && peek() != '\n') {
                advance();
            }
        }
    }

    void skip_blank_lines() {
        while (!eof()) {
            skip_spaces();
            skip_comment();
            if (peek() != '\n') {
                return;
            }
            advance();
        }
    }

    // Whitespace, comments and newlines inside arrays.
    void skip_array_space() {
        while (true) {
            skip_spaces();
            skip_comment();
            if (peek() != '\n') {
                return;
            }
            advance();
        }
    }

    void end_of_line() {
        skip_spaces();
        skip_comment();
        if (!eof()) {
            if (peek() != '\n') {
                fail("unexpected trailing characters");
            }
            advance();
        }
    }

    std::string bare_key() {
        std::string key;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-') {
            key += peek();
            advance();
        }
        if (key.empty()) {
            fail("expected a key");
        }
        return key;
    }

    Value value() {
        Value v;
        v.line = line_;
        v.column = col_;
        const char c = peek();
        if (c == '"') {
            v.data = string();
        } else if (c == '[') {
            advance();
            std::vector<Value> items;
            skip_array_space();
            while (peek() != ']') {
                items.push_back(value());
                skip_array_space();
                if (peek() == ',') {
                    advance();
                    skip_array_space();
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            advance();
            v.data = std::move(items);
        } else {
            std::string word;
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                              peek() == '.' || peek() == '_')) {
                word += peek();
                advance();
            }
            if (word == "true" || word == "false") {
                v.data = word == "true";
            } else if (!word.empty()) {
                v.data = number(word, v.line, v.column);
            } else {
                fail("expected a value");
            }
        }
        return v;
    }

    std::string string() {
        advance();
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') {
                fail("unterminated string");
            }
            const char c = peek();
            advance();
            if (c == '"') {
                return out;
            }
            if (c == '\\') {
                const char e = peek();
                advance();
                switch (e) {
                case 'n':
                    out += '\n';
                    break;
                case 't':
                    out += '\t';
                    break;
                case '"':
                case '\\':
                    out += e;
                    break;
                default:
                    fail("unknown escape sequence");
                }
            } else {
                out += c;
            }
        }
    }

    static std::variant<bool, std::int64_t, double, std::string, std::vector<Value>>
    number(std::string word, std::size_t line, std::size_t col) {
        word.erase(std::remove(word.begin(), word.end(), '_'), word.end());
        const bool is_float = word.find_first_of(".eE") != std::string::npos || word == "inf" || word == "+inf" ||
                              word == "-inf" || word == "nan";
        const char* first = word.data() + (word.front() == '+' ? 1 : 0);
        const char* last = word.data() + word.size();
        if (is_float) {
            double d = 0.0;
            const auto res = std::from_chars(first, last, d);
            if (res.ec == std::errc() && res.ptr == last) {
                return d;
            }
        } else {
            std::int64_t i = 0;
            const auto res = std::from_chars(first, last, i);
            if (res.ec == std::errc() && res.ptr == last) {
                return i;
            }
        }
        throw ParseError(line, col, "invalid value '" + word + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

} // namespace detail

inline Document parse_document(std::string_view text) { return detail::Parser(text).parse(); }

/// Closest known key within an edit distance of half the key length (at least 2), or "".
inline std::string suggest_key(std::string_view key, std::span<const std::string_view> known) {
    std::string best;
    std::size_t best_d = std::max<std::size_t>(2, key.size() / 2) + 1;
    for (auto k : known) {
        const auto d = detail::edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ProblemSpec {
    std::string id;
    std::size_t dimension = default_dimension;
    std::size_t max_fe = 50000;
};

struct ExperimentConfig {
    std::vector<ProblemSpec> problems;
    std::vector<std::string> variants{"full"};
    std::vector<std::uint64_t> seeds;
    AlgorithmConfig algorithm;
    std::string output = "results";
    /// Worker threads; 0 uses the hardware concurrency.
    std::size_t threads = 0;

    /// Checks the grid invariants and every resolved per-problem algorithm config.
    void validate() const {
        if (problems.empty()) {
            throw std::invalid_argument("config: at least one problem is required");
        }
        if (seeds.empty()) {
            throw std::invalid_argument("config: at least one seed is required");
        }
        std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
        if (distinct.size() != seeds.size()) {
            throw std::invalid_argument("config: seeds must be distinct");
        }
        std::set<std::string> ids;
        for (const auto& p : problems) {
            if (!ids.insert(p.id).second) {
                throw std::invalid_argument("config: duplicate problem '" + p.id + "'");
            }
            make_problem(p.id, p.dimension);
            algorithm_for(p).validate();
        }
        if (variants.empty()) {
            throw std::invalid_argument("config: at least one variant is required");
        }
        for (const auto& v : variants) {
            apply_ablation(algorithm, v);
        }
    }

    AlgorithmConfig algorithm_for(const ProblemSpec& p) const {
        AlgorithmConfig c = algorithm;
        c.max_fe = p.max_fe;
        return c;
    }

    /// Resolved config in the input format. Output directory and thread count are
    /// left out because they do not affect results.
    std::string echo() const {
        std::ostringstream os;
        const auto list = [&](const auto& xs, auto&& fmt) {
            os << '[';
            for (std::size_t i = 0; i < xs.size(); ++i) {
                os << (i ? ", " : "") << fmt(xs[i]);
            }
            os << "]\n";
        };
        const auto quoted = [](const std::string& s) { return '"' + s + '"'; };
        const auto num = [](double d) { return format_double(d); };
        const auto& a = algorithm;
        std::vector<std::string> ids;
        for (const auto& p : problems) {
            ids.push_back(p.id);
        }
        os << "problem = ";
        list(ids, quoted);
        os << "variants = ";
        list(variants, quoted);
        os << "seeds = ";
        list(seeds, [](std::uint64_t s) { return std::to_string(s); });
        os << "N = " << a.population << '\n';
        os << "reference_points = " << a.reference_points << '\n';
        os << "hv_reference = " << num(a.hv_reference) << '\n';
        os << "eps0 = " << num(a.epsilon.eps0) << '\n';
        os << "curvature = " << num(a.epsilon.curvature) << '\n';
        os << "eps_floor = " << num(a.epsilon.floor_value) << '\n';
        os << "separated_period = " << num(a.epsilon.separated_period) << '\n';
        os << "default_period = " << num(a.epsilon.default_period) << '\n';
        os << "gap = " << a.history_gap << '\n';
        os << "guard = " << num(a.history_guard) << '\n';
        os << "overlap_threshold = " << num(a.classifier.overlap) << '\n';
        os << "cnt_reset = " << (a.reset_cnt_on_update ? "true" : "false") << '\n';
        os << "dra_progress = " << num(a.dra_progress) << '\n';
        os << "aux_size = " << a.fixed_aux_size << '\n';
        os << "eta_c = " << num(a.operators.eta_c) << '\n';
        os << "eta_m_stage1 = " << num(a.operators.eta_m_stage1) << '\n';
        os << "eta_m_stage2 = " << num(a.operators.eta_m_stage2) << '\n';
        os << "pc = " << num(a.operators.pc) << '\n';
        os << "pm = " << num(a.operators.pm) << '\n';
        os << "p_best = " << num(a.operators.p_best_fraction) << '\n';
        os << "f_set = ";
        list(a.operators.f_set, num);
        os << "cr_de = ";
        list(a.operators.cr_set_de, num);
        os << "cr_transfer = ";
        list(a.operators.cr_set_transfer, num);
        for (const auto& p : problems) {
            os << "\n[problem." << p.id << "]\n";
            os << "dimension = " << p.dimension << '\n';
            os << "maxFE = " << p.max_fe << '\n';
        }
        return os.str();
    }

    /// 64-bit FNV-1a hash of echo().
    std::uint64_t fingerprint() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : echo()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::uint64_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        s[i] = first + i;
    }
    return s;
}

inline constexpr std::string_view root_keys[] = {
    "problem",      "dimension",    "N",           "maxFE",        "seeds",       "variants",
    "output",       "threads",      "reference_points", "hv_reference", "eps0",   "curvature",
    "eps_floor",    "separated_period", "default_period", "gap",     "guard",       "overlap_threshold",
    "cnt_reset",    "dra_progress", "aux_size",    "eta_c",        "eta_m_stage1", "eta_m_stage2",
    "pc",           "pm",           "p_best",      "f_set",        "cr_de",       "cr_transfer"};

inline constexpr std::string_view problem_keys[] = {"dimension", "maxFE"};

namespace detail {

[[noreturn]] inline void reject(const Value& v, const std::string& what) { throw ParseError(v.line, v.column, what); }

inline double as_double(const Value& v, const std::string& key) {
    if (const auto* d = std::get_if<double>(&v.data)) {
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&v.data)) {
        return static_cast<double>(*i);
    }
    reject(v, "'" + key + "' must be a number");
}

inline std::uint64_t as_count(const Value& v, const std::string& key) {
    const auto* i = std::get_if<std::int64_t>(&v.data);
    if (!i || *i < 0) {
        reject(v, "'" + key + "' must be a non-negative integer");
    }
    return static_cast<std::uint64_t>(*i);
}

inline bool as_bool(const Value& v, const std::string& key) {
    const auto* b = std::get_if<bool>(&v.data);
    if (!b) {
        reject(v, "'" + key + "' must be true or false");
    }
    return *b;
}

inline std::string as_string(const Value& v, const std::string& key) {
    const auto* s = std::get_if<std::string>(&v.data);
    if (!s) {
        reject(v, "'" + key + "' must be a string");
    }
    return *s;
}

/// A scalar is accepted where a list is expected.
inline std::vector<Value> as_list(const Value& v) {
    if (const auto* arr = std::get_if<std::vector<Value>>(&v.data)) {
        return *arr;
    }
    return {v};
}

inline void check_key(const Entry& e, std::span<const std::string_view> known, const std::string& where) {
    if (std::find(known.begin(), known.end(), e.key) != known.end()) {
        return;
    }
    std::string msg = "unknown key '" + e.key + "'" + where;
    const auto hint = suggest_key(e.key, known);
    if (!hint.empty()) {
        msg += "; did you mean '" + hint + "'?";
    }
    throw ParseError(e.line, e.column, msg);
}

} // namespace detail

/// Resolves a parsed document into a validated config with defaults filled in.
inline ExperimentConfig resolve_config(const Document& doc) {
    using namespace detail;
    ExperimentConfig cfg;
    cfg.seeds = seed_range(1, 30);
    auto& a = cfg.algorithm;
    std::size_t dimension = default_dimension;
    std::size_t max_fe = 50000;
    std::vector<std::string> ids;
    const Value* problem_value = nullptr;

    for (const auto& e : doc.tables.front().entries) {
        check_key(e, root_keys, "");
        const auto& k = e.key;
        const auto& v = e.value;
        if (k == "problem") {
            problem_value = &v;
            for (const auto& item : as_list(v)) {
                ids.push_back(as_string(item, k));
            }
        } else if (k == "dimension") {
            dimension = as_count(v, k);
        } else if (k == "N") {
            a.population = as_count(v, k);
        } else if (k == "maxFE") {
            max_fe = as_count(v, k);
        } else if (k == "seeds") {
            cfg.seeds.clear();
            for (const auto& item : as_list(v)) {
                cfg.seeds.push_back(as_count(item, k));
            }
            std::set<std::uint64_t> distinct(cfg.seeds.begin(), cfg.seeds.end());
            if (distinct.size() != cfg.seeds.size()) {
                reject(v, "seeds must be distinct");
            }
        } else if (k == "variants") {
            cfg.variants.clear();
            for (const auto& item : as_list(v)) {
                auto name = as_string(item, k);
                if (!is_variant(name)) {
                    reject(item, "unknown variant '" + name + "'");
                }
                cfg.variants.push_back(std::move(name));
            }
        } else if (k == "output") {
            cfg.output = as_string(v, k);
        } else if (k == "threads") {
            cfg.threads = as_count(v, k);
        } else if (k == "reference_points") {
            a.reference_points = as_count(v, k);
        } else if (k == "hv_reference") {
            a.hv_reference = as_double(v, k);
        } else if (k == "eps0") {
            a.epsilon.eps0 = as_double(v, k);
        } else if (k == "curvature") {
            a.epsilon.curvature = as_double(v, k);
        } else if (k == "eps_floor") {
            a.epsilon.floor_value = as_double(v, k);
        } else if (k == "separated_period") {
            a.epsilon.separated_period = as_double(v, k);
        } else if (k == "default_period") {
            a.epsilon.default_period = as_double(v, k);
        } else if (k == "gap") {
            a.history_gap = as_count(v, k);
        } else if (k == "guard") {
            a.history_guard = as_double(v, k);
        } else if (k == "overlap_threshold") {
            a.classifier.overlap = as_double(v, k);
        } else if (k == "cnt_reset") {
            a.reset_cnt_on_update = as_bool(v, k);
        } else if (k == "dra_progress") {
            a.dra_progress = as_double(v, k);
        } else if (k == "aux_size") {
            a.fixed_aux_size = as_count(v, k);
        } else if (k == "eta_c") {
            a.operators.eta_c = as_double(v, k);
        } else if (k == "eta_m_stage1") {
            a.operators.eta_m_stage1 = as_double(v, k);
        } else if (k == "eta_m_stage2") {
            a.operators.eta_m_stage2 = as_double(v, k);
        } else if (k == "pc") {
            a.operators.pc = as_double(v, k);
        } else if (k == "pm") {
            a.operators.pm = as_double(v, k);
        } else if (k == "p_best") {
            a.operators.p_best_fraction = as_double(v, k);
        } else {
            std::vector<double> xs;
            for (const auto& item : as_list(v)) {
                xs.push_back(as_double(item, k));
            }
            (k == "f_set" ? a.operators.f_set : k == "cr_de" ? a.operators.cr_set_de : a.operators.cr_set_transfer) =
                xs;
        }
    }
    if (!problem_value) {
        throw ParseError(1, 1, "missing required key 'problem'");
    }
    for (const auto& id : ids) {
        if (std::find(std::begin(problem_ids), std::end(problem_ids), id) == std::end(problem_ids)) {
            reject(*problem_value, "unknown problem '" + id + "'");
        }
        cfg.problems.push_back({id, dimension, max_fe});
    }
    a.max_fe = max_fe;

    for (std::size_t t = 1; t < doc.tables.size(); ++t) {
        const auto& [name, line, column, entries] = doc.tables[t];
        const std::string prefix = "problem.";
        if (name.rfind(prefix, 0) != 0) {
            throw ParseError(line, column, "unknown table [" + name + "]");
        }
        const std::string id = name.substr(prefix.size());
        auto it = std::find_if(cfg.problems.begin(), cfg.problems.end(), [&](const auto& p) { return p.id == id; });
        if (it == cfg.problems.end()) {
            throw ParseError(line, column, "table [" + name + "] names a problem not listed in 'problem'");
        }
        for (const auto& e : entries) {
            check_key(e, problem_keys, " in [" + name + "]");
            (e.key == "dimension" ? it->dimension : it->max_fe) = as_count(e.value, e.key);
        }
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config(std::string_view text) { return resolve_config(parse_document(text)); }

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ParseError& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

} // namespace cmo::harness

#endif
