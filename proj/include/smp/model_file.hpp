#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "smp/distributions.hpp"
#include "smp/error.hpp"
#include "smp/model.hpp"

namespace smp {

/// Model file could not be read (exit code 2).
class ModelIoError : public Error {
public:
    using Error::Error;
};

/// Model file is not well-formed (exit code 3).
class ModelSyntaxError : public Error {
public:
    using Error::Error;
};

namespace model_file {

inline constexpr int kSchemaVersion = 1;

struct TransitionEntry {
    std::string from;
    std::string to;
    std::string prob;
    std::string dist;
    int line = 0;
};

/// In-memory form of the JSON model document:
///
///   {
///     "schema_version": 1,
///     "states": ["A", "B"],
///     "defaults": {"f1": "weibull(2, 1)"},
///     "transitions": [{"from": "A", "to": "B", "prob": "1.0", "dist": "f1"}],
///     "row_sum_tolerance": "1e-9"
///   }
///
/// `defaults` and `row_sum_tolerance` are optional. Probabilities are decimal
/// strings (plain JSON numbers are accepted too). A `dist` is either a
/// literal `weibull(gamma, theta)`, `exponential(rate)`,
/// `empirical("samples.csv")` or the name of a `defaults` entry.
struct ModelFile {
    int schema_version = kSchemaVersion;
    std::vector<std::string> states;
    std::map<std::string, std::string> defaults;
    std::vector<TransitionEntry> transitions;
    double row_sum_tolerance = 1e-9;
};

namespace detail {

inline int line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

inline double parse_real(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw ModelSyntaxError(what + ": '" + text + "' is not a number");
    return v;
}

inline std::string number_or_string(const nlohmann::json& j, const std::string& what) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return j.dump();
    throw ModelSyntaxError(what + " must be a decimal string or number");
}

/// Line number of each transition object, located by the n-th "from" key after
/// the "transitions" key.
inline std::vector<int> transition_lines(std::string_view text, std::size_t count) {
    std::vector<int> lines(count, 0);
    std::size_t pos = text.find("\"transitions\"");
    for (std::size_t k = 0; k < count && pos != std::string_view::npos; ++k) {
        pos = text.find("\"from\"", pos + 1);
        if (pos != std::string_view::npos) lines[k] = line_of_offset(text, pos);
    }
    return lines;
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ModelSyntaxError(where + ": unknown key '" + key + "'");
}

} // namespace detail

/// Parses the JSON text of a model document (no semantic validation).
inline ModelFile parse_document(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelSyntaxError("line " + std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object()) throw ModelSyntaxError("model document must be a JSON object");
    detail::reject_unknown_keys(doc, {"schema_version", "states", "defaults", "transitions", "row_sum_tolerance"},
                                "model");

    ModelFile mf;
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
        throw ModelSyntaxError("model: integer 'schema_version' is required");
    mf.schema_version = doc["schema_version"].get<int>();
    if (mf.schema_version != kSchemaVersion)
        throw ModelSyntaxError("model: unsupported schema_version " + std::to_string(mf.schema_version));

    if (!doc.contains("states") || !doc["states"].is_array())
        throw ModelSyntaxError("model: 'states' must be an array of labels");
    for (const auto& s : doc["states"]) {
        if (!s.is_string()) throw ModelSyntaxError("model: state labels must be strings");
        mf.states.push_back(s.get<std::string>());
    }

    if (doc.contains("defaults")) {
        if (!doc["defaults"].is_object()) throw ModelSyntaxError("model: 'defaults' must be an object");
        for (const auto& [name, lit] : doc["defaults"].items()) {
            if (!lit.is_string()) throw ModelSyntaxError("defaults." + name + " must be a distribution literal");
            mf.defaults[name] = lit.get<std::string>();
        }
    }

    if (doc.contains("row_sum_tolerance"))
        mf.row_sum_tolerance = detail::parse_real(detail::number_or_string(doc["row_sum_tolerance"], "row_sum_tolerance"),
                                                  "row_sum_tolerance");

    if (!doc.contains("transitions") || !doc["transitions"].is_array())
        throw ModelSyntaxError("model: 'transitions' must be an array");
    const auto lines = detail::transition_lines(text, doc["transitions"].size());
    std::size_t index = 0;
    for (const auto& t : doc["transitions"]) {
        const std::string where = "line " + std::to_string(lines[index]) + ": transition";
        if (!t.is_object()) throw ModelSyntaxError(where + " must be an object");
        detail::reject_unknown_keys(t, {"from", "to", "prob", "dist"}, where);
        for (const char* key : {"from", "to", "prob", "dist"})
            if (!t.contains(key)) throw ModelSyntaxError(where + " is missing '" + key + "'");
        if (!t["from"].is_string() || !t["to"].is_string() || !t["dist"].is_string())
            throw ModelSyntaxError(where + ": 'from', 'to' and 'dist' must be strings");
        TransitionEntry e;
        e.from = t["from"].get<std::string>();
        e.to = t["to"].get<std::string>();
        e.prob = detail::number_or_string(t["prob"], where + " 'prob'");
        e.dist = t["dist"].get<std::string>();
        e.line = lines[index];
        mf.transitions.push_back(std::move(e));
        ++index;
    }
    return mf;
}

/// Reads an empirical sample file: one positive real per line, no header.
inline std::vector<double> read_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelIoError("cannot open sample file " + path.string());
    std::vector<double> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const double v = detail::parse_real(t, path.string() + ":" + std::to_string(lineno));
        if (!(v > 0.0)) throw ModelSyntaxError(path.string() + ":" + std::to_string(lineno) + ": sample must be > 0");
        out.push_back(v);
    }
    if (out.empty()) throw ModelSyntaxError(path.string() + ": no samples");
    return out;
}

/// Parses `weibull(g, t)`, `exponential(r)` or `empirical("file")`; relative
/// sample paths resolve against `base_dir`.
inline WaitingTimeDistribution parse_distribution(const std::string& literal,
                                                  const std::filesystem::path& base_dir = {}) {
    const std::string text = detail::trim(literal);
    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')')
        throw ModelSyntaxError("malformed distribution literal '" + literal + "'");
    const std::string name = detail::trim(std::string_view(text).substr(0, open));
    const std::string inner = text.substr(open + 1, text.size() - open - 2);

    std::vector<std::string> args;
    std::stringstream ss(inner);
    for (std::string a; std::getline(ss, a, ',');) args.push_back(detail::trim(a));

    auto require = [&](std::size_t n) {
        if (args.size() != n)
            throw ModelSyntaxError(name + " takes " + std::to_string(n) + " argument(s): '" + literal + "'");
    };
    try {
        if (name == "weibull") {
            require(2);
            return WaitingTimeDistribution::weibull(detail::parse_real(args[0], "weibull shape"),
                                                    detail::parse_real(args[1], "weibull theta"));
        }
        if (name == "exponential") {
            require(1);
            return WaitingTimeDistribution::exponential(detail::parse_real(args[0], "exponential rate"));
        }
    } catch (const DomainError& e) {
        throw ModelSyntaxError("'" + literal + "': " + e.what());
    }
    if (name == "empirical") {
        require(1);
        std::string path = args[0];
        if (path.size() < 2 || path.front() != '"' || path.back() != '"')
            throw ModelSyntaxError("empirical expects a quoted path: '" + literal + "'");
        path = path.substr(1, path.size() - 2);
        std::filesystem::path p(path);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return WaitingTimeDistribution::empirical(read_samples(p));
    }
    throw ModelSyntaxError("unknown distribution family '" + name + "'");
}

/// Converts a parsed document into a validated model. Semantic problems are
/// collected (with line numbers) and thrown together as ValidationError.
inline SmpModel to_model(const ModelFile& mf, const std::filesystem::path& base_dir = {}) {
    const std::size_t n = mf.states.size();
    std::map<std::string, std::size_t> index;
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < n; ++i)
        if (!index.emplace(mf.states[i], i).second) errors.push_back("duplicate state '" + mf.states[i] + "'");

    std::map<std::string, DistributionPtr> aliases;
    for (const auto& [name, lit] : mf.defaults)
        aliases[name] = std::make_shared<const WaitingTimeDistribution>(parse_distribution(lit, base_dir));

    RawModel raw;
    raw.labels = mf.states;
    raw.p = RealMatrix(n, n);
    raw.dists.assign(n, std::vector<DistributionPtr>(n));
    raw.row_sum_tolerance = mf.row_sum_tolerance;

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& t : mf.transitions) {
        const std::string at = "line " + std::to_string(t.line) + ": ";
        const auto fi = index.find(t.from);
        const auto ti = index.find(t.to);
        if (fi == index.end()) errors.push_back(at + "unknown state '" + t.from + "'");
        if (ti == index.end()) errors.push_back(at + "unknown state '" + t.to + "'");
        if (fi == index.end() || ti == index.end()) continue;
        const auto [i, j] = std::pair{fi->second, ti->second};
        if (!seen.insert({i, j}).second) {
            errors.push_back(at + "duplicate transition " + t.from + " -> " + t.to);
            continue;
        }
        if (i == j) errors.push_back(at + "self-transition " + t.from + " -> " + t.to);
        const double prob = detail::parse_real(t.prob, at + "prob");
        if (!(prob >= 0.0)) errors.push_back(at + "negative probability for " + t.from + " -> " + t.to);
        raw.p(i, j) = prob;

        DistributionPtr d;
        if (auto a = aliases.find(detail::trim(t.dist)); a != aliases.end())
            d = a->second;
        else
            d = std::make_shared<const WaitingTimeDistribution>(parse_distribution(t.dist, base_dir));
        if (prob > 0.0) raw.dists[i][j] = std::move(d);
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return validate(raw);
}

inline SmpModel parse_model_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
    return to_model(parse_document(text), base_dir);
}

/// Reads, parses and validates a model file.
inline SmpModel parse_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelIoError("cannot open model file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw ModelIoError("error reading model file " + path.string());
    return parse_model_text(buffer.str(), path.parent_path());
}

} // namespace model_file

using model_file::parse_model;

} // namespace smp
