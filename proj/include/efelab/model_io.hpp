#pragma once

// JSON model files:
//
//   {
//     "num_states": 4, "num_obs": 3, "num_actions": 2, "horizon": 1,
//     "likelihood":  [[...S reals...], ... O rows],
//     "transitions": [[[...S reals...], ... S rows], ... A blocks],
//     "initial_prior": [...S reals...],
//     "preferences": {"kind": "observations" | "states", "dist": [...]},   (optional)
//     "true_state": 0                                                     (environments only)
//   }
//
// Matrices are row-major; column j of each matrix is the distribution given
// conditioning index j. All probabilities are linear, not log.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "efelab/model.hpp"

namespace efelab {

struct LoadedModel {
    GenerativeModel model;
    std::optional<PreferenceModel> preferences;
    std::optional<std::size_t> true_state;
};

namespace detail {

using nlohmann::json;

inline json const& require(json const& j, char const* field) {
    auto it = j.find(field);
    if (it == j.end()) throw parse_error(field, "missing");
    return *it;
}

inline std::size_t read_count(json const& j, char const* field) {
    auto const& v = require(j, field);
    if (!v.is_number_unsigned()) throw parse_error(field, "expected a nonnegative integer");
    return v.get<std::size_t>();
}

inline std::vector<double> read_vector(json const& v, std::string const& field) {
    if (!v.is_array()) throw parse_error(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (auto const& x : v) {
        if (!x.is_number()) throw parse_error(field, "expected a number");
        out.push_back(x.get<double>());
    }
    return out;
}

inline Matrix read_matrix(json const& v, std::string const& field) {
    if (!v.is_array()) throw parse_error(field, "expected an array of rows");
    std::size_t const rows = v.size();
    std::size_t cols = 0;
    std::vector<double> data;
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = read_vector(v[r], field + "[" + std::to_string(r) + "]");
        if (r == 0) cols = row.size();
        else if (row.size() != cols)
            throw parse_error(field, "row " + std::to_string(r) + " has " +
                                         std::to_string(row.size()) + " entries, expected " +
                                         std::to_string(cols));
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(rows, cols, std::move(data));
}

inline std::size_t line_of(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

/// 17 significant digits: round-trips every double exactly.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline void write_vector(std::ostream& os, std::span<double const> v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_real(v[i]);
    os << ']';
}

inline void write_matrix(std::ostream& os, Matrix const& m, char const* indent) {
    os << "[\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        os << indent << "  ";
        write_vector(os, m.data().subspan(r * m.cols(), m.cols()));
        os << (r + 1 < m.rows() ? ",\n" : "\n");
    }
    os << indent << ']';
}

}  // namespace detail

/// Parses model text. Throws parse_error for malformed or missing fields and
/// validation_error when the tables violate a probabilistic invariant.
inline LoadedModel parse_model(std::string const& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (json::parse_error const& e) {
        throw parse_error("<document>", "line " + std::to_string(detail::line_of(text, e.byte)) +
                                            ": " + e.what());
    }
    if (!j.is_object()) throw parse_error("<document>", "expected a JSON object");

    ModelData d;
    d.num_states = detail::read_count(j, "num_states");
    d.num_obs = detail::read_count(j, "num_obs");
    d.num_actions = detail::read_count(j, "num_actions");
    d.horizon = detail::read_count(j, "horizon");
    d.likelihood = detail::read_matrix(detail::require(j, "likelihood"), "likelihood");
    auto const& blocks = detail::require(j, "transitions");
    if (!blocks.is_array()) throw parse_error("transitions", "expected an array of matrices");
    for (std::size_t a = 0; a < blocks.size(); ++a)
        d.transitions.push_back(
            detail::read_matrix(blocks[a], "transitions[" + std::to_string(a) + "]"));
    d.initial_prior = detail::read_vector(detail::require(j, "initial_prior"), "initial_prior");

    std::optional<PreferenceModel> pref;
    ValidationReport report = validate_model(d);
    if (auto it = j.find("preferences"); it != j.end()) {
        if (!it->is_object()) throw parse_error("preferences", "expected an object");
        auto const& kind = detail::require(*it, "kind");
        if (!kind.is_string()) throw parse_error("preferences.kind", "expected a string");
        PreferenceKind k;
        if (kind == "observations") k = PreferenceKind::observations;
        else if (kind == "states") k = PreferenceKind::states;
        else throw parse_error("preferences.kind", "expected \"observations\" or \"states\"");
        auto dist = detail::read_vector(detail::require(*it, "dist"), "preferences.dist");
        std::size_t const expected = k == PreferenceKind::observations ? d.num_obs : d.num_states;
        if (dist.size() != expected) {
            report.violations.push_back({"preferences", {}, {}, 0.0,
                                         "expected " + std::to_string(expected) + " entries, got " +
                                             std::to_string(dist.size())});
        } else {
            try {
                pref = PreferenceModel{k, Categorical(dist)};
            } catch (error const& e) {
                report.violations.push_back({"preferences", {}, {}, 0.0, e.what()});
            }
        }
    }

    std::optional<std::size_t> true_state;
    if (j.contains("true_state")) {
        true_state = detail::read_count(j, "true_state");
        if (*true_state >= d.num_states)
            report.violations.push_back({"true_state", {}, {}, 0.0, "must be < num_states"});
    }

    if (!report.ok()) throw validation_error(std::move(report));
    return {GenerativeModel::from_data(d), std::move(pref), true_state};
}

inline LoadedModel load_model(std::string const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

inline std::string serialize_model(GenerativeModel const& m,
                                   std::optional<PreferenceModel> const& pref = std::nullopt,
                                   std::optional<std::size_t> true_state = std::nullopt) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"num_states\": " << m.num_states() << ",\n";
    os << "  \"num_obs\": " << m.num_obs() << ",\n";
    os << "  \"num_actions\": " << m.num_actions() << ",\n";
    os << "  \"horizon\": " << m.horizon() << ",\n";
    os << "  \"likelihood\": ";
    detail::write_matrix(os, m.likelihood().matrix(), "  ");
    os << ",\n  \"transitions\": [\n";
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
        os << "    ";
        detail::write_matrix(os, m.transition(a).matrix(), "    ");
        os << (a + 1 < m.num_actions() ? ",\n" : "\n");
    }
    os << "  ],\n  \"initial_prior\": ";
    detail::write_vector(os, m.initial_prior().probs());
    if (pref) {
        os << ",\n  \"preferences\": {\"kind\": \"" << to_string(pref->kind) << "\", \"dist\": ";
        detail::write_vector(os, pref->dist.probs());
        os << '}';
    }
    if (true_state) os << ",\n  \"true_state\": " << *true_state;
    os << "\n}\n";
    return os.str();
}

inline void save_model(std::string const& path, GenerativeModel const& m,
                       std::optional<PreferenceModel> const& pref = std::nullopt,
                       std::optional<std::size_t> true_state = std::nullopt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write model file '" + path + "'");
    out << serialize_model(m, pref, true_state);
}

}  // namespace efelab
