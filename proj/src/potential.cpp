#include "stripbloch/potential.hpp"
#include "stripbloch/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace stripbloch {

using nlohmann::json;

void validate_potential(const StripPotential& v) {
    if (v.L < 1) throw ConfigError("potential: L must be >= 1, got " + std::to_string(v.L));
    if (v.R < 0) throw ConfigError("potential: R must be >= 0, got " + std::to_string(v.R));
    if (v.values.rows() != 2 * v.R + 1 || v.values.cols() != v.L)
        throw ConfigError("potential: values must be (2R+1) x L = " +
                          std::to_string(2 * v.R + 1) + " x " + std::to_string(v.L));
    for (int r = 0; r < v.values.rows(); ++r)
        for (int c = 0; c < v.values.cols(); ++c)
            if (!std::isfinite(v.values(r, c)))
                throw ConfigError("potential: non-finite entry at rows[" + std::to_string(r) +
                                  "][" + std::to_string(c) + "]");
}

static StripPotential potential_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("potential: expected a JSON object");
    for (const char* key : {"L", "R", "rows"})
        if (!j.contains(key)) throw ConfigError(std::string("potential: missing field \"") + key + "\"");

    StripPotential v;
    if (!j["L"].is_number_integer() || !j["R"].is_number_integer())
        throw ConfigError("potential: L and R must be integers");
    v.L = j["L"].get<int>();
    v.R = j["R"].get<int>();
    if (v.L < 1) throw ConfigError("potential: L must be >= 1");
    if (v.R < 0) throw ConfigError("potential: R must be >= 0");

    const auto& rows = j["rows"];
    if (!rows.is_array())
        throw ConfigError("potential: \"rows\" must be an array");
    const int nrows = 2 * v.R + 1;
    if (static_cast<int>(rows.size()) != nrows)
        throw ConfigError("potential: expected " + std::to_string(nrows) + " rows (x = -R..R), got " +
                          std::to_string(rows.size()));

    v.values.resize(nrows, v.L);
    for (int r = 0; r < nrows; ++r) {
        const auto& row = rows[r];
        if (!row.is_array() || static_cast<int>(row.size()) != v.L)
            throw ConfigError("potential: rows[" + std::to_string(r) + "] has " +
                              std::to_string(row.is_array() ? row.size() : 0) +
                              " entries, expected L = " + std::to_string(v.L));
        for (int c = 0; c < v.L; ++c) {
            if (!row[c].is_number())
                throw ConfigError("potential: rows[" + std::to_string(r) + "][" + std::to_string(c) +
                                  "] is not a number");
            v.values(r, c) = row[c].get<double>();
        }
    }
    validate_potential(v);
    return v;
}

StripPotential potential_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("potential: JSON parse error: ") + e.what());
    }
    return potential_from_json(j);
}

std::string potential_to_json_text(const StripPotential& v) {
    json j;
    j["L"] = v.L;
    j["R"] = v.R;
    json rows = json::array();
    for (int r = 0; r < v.values.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < v.values.cols(); ++c) row.push_back(v.values(r, c));
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j.dump(2);
}

StripPotential load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open potential file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return potential_from_json_text(ss.str());
}

void save_potential(const StripPotential& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write potential file: " + path);
    out << potential_to_json_text(v) << "\n";
}

} // namespace stripbloch
