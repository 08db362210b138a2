#include "config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "branching/error.hpp"

namespace branching::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"params", {"kappa", "b_ext", "T", "L", "mode"}},
        {"plan", {"alpha", "tube_slope", "level_factor", "N", "gamma", "I"}},
        {"sweep", {"threads", "resolution", "timing"}},
        {"audit", {"z_fraction", "ell", "r", "grid", "identity_tol", "random_fields"}},
        {"render", {"z_fraction"}},
        {"fit", {"axis", "y"}},
        {"export", {"width", "depth"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_number(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(where + ": not a number: '" + s + "'");
    }
    if (trim(s.substr(used)).size() != 0) throw ConfigError(where + ": not a number: '" + s + "'");
    return v;
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (section.empty()) throw ConfigError(where + ": key outside a section");
        const std::string key = trim(line.substr(0, eq));
        if (!schema().at(section).count(key))
            throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
        if (c.entries_[section].count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        c.entries_[section][key] = trim(line.substr(eq + 1));
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return parse(s.str());
}

const std::string* Config::find(const std::string& section, const std::string& key) const {
    const auto s = entries_.find(section);
    if (s == entries_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string Config::text(const std::string& section, const std::string& key, const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

double Config::number(const std::string& section, const std::string& key, double fallback) const {
    const std::string* v = find(section, key);
    return v ? to_number(*v, section + "." + key) : fallback;
}

int Config::integer(const std::string& section, const std::string& key, int fallback) const {
    const double v = number(section, key, fallback);
    if (v != static_cast<int>(v)) throw ConfigError(section + "." + key + ": expected an integer");
    return static_cast<int>(v);
}

bool Config::flag(const std::string& section, const std::string& key, bool fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(section + "." + key + ": expected true or false");
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const std::string* v = find(section, key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_number(trim(item), section + "." + key));
    return out;
}

std::array<int, 3> parse_resolution(const std::string& s) {
    std::array<int, 3> dims{};
    std::istringstream in(s);
    std::string item;
    int i = 0;
    while (std::getline(in, item, ',')) {
        if (i == 3) throw ConfigError("resolution needs three values: " + s);
        const double v = to_number(trim(item), "resolution");
        if (v < 1 || v != static_cast<int>(v)) throw ConfigError("resolution entries must be positive integers");
        dims[i++] = static_cast<int>(v);
    }
    if (i != 3) throw ConfigError("resolution needs three values: " + s);
    return dims;
}

}  // namespace branching::cli
