#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace branching::cli {

// Line-oriented `key = value` text with [section] headers. `#` and `;`
// start comments. Unknown sections and keys are errors.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
    double number(const std::string& section, const std::string& key, double fallback) const;
    int integer(const std::string& section, const std::string& key, int fallback) const;
    bool flag(const std::string& section, const std::string& key, bool fallback) const;
    // Comma-separated numbers.
    std::vector<double> numbers(const std::string& section, const std::string& key) const;

private:
    const std::string* find(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, std::string>> entries_;
};

// Parses "n1,n2,n3".
std::array<int, 3> parse_resolution(const std::string& s);

}  // namespace branching::cli
