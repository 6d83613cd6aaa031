#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace symgrad {

// Shortest round-trip decimal form; identical input bits always produce
// identical bytes, which is what the byte-determinism contract needs.
std::string format_double(double v);

void append_double(std::string& out, double v);
void append_array(std::string& out, std::span<const double> v);

// FNV-1a over file bytes, rendered as 16 hex digits.
std::uint64_t fnv1a64(std::span<const char> bytes);
std::string hash_file(const std::string& path);
std::string hash_string(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Sectioned key=value config text. '#' and ';' start comments, keys are
// "section.key" after parsing. Last assignment wins.
struct KeyValueConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig parse_file(const std::string& path);
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace symgrad
