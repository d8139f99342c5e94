#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "voterlab/json_io.hpp"

namespace voterlab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parsed `key = value` experiment configuration. Values are JSON; a bare
/// word that is not valid JSON is read as a string. `#` starts a comment.
class ExperimentConfig {
public:
    ExperimentConfig() = default;
    ExperimentConfig(Json values, std::string origin);

    const Json& values() const noexcept { return values_; }
    const std::string& origin() const noexcept { return origin_; }
    bool has(const std::string& key) const { return values_.contains(key); }

    /// Throws ConfigError naming the key when it is absent or ill-typed.
    template <class T>
    T get(const std::string& key) const
    {
        if (!has(key)) throw ConfigError(origin_ + ": missing required key '" + key + "'");
        try {
            return values_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(origin_ + ":" + std::to_string(line_of(key)) + ": key '" + key + "': " + e.what());
        }
    }

    template <class T>
    T get_or(const std::string& key, T fallback) const
    {
        return has(key) ? get<T>(key) : fallback;
    }

    void require(const std::vector<std::string>& keys) const;

    /// Source line of a key, 0 when unknown.
    std::size_t line_of(const std::string& key) const;
    void set_line(const std::string& key, std::size_t line) { lines_[key] = line; }

    /// FNV-1a 64 of the canonical (key-sorted, whitespace-free) JSON dump,
    /// as 16 hex digits.
    std::string hash() const;

private:
    Json values_ = Json::object();
    Json lines_ = Json::object();
    std::string origin_ = "<config>";
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig parse_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace voterlab
