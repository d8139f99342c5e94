#include "voterlab/config.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace voterlab {

ExperimentConfig::ExperimentConfig(Json values, std::string origin)
    : values_(std::move(values)), origin_(std::move(origin))
{
}

void ExperimentConfig::require(const std::vector<std::string>& keys) const
{
    for (const auto& key : keys)
        if (!has(key)) throw ConfigError(origin_ + ": missing required key '" + key + "'");
}

std::size_t ExperimentConfig::line_of(const std::string& key) const
{
    return lines_.contains(key) ? lines_.at(key).get<std::size_t>() : 0;
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ExperimentConfig::hash() const
{
    return fnv1a_hex(values_.dump());
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// A '#' outside a JSON string starts a comment.
std::string strip_comment(const std::string& line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool bare_word(const std::string& s)
{
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '/')) return false;
    return !s.empty();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin)
{
    Json values = Json::object();
    std::vector<std::pair<std::string, std::size_t>> lines;
    std::istringstream in(text);
    std::string raw;
    std::size_t number = 0;
    auto fail = [&](const std::string& what) { throw ConfigError(origin + ":" + std::to_string(number) + ": " + what); };
    while (std::getline(in, raw)) {
        ++number;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (!bare_word(key)) fail("invalid key '" + key + "'");
        if (value.empty()) fail("missing value for key '" + key + "'");
        if (values.contains(key)) fail("duplicate key '" + key + "'");
        Json parsed = Json::parse(value, nullptr, false);
        if (parsed.is_discarded()) {
            if (!bare_word(value)) fail("value for key '" + key + "' is neither JSON nor a bare word");
            parsed = value;
        }
        values[key] = std::move(parsed);
        lines.emplace_back(key, number);
    }
    ExperimentConfig config(std::move(values), origin);
    for (const auto& [key, line] : lines) config.set_line(key, line);
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

}  // namespace voterlab
