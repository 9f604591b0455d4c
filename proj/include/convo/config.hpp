#pragma once

// Runtime configuration. Precedence: command-line flags, then CONVO_*
// environment variables, then a JSON config file, then defaults.

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "convo/msgmodel.hpp"

namespace convo {

struct AppConfig {
    std::filesystem::path data_dir;
    std::string language = "en";
    std::filesystem::path context_dir = "var/contexts";
    std::filesystem::path claims_dir = "var/claims";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::uint64_t seed = 0;
    bool reload_templates = false;
    std::optional<std::filesystem::path> static_dir;
    // Override <data_dir>/<language>/catalog.json and templates.json.
    std::optional<std::filesystem::path> catalog_path;
    std::optional<std::filesystem::path> templates_path;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// The process environment.
std::optional<std::string> process_env(const std::string& name);

/// Keys: data_dir, language, context_dir, claims_dir, host, port, seed,
/// reload_templates, static_dir, catalog, templates. Unknown keys are rejected.
void apply_config_json(AppConfig& config, const Json& j);
void apply_config_file(AppConfig& config, const std::filesystem::path& path);
/// CONVO_DATA_DIR, CONVO_LANGUAGE, CONVO_CONTEXT_DIR, CONVO_CLAIMS_DIR,
/// CONVO_HOST, CONVO_PORT, CONVO_SEED, CONVO_RELOAD_TEMPLATES, CONVO_STATIC_DIR,
/// CONVO_CATALOG, CONVO_TEMPLATES.
void apply_env(AppConfig& config, const EnvLookup& env);

}  // namespace convo
