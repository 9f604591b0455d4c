#include "convo/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace convo {

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

namespace {

int parse_port(const std::string& s, const std::string& source) {
    try {
        std::size_t used = 0;
        const int p = std::stoi(s, &used);
        if (used == s.size() && p >= 0 && p <= 65535) return p;
    } catch (const std::exception&) {
    }
    throw ConfigError(source + ": invalid port '" + s + "'");
}

std::uint64_t parse_seed(const std::string& s, const std::string& source) {
    try {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(s);
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(source + ": invalid seed '" + s + "'");
}

bool parse_bool(const std::string& s, const std::string& source) {
    const auto v = to_lower_ascii(s);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(source + ": invalid boolean '" + s + "'");
}

}  // namespace

void apply_config_json(AppConfig& c, const Json& j) {
    static const std::set<std::string> known = {"data_dir", "language", "context_dir",      "claims_dir", "host",
                                                "port",     "seed",     "reload_templates", "static_dir",
                                                "catalog",  "templates"};
    if (!j.is_object()) throw ConfigError("config file must contain a JSON object");
    for (const auto& [k, _] : j.items()) {
        if (!known.count(k)) throw ConfigError("config file: unknown key '" + k + "'");
    }
    try {
        if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
        if (j.contains("language")) c.language = j.at("language").get<std::string>();
        if (j.contains("context_dir")) c.context_dir = j.at("context_dir").get<std::string>();
        if (j.contains("claims_dir")) c.claims_dir = j.at("claims_dir").get<std::string>();
        if (j.contains("host")) c.host = j.at("host").get<std::string>();
        if (j.contains("port")) c.port = parse_port(std::to_string(j.at("port").get<int>()), "config file");
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("reload_templates")) c.reload_templates = j.at("reload_templates").get<bool>();
        if (j.contains("static_dir")) c.static_dir = j.at("static_dir").get<std::string>();
        if (j.contains("catalog")) c.catalog_path = j.at("catalog").get<std::string>();
        if (j.contains("templates")) c.templates_path = j.at("templates").get<std::string>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
}

void apply_config_file(AppConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Json j = Json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file " + path.string() + ": malformed JSON");
    apply_config_json(config, j);
}

void apply_env(AppConfig& c, const EnvLookup& env) {
    if (auto v = env("CONVO_DATA_DIR")) c.data_dir = *v;
    if (auto v = env("CONVO_LANGUAGE")) c.language = *v;
    if (auto v = env("CONVO_CONTEXT_DIR")) c.context_dir = *v;
    if (auto v = env("CONVO_CLAIMS_DIR")) c.claims_dir = *v;
    if (auto v = env("CONVO_HOST")) c.host = *v;
    if (auto v = env("CONVO_PORT")) c.port = parse_port(*v, "CONVO_PORT");
    if (auto v = env("CONVO_SEED")) c.seed = parse_seed(*v, "CONVO_SEED");
    if (auto v = env("CONVO_RELOAD_TEMPLATES")) c.reload_templates = parse_bool(*v, "CONVO_RELOAD_TEMPLATES");
    if (auto v = env("CONVO_STATIC_DIR")) c.static_dir = *v;
    if (auto v = env("CONVO_CATALOG")) c.catalog_path = *v;
    if (auto v = env("CONVO_TEMPLATES")) c.templates_path = *v;
}

}  // namespace convo
