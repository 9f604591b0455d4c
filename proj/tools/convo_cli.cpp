// convo: chat with, serve, replay and validate the claim bot.
//
// Exit codes: 0 success, 1 failed replay/validation, 2 usage or configuration error.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include "convo/bot.hpp"
#include "convo/channels.hpp"
#include "convo/config.hpp"
#include "convo/replay.hpp"

#ifndef CONVO_DEFAULT_DATA_DIR
#define CONVO_DEFAULT_DATA_DIR "data"
#endif

namespace {

using namespace convo;

struct Flags {
    std::optional<std::string> config_file;
    std::optional<std::string> data_dir;
    std::optional<std::string> language;
    std::optional<std::string> context_dir;
    std::optional<std::string> claims_dir;
    std::optional<std::string> host;
    std::optional<int> port;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> static_dir;
    std::optional<std::string> catalog;
    std::optional<std::string> templates;
    bool reload_templates = false;
};

AppConfig resolve(const Flags& f) {
    AppConfig c;
    c.data_dir = CONVO_DEFAULT_DATA_DIR;
    if (auto path = f.config_file ? f.config_file : process_env("CONVO_CONFIG")) apply_config_file(c, *path);
    apply_env(c, process_env);
    if (f.data_dir) c.data_dir = *f.data_dir;
    if (f.language) c.language = *f.language;
    if (f.context_dir) c.context_dir = *f.context_dir;
    if (f.claims_dir) c.claims_dir = *f.claims_dir;
    if (f.host) c.host = *f.host;
    if (f.port) c.port = *f.port;
    if (f.seed) c.seed = *f.seed;
    if (f.static_dir) c.static_dir = *f.static_dir;
    if (f.catalog) c.catalog_path = *f.catalog;
    if (f.templates) c.templates_path = *f.templates;
    if (f.reload_templates) c.reload_templates = true;
    return c;
}

BotConfig bot_config(const AppConfig& c) {
    BotConfig b;
    b.data_dir = c.data_dir;
    b.language = c.language;
    b.seed = c.seed;
    b.reload_templates = c.reload_templates;
    if (c.catalog_path) b.catalog_path = *c.catalog_path;
    if (c.templates_path) b.templates_path = *c.templates_path;
    return b;
}

std::unique_ptr<Bot> make_bot(const AppConfig& c, bool in_memory) {
    std::shared_ptr<ContextStore> contexts;
    std::shared_ptr<claim::ClaimStore> claims;
    if (in_memory) {
        contexts = std::make_shared<MemoryStore>();
        claims = std::make_shared<claim::MemoryClaimStore>();
    } else {
        contexts = std::make_shared<FileStore>(c.context_dir);
        claims = std::make_shared<claim::FileClaimStore>(c.claims_dir);
    }
    return std::make_unique<Bot>(bot_config(c), contexts, claims);
}

WebhookServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->shutdown();
}

int cmd_chat(const AppConfig& c, const std::string& user, bool in_memory, bool plain) {
    auto bot = make_bot(c, in_memory);
    ConsoleOptions opts;
    opts.user = {"console", user};
    opts.capabilities.quick_replies = !plain;
    std::cout << "Claim assistant (" << c.language << "). Type /quit to leave.\n";
    run_console(*bot, std::cin, std::cout, opts);
    return 0;
}

int cmd_serve(const AppConfig& c) {
    auto bot = make_bot(c, false);
    WebhookServer server(*bot, {c.host, c.port, c.static_dir});
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const int port = server.start();
    spdlog::info("listening on http://{}:{} (language {})", c.host, port, c.language);
    std::cout << "port " << port << std::endl;
    server.run();
    g_server = nullptr;
    return 0;
}

std::vector<std::pair<std::filesystem::path, ReplayScript>> collect_scripts(const std::vector<std::string>& paths) {
    std::vector<std::pair<std::filesystem::path, ReplayScript>> out;
    for (const auto& p : paths) {
        if (std::filesystem::is_directory(p)) {
            std::vector<std::filesystem::path> files;
            for (const auto& e : std::filesystem::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) out.emplace_back(f, load_script(f));
        } else {
            out.emplace_back(p, load_script(p));
        }
    }
    return out;
}

int cmd_replay(const AppConfig& c, const std::vector<std::string>& paths, const std::string& mode_name,
               const std::optional<std::string>& report_path, bool record, bool transcripts) {
    auto mode = replay_mode_from_string(mode_name);
    if (!mode) throw ConfigError("unknown replay mode '" + mode_name + "'");
    const auto scripts = collect_scripts(paths);
    if (scripts.empty()) throw ConfigError("no replay scripts found");
    const auto base = bot_config(c);

    if (record) {
        for (const auto& [path, script] : scripts) {
            std::ofstream out(path);
            out << to_json(record_script(script, base)).dump(2) << "\n";
            std::cout << "recorded " << path.string() << "\n";
        }
        return 0;
    }

    std::vector<ReplayScript> list;
    for (const auto& [_, s] : scripts) list.push_back(s);
    const auto report = run_suite(list, base, *mode);
    for (const auto& s : report.scripts) {
        std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << s.turns << " turns"
                  << (s.completed ? ", completed in " + std::to_string(*s.turns_to_completion) : "") << ")\n";
        for (const auto& f : s.failures) std::cout << "     " << f << "\n";
    }
    const auto m = report_metrics(report);
    std::cout << "scripts " << report.scripts.size() << ", passed " << m.passed << ", completion rate "
              << m.completion_rate << ", mean turns to completion " << m.mean_turns_to_completion
              << ", fallback rate " << m.fallback_rate << "\n";
    if (report_path) {
        std::ofstream out(*report_path);
        if (!out) throw ConfigError("cannot write report " + *report_path);
        out << to_json(report, transcripts).dump(2) << "\n";
    }
    return report.passed() ? 0 : 1;
}

int cmd_validate(const AppConfig& c, const std::vector<std::string>& languages, const std::vector<std::string>& scripts) {
    int problems = 0;
    auto report = [&](const std::string& where, const std::string& what) {
        std::cout << where << ": " << what << "\n";
        ++problems;
    };
    for (const auto& lang : languages) {
        BotConfig b = bot_config(c);
        b.language = lang;
        if (lang != c.language) {
            b.catalog_path.reset();
            b.templates_path.reset();
        }
        try {
            const auto table = TemplateTable::load(b.templates_file());
            for (const auto& p : lint_templates(table)) report(lang, p);
            const auto catalog = Catalog::load(b.catalog_file());
            const auto scenario = std::make_shared<const claim::Scenario>(claim::Scenario::load(c.data_dir, lang));
            for (const auto& p : claim::cross_check(*scenario, catalog)) report(lang, p);
            claim::build_rules(scenario, &table);
            Bot bot(b, std::make_shared<MemoryStore>(), std::make_shared<claim::MemoryClaimStore>());
        } catch (const std::exception& e) {
            report(lang, e.what());
        }
    }
    for (const auto& p : scripts) {
        try {
            collect_scripts({p});
        } catch (const std::exception& e) {
            report(p, e.what());
        }
    }
    std::cout << (problems ? "validation failed: " + std::to_string(problems) + " problem(s)" : "ok") << "\n";
    return problems ? 1 : 0;
}

int cmd_claims(const AppConfig& c) {
    claim::FileClaimStore store(c.claims_dir);
    for (const auto& r : store.list()) std::cout << to_json(r).dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"convo - phone damage claim chatbot"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config_file, "JSON config file (or CONVO_CONFIG)");
    app.add_option("--data-dir", f.data_dir, "Catalogs, templates and scenario data");
    app.add_option("--language", f.language, "Bot language (en, de)");
    app.add_option("--context-dir", f.context_dir, "Where user contexts are stored");
    app.add_option("--claims-dir", f.claims_dir, "Where submitted claims are stored");
    app.add_option("--seed", f.seed, "Seed for response variant selection");
    app.add_option("--catalog", f.catalog, "NLU catalog file (default <data-dir>/<language>/catalog.json)");
    app.add_option("--templates", f.templates, "Template file (default <data-dir>/<language>/templates.json)");
    app.fallthrough();

    auto* chat = app.add_subcommand("chat", "Talk to the bot in the terminal");
    std::string user = "local";
    bool in_memory = false, plain = false;
    chat->add_option("--user", user, "User id");
    chat->add_flag("--memory", in_memory, "Keep contexts and claims in memory only");
    chat->add_flag("--plain", plain, "Show menus as a single line of text");

    auto* serve = app.add_subcommand("serve", "Run the webhook server");
    serve->add_option("--host", f.host, "Bind address");
    serve->add_option("--port", f.port, "Port (0 picks a free one)");
    serve->add_option("--static-dir", f.static_dir, "Serve a web client from this directory");
    serve->add_flag("--reload-templates", f.reload_templates, "Reload templates when the file changes");

    auto* replay = app.add_subcommand("replay", "Replay scripted conversations");
    std::vector<std::string> paths;
    std::string mode = "predicate";
    std::optional<std::string> report_path;
    bool record = false, transcripts = false;
    replay->add_option("scripts", paths, "Script files or directories")->required();
    replay->add_option("--mode", mode, "exact or predicate")->check(CLI::IsMember({"exact", "predicate"}));
    replay->add_option("--report", report_path, "Write a JSON report");
    replay->add_flag("--record", record, "Rewrite the scripts with the current bot output as golden");
    replay->add_flag("--transcripts", transcripts, "Include transcripts in the report");

    auto* validate_cmd = app.add_subcommand("validate", "Check catalogs, templates and scripts");
    std::vector<std::string> languages = {"en", "de"};
    std::vector<std::string> script_paths;
    validate_cmd->add_option("--languages", languages, "Languages to check");
    validate_cmd->add_option("--scripts", script_paths, "Replay scripts to parse");

    auto* claims = app.add_subcommand("claims", "List submitted claims");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto config = resolve(f);
        if (*chat) return cmd_chat(config, user, in_memory, plain);
        if (*serve) return cmd_serve(config);
        if (*replay) return cmd_replay(config, paths, mode, report_path, record, transcripts);
        if (*validate_cmd) return cmd_validate(config, languages, script_paths);
        if (*claims) return cmd_claims(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
