#include "convo/channels.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>

namespace convo {

std::vector<std::string> render_console(const std::vector<ChatAction>& actions, const ChannelCapabilities& caps) {
    std::vector<std::string> lines;
    for (const auto& a : actions) {
        switch (a.kind) {
            case ActionKind::send_typing:
                if (caps.typing) lines.emplace_back("(typing...)");
                break;
            case ActionKind::send_text:
                lines.push_back("bot: " + a.text.value_or(""));
                break;
            case ActionKind::request_media:
                lines.push_back("bot: " + a.text.value_or(""));
                if (caps.media) lines.emplace_back("     (send a picture with /image <uri>)");
                break;
            case ActionKind::send_quick_replies: {
                lines.push_back("bot: " + a.text.value_or(""));
                if (caps.quick_replies) {
                    for (std::size_t i = 0; i < a.options.size(); ++i) {
                        lines.push_back("  " + std::to_string(i + 1) + ") " + a.options[i].label);
                    }
                } else {
                    std::string flat = "     Reply with the number:";
                    for (std::size_t i = 0; i < a.options.size(); ++i) {
                        flat += " " + std::to_string(i + 1) + " = " + a.options[i].label +
                                (i + 1 < a.options.size() ? "," : "");
                    }
                    lines.push_back(flat);
                }
                break;
            }
        }
    }
    return lines;
}

std::optional<Payload> parse_console_input(const std::string& line, const std::vector<QuickReplyOption>& menu,
                                           std::string& error) {
    error.clear();
    const std::string text = trim(line);
    if (!menu.empty() && !text.empty() &&
        text.find_first_not_of("0123456789") == std::string::npos && text.size() <= 3) {
        const auto n = std::stoul(text);
        if (n < 1 || n > menu.size()) {
            error = "please pick a number between 1 and " + std::to_string(menu.size());
            return std::nullopt;
        }
        return QuickReplyPayload{menu[n - 1].id};
    }
    for (auto [prefix, kind, voice] : {std::tuple{"/image ", MediaKind::image, false},
                                       std::tuple{"/audio ", MediaKind::audio, false},
                                       std::tuple{"/voice ", MediaKind::audio, true}}) {
        const std::string p = prefix;
        if (text.rfind(p, 0) == 0) {
            MediaRef ref{kind, trim(text.substr(p.size()))};
            if (voice) return VoicePayload{ref};
            return MediaPayload{ref};
        }
    }
    return TextPayload{line};
}

std::size_t run_console(Bot& bot, std::istream& in, std::ostream& out, const ConsoleOptions& options) {
    auto clock = options.clock ? options.clock : [] {
        return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    };
    std::vector<QuickReplyOption> menu;
    std::size_t turns = 0;
    std::string line;
    out << "you: " << std::flush;
    while (std::getline(in, line)) {
        if (trim(line) == "/quit") break;
        if (trim(line).empty()) {
            out << "you: " << std::flush;
            continue;
        }
        std::string error;
        auto payload = parse_console_input(line, menu, error);
        if (!payload) {
            out << "     " << error << "\nyou: " << std::flush;
            continue;
        }
        InboundMessage msg{options.user, "console-" + std::to_string(turns + 1), clock(), *payload};
        auto result = bot.handle(msg);
        ++turns;
        menu.clear();
        for (const auto& a : result.actions) {
            if (a.kind == ActionKind::send_quick_replies) menu = a.options;
        }
        for (const auto& l : render_console(result.actions, options.capabilities)) out << l << "\n";
        out << "you: " << std::flush;
    }
    out << "\n";
    return turns;
}

WebhookServer::WebhookServer(Bot& bot, WebhookOptions options)
    : bot_(bot), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    const auto workers = std::max<std::size_t>(1, options_.workers);
    server_->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
    install_routes();
}

WebhookServer::~WebhookServer() { stop(); }

namespace {

void reply_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(canonical_dump(body), "application/json");
}

}  // namespace

void WebhookServer::install_routes() {
    server_->Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
        reply_json(res, 200, Json{{"status", "ok"}});
    });
    server_->Post("/v1/messages", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            const auto msg = decode_message(req.body);
            const auto result = bot_.handle(msg);
            res.status = 200;
            res.set_content(encode_actions(result.actions), "application/json");
        } catch (const DecodeError& e) {
            reply_json(res, 400, Json{{"error", e.what()}, {"field", e.field()}});
        } catch (const InvalidMessage& e) {
            reply_json(res, 400, Json{{"error", e.what()}, {"field", ""}});
        } catch (const VersionConflict& e) {
            spdlog::warn("webhook: {}", e.what());
            reply_json(res, 409, Json{{"error", e.what()}});
        } catch (const std::exception& e) {
            spdlog::error("webhook: {}", e.what());
            reply_json(res, 500, Json{{"error", "internal error"}});
        }
    });
    if (options_.static_dir) server_->set_mount_point("/", options_.static_dir->string());
}

int WebhookServer::start() {
    if (options_.port == 0) {
        port_ = server_->bind_to_any_port(options_.host);
    } else if (server_->bind_to_port(options_.host, options_.port)) {
        port_ = options_.port;
    } else {
        port_ = -1;
    }
    if (port_ <= 0) throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void WebhookServer::run() {
    if (!thread_.joinable()) start();
    thread_.join();
}

void WebhookServer::shutdown() {
    if (server_) server_->stop();
}

void WebhookServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace convo
