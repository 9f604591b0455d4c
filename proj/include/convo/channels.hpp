#pragma once

// Channel adapters: an interactive console and an HTTP webhook.

#include <atomic>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "convo/bot.hpp"

namespace httplib {
class Server;
}

namespace convo {

/// What a channel can display. Unsupported actions degrade: quick replies
/// become a numbered list, typing notifications are dropped.
struct ChannelCapabilities {
    bool quick_replies = true;
    bool typing = true;
    bool media = true;
};

/// Renders actions as console lines. Menus are numbered from 1.
std::vector<std::string> render_console(const std::vector<ChatAction>& actions, const ChannelCapabilities& caps);

/// Turns one console input line into a payload. A number selects an option
/// of `menu`; "/image URI", "/audio URI" and "/voice URI" send media.
/// Returns nullopt (with a hint in `error`) for an out-of-range selection.
std::optional<Payload> parse_console_input(const std::string& line, const std::vector<QuickReplyOption>& menu,
                                           std::string& error);

struct ConsoleOptions {
    UserKey user{"console", "local"};
    ChannelCapabilities capabilities;
    std::function<Timestamp()> clock;
};

/// Reads lines until EOF or "/quit"; returns the number of turns handled.
std::size_t run_console(Bot& bot, std::istream& in, std::ostream& out, const ConsoleOptions& options = {});

struct WebhookOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::filesystem::path> static_dir;
    std::size_t workers = 64;  // keep-alive connections each hold one
};

/// HTTP front end.
///
///   POST /v1/messages  body: inbound message JSON
///     200 -> JSON array of chat actions (typing first)
///     400 -> {"error": ..., "field": ...} for malformed or invalid messages
///     409 -> {"error": ...} when a concurrent turn updated the same context
///     500 -> {"error": "internal error"}
///   GET /v1/health     -> {"status": "ok"}
class WebhookServer {
public:
    WebhookServer(Bot& bot, WebhookOptions options);
    ~WebhookServer();
    WebhookServer(const WebhookServer&) = delete;
    WebhookServer& operator=(const WebhookServer&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    int start();
    /// Blocks until the server stops, starting it first if needed.
    void run();
    /// Stops and joins the serving thread.
    void stop();
    /// Asks the server to stop without joining; safe from a signal handler.
    void shutdown();
    int port() const noexcept { return port_; }

private:
    void install_routes();

    Bot& bot_;
    WebhookOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::atomic<int> port_{0};
};

}  // namespace convo
