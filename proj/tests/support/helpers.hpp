#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "convo/bot.hpp"
#include "convo/msgmodel.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return CONVO_TEST_DATA_DIR; }
inline std::filesystem::path fixtures_dir() { return CONVO_TEST_FIXTURES_DIR; }

inline convo::Timestamp at(const std::string& iso) { return *convo::parse_timestamp(iso); }

inline convo::InboundMessage text(const std::string& user, const std::string& body, convo::Timestamp t,
                                  const std::string& id = "m") {
    return {{"test", user}, id, t, convo::TextPayload{body}};
}

inline convo::BotConfig bot_config(const std::string& language = "en") {
    convo::BotConfig c;
    c.data_dir = data_dir();
    c.language = language;
    return c;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("convo-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
