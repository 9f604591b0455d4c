#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>

#include "convo/msgmodel.hpp"
#include "convo/respond.hpp"
#include "convo/sentiment.hpp"
#include "convo/state_queue.hpp"

namespace convo {

struct HistoryEntry {
    Timestamp at{};
    Direction direction = Direction::user;
    std::string summary;

    bool operator==(const HistoryEntry&) const = default;
};

/// Everything the bot remembers about one conversation partner.
struct UserContext {
    static constexpr std::size_t kDefaultHistoryLimit = 200;

    UserKey key;
    StateQueue states;
    Formality formality;
    std::optional<std::string> user_name;
    Sentiment mood = Sentiment::neutral;
    std::map<std::string, std::string> slots;
    std::deque<HistoryEntry> history;
    std::uint64_t version = 0;
    std::uint64_t turn = 0;

    void remember(HistoryEntry entry, std::size_t limit = kDefaultHistoryLimit);

    std::optional<std::string> slot(const std::string& name) const {
        auto it = slots.find(name);
        if (it == slots.end()) return std::nullopt;
        return it->second;
    }

    bool operator==(const UserContext&) const = default;
};

UserContext fresh_context(UserKey key);

Json to_json(const UserContext& ctx);
UserContext context_from_json(const Json& j);

}  // namespace convo
