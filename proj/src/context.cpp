#include "convo/context.hpp"

#include <stdexcept>

namespace convo {

void UserContext::remember(HistoryEntry entry, std::size_t limit) {
    history.push_back(std::move(entry));
    while (history.size() > limit) history.pop_front();
}

UserContext fresh_context(UserKey key) {
    UserContext ctx;
    ctx.key = std::move(key);
    return ctx;
}

Json to_json(const UserContext& ctx) {
    Json history = Json::array();
    for (const auto& h : ctx.history) {
        history.push_back(Json{{"at", format_timestamp(h.at)},
                               {"direction", h.direction == Direction::user ? "user" : "bot"},
                               {"summary", h.summary}});
    }
    return Json{{"channel_id", ctx.key.channel_id},
                {"user_id", ctx.key.user_id},
                {"states", ctx.states.to_json()},
                {"formality", {{"level", to_string(ctx.formality.level)}, {"source", to_string(ctx.formality.source)}}},
                {"user_name", ctx.user_name ? Json(*ctx.user_name) : Json(nullptr)},
                {"mood", to_string(ctx.mood)},
                {"slots", ctx.slots},
                {"history", std::move(history)},
                {"version", ctx.version},
                {"turn", ctx.turn}};
}

UserContext context_from_json(const Json& j) {
    UserContext ctx;
    ctx.key.channel_id = j.at("channel_id").get<std::string>();
    ctx.key.user_id = j.at("user_id").get<std::string>();
    ctx.states = StateQueue::from_json(j.at("states"));
    auto level = formality_level_from_string(j.at("formality").at("level").get<std::string>());
    auto source = formality_source_from_string(j.at("formality").at("source").get<std::string>());
    if (!level || !source) throw std::invalid_argument("bad formality");
    ctx.formality = {*level, *source};
    if (!j.at("user_name").is_null()) ctx.user_name = j["user_name"].get<std::string>();
    auto mood = sentiment_from_string(j.at("mood").get<std::string>());
    if (!mood) throw std::invalid_argument("bad mood");
    ctx.mood = *mood;
    ctx.slots = j.at("slots").get<std::map<std::string, std::string>>();
    for (const auto& h : j.at("history")) {
        auto at = parse_timestamp(h.at("at").get<std::string>());
        if (!at) throw std::invalid_argument("bad history timestamp");
        const auto dir = h.at("direction").get<std::string>();
        if (dir != "user" && dir != "bot") throw std::invalid_argument("bad history direction");
        ctx.history.push_back({*at, dir == "user" ? Direction::user : Direction::bot, h.at("summary").get<std::string>()});
    }
    ctx.version = j.at("version").get<std::uint64_t>();
    ctx.turn = j.at("turn").get<std::uint64_t>();
    return ctx;
}

}  // namespace convo
