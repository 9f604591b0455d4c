#include "convo/msgmodel.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace convo {
namespace {

constexpr std::array<std::string_view, 4> kPayloadTypes = {"text", "quick_reply", "media", "voice"};

const Json& require_field(const Json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw DecodeError(field, std::string(field) + " missing");
    }
    return *it;
}

std::string require_string(const Json& j, const char* field) {
    const Json& v = require_field(j, field);
    if (!v.is_string()) {
        throw DecodeError(field, std::string(field) + " must be a string");
    }
    return v.get<std::string>();
}

Json media_to_json(const MediaRef& m) {
    return Json{{"kind", to_string(m.kind)}, {"uri", m.uri}};
}

MediaRef media_from_json(const Json& j) {
    if (!j.is_object()) {
        throw DecodeError("payload.value", "media payload value must be an object");
    }
    auto kind_it = j.find("kind");
    auto uri_it = j.find("uri");
    if (kind_it == j.end() || !kind_it->is_string()) {
        throw DecodeError("payload.value.kind", "media kind missing");
    }
    if (uri_it == j.end() || !uri_it->is_string()) {
        throw DecodeError("payload.value.uri", "media uri missing");
    }
    auto kind = media_kind_from_string(kind_it->get<std::string>());
    if (!kind) {
        throw DecodeError("payload.value.kind", "unknown media kind");
    }
    return MediaRef{*kind, uri_it->get<std::string>()};
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string_view to_string(MediaKind kind) {
    switch (kind) {
        case MediaKind::image: return "image";
        case MediaKind::audio: return "audio";
        case MediaKind::other: return "other";
    }
    return "other";
}

std::optional<MediaKind> media_kind_from_string(std::string_view s) {
    if (s == "image") return MediaKind::image;
    if (s == "audio") return MediaKind::audio;
    if (s == "other") return MediaKind::other;
    return std::nullopt;
}

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::send_text: return "send_text";
        case ActionKind::send_quick_replies: return "send_quick_replies";
        case ActionKind::send_typing: return "send_typing";
        case ActionKind::request_media: return "request_media";
    }
    return "send_text";
}

std::optional<ActionKind> action_kind_from_string(std::string_view s) {
    if (s == "send_text") return ActionKind::send_text;
    if (s == "send_quick_replies") return ActionKind::send_quick_replies;
    if (s == "send_typing") return ActionKind::send_typing;
    if (s == "request_media") return ActionKind::request_media;
    return std::nullopt;
}

std::string_view payload_type(const Payload& payload) {
    return kPayloadTypes[payload.index()];
}

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SSZ
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':' || s[19] != 'Z') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, se;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) ||
        !parse_int(s.substr(8, 2), d) || !parse_int(s.substr(11, 2), h) ||
        !parse_int(s.substr(14, 2), mi) || !parse_int(s.substr(17, 2), se)) {
        return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59 || h < 0 || mi < 0 || se < 0) {
        return std::nullopt;
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
}

void validate(const UserKey& key) {
    if (key.channel_id.empty()) throw InvalidMessage("channel_id empty");
    if (key.user_id.empty()) throw InvalidMessage("user_id empty");
}

void validate(const InboundMessage& msg) {
    validate(msg.key);
    if (msg.message_id.empty()) throw InvalidMessage("message_id empty");
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TextPayload>) {
                if (trim(p.text).empty()) throw InvalidMessage("text empty");
            } else if constexpr (std::is_same_v<T, QuickReplyPayload>) {
                if (p.option_id.empty()) throw InvalidMessage("quick_reply empty");
            } else {
                if (p.media.uri.empty()) throw InvalidMessage("media uri empty");
            }
        },
        msg.payload);
}

void validate(const ChatAction& action) {
    switch (action.kind) {
        case ActionKind::send_text:
            if (!action.text) throw InvalidMessage("send_text requires text");
            break;
        case ActionKind::send_quick_replies: {
            if (action.options.size() < 2) throw InvalidMessage("send_quick_replies requires at least 2 options");
            std::vector<std::string> ids;
            for (const auto& o : action.options) ids.push_back(o.id);
            std::sort(ids.begin(), ids.end());
            if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
                throw InvalidMessage("send_quick_replies option ids must be unique");
            }
            break;
        }
        case ActionKind::send_typing:
            if (action.text) throw InvalidMessage("send_typing carries no text");
            break;
        case ActionKind::request_media:
            break;
    }
}

Json to_json(const Payload& payload) {
    Json j;
    j["type"] = payload_type(payload);
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TextPayload>) {
                j["value"] = p.text;
            } else if constexpr (std::is_same_v<T, QuickReplyPayload>) {
                j["value"] = p.option_id;
            } else {
                j["value"] = media_to_json(p.media);
            }
        },
        payload);
    return j;
}

Json to_json(const InboundMessage& msg) {
    return Json{{"channel_id", msg.key.channel_id},
                {"user_id", msg.key.user_id},
                {"message_id", msg.message_id},
                {"timestamp", format_timestamp(msg.timestamp)},
                {"payload", to_json(msg.payload)}};
}

Json to_json(const ChatAction& action) {
    Json body{{"type", to_string(action.kind)}};
    if (action.text) body["text"] = *action.text;
    if (!action.options.empty()) {
        Json opts = Json::array();
        for (const auto& o : action.options) opts.push_back(Json{{"id", o.id}, {"label", o.label}});
        body["options"] = std::move(opts);
    }
    Json j{{"action", std::move(body)}};
    j["metadata"] = Json::object();
    for (const auto& [k, v] : action.metadata) j["metadata"][k] = v;
    return j;
}

Json to_json(const TranscriptEntry& entry) {
    Json j{{"direction", entry.direction == Direction::user ? "user" : "bot"}};
    if (const auto* p = std::get_if<Payload>(&entry.content)) {
        j["payload"] = to_json(*p);
    } else {
        j["action"] = to_json(std::get<ChatAction>(entry.content));
    }
    return j;
}

Payload payload_from_json(const Json& j) {
    if (!j.is_object()) throw DecodeError("payload", "payload must be an object");
    // Any variant name used as a key alongside the tagged value makes the record ambiguous.
    int variant_keys = 0;
    for (auto name : kPayloadTypes) {
        if (j.contains(std::string(name))) ++variant_keys;
    }
    if (variant_keys > 0) throw DecodeError("payload", "ambiguous payload");

    auto type_it = j.find("type");
    if (type_it == j.end()) throw DecodeError("payload.type", "payload.type missing");
    if (!type_it->is_string()) throw DecodeError("payload.type", "payload.type must be a string");
    const auto type = type_it->get<std::string>();
    auto value_it = j.find("value");
    if (value_it == j.end()) throw DecodeError("payload.value", "payload.value missing");

    if (type == "text") {
        if (!value_it->is_string()) throw DecodeError("payload.value", "text must be a string");
        auto text = value_it->get<std::string>();
        if (trim(text).empty()) throw DecodeError("payload.value", "text empty");
        return TextPayload{std::move(text)};
    }
    if (type == "quick_reply") {
        if (!value_it->is_string()) throw DecodeError("payload.value", "quick_reply must be a string");
        auto id = value_it->get<std::string>();
        if (id.empty()) throw DecodeError("payload.value", "quick_reply empty");
        return QuickReplyPayload{std::move(id)};
    }
    if (type == "media" || type == "voice") {
        auto media = media_from_json(*value_it);
        if (media.uri.empty()) throw DecodeError("payload.value.uri", "media uri empty");
        if (type == "media") return MediaPayload{std::move(media)};
        return VoicePayload{std::move(media)};
    }
    throw DecodeError("payload.type", "unknown payload type '" + type + "'");
}

InboundMessage message_from_json(const Json& j) {
    if (!j.is_object()) throw DecodeError("", "message must be a JSON object");
    InboundMessage msg;
    msg.key.channel_id = require_string(j, "channel_id");
    if (msg.key.channel_id.empty()) throw DecodeError("channel_id", "channel_id empty");
    msg.key.user_id = require_string(j, "user_id");
    if (msg.key.user_id.empty()) throw DecodeError("user_id", "user_id empty");
    msg.message_id = require_string(j, "message_id");
    if (msg.message_id.empty()) throw DecodeError("message_id", "message_id empty");
    const auto ts = require_string(j, "timestamp");
    auto parsed = parse_timestamp(ts);
    if (!parsed) throw DecodeError("timestamp", "timestamp must be UTC ISO-8601 (YYYY-MM-DDTHH:MM:SSZ)");
    msg.timestamp = *parsed;
    msg.payload = payload_from_json(require_field(j, "payload"));
    return msg;
}

ChatAction action_from_json(const Json& j) {
    if (!j.is_object()) throw DecodeError("", "action record must be a JSON object");
    const Json& body = require_field(j, "action");
    if (!body.is_object()) throw DecodeError("action", "action must be an object");
    ChatAction a;
    auto kind = action_kind_from_string(require_string(body, "type"));
    if (!kind) throw DecodeError("action.type", "unknown action type");
    a.kind = *kind;
    if (auto it = body.find("text"); it != body.end()) {
        if (!it->is_string()) throw DecodeError("action.text", "text must be a string");
        a.text = it->get<std::string>();
    }
    if (auto it = body.find("options"); it != body.end()) {
        if (!it->is_array()) throw DecodeError("action.options", "options must be an array");
        for (const auto& o : *it) {
            a.options.push_back({require_string(o, "id"), require_string(o, "label")});
        }
    }
    if (auto it = j.find("metadata"); it != j.end()) {
        if (!it->is_object()) throw DecodeError("metadata", "metadata must be an object");
        for (auto m = it->begin(); m != it->end(); ++m) {
            if (!m->is_string()) throw DecodeError("metadata", "metadata values must be strings");
            a.metadata[m.key()] = m->get<std::string>();
        }
    }
    try {
        validate(a);
    } catch (const InvalidMessage& e) {
        throw DecodeError("action", e.what());
    }
    return a;
}

TranscriptEntry transcript_entry_from_json(const Json& j) {
    TranscriptEntry e;
    const auto dir = require_string(j, "direction");
    if (dir == "user") {
        e.direction = Direction::user;
        e.content = payload_from_json(require_field(j, "payload"));
    } else if (dir == "bot") {
        e.direction = Direction::bot;
        e.content = action_from_json(require_field(j, "action"));
    } else {
        throw DecodeError("direction", "direction must be user or bot");
    }
    return e;
}

std::string canonical_dump(const Json& j) {
    return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string encode_message(const InboundMessage& msg) {
    return canonical_dump(to_json(msg));
}

InboundMessage decode_message(std::string_view bytes) {
    Json j = Json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded()) throw DecodeError("", "malformed JSON");
    return message_from_json(j);
}

std::string encode_actions(const std::vector<ChatAction>& actions) {
    Json arr = Json::array();
    for (const auto& a : actions) arr.push_back(to_json(a));
    return canonical_dump(arr);
}

std::vector<ChatAction> decode_actions(std::string_view bytes) {
    Json j = Json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw DecodeError("", "expected a JSON array of actions");
    std::vector<ChatAction> out;
    for (const auto& a : j) out.push_back(action_from_json(a));
    return out;
}

}  // namespace convo
