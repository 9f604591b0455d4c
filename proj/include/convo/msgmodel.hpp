#pragma once

// Unified, channel-independent message format shared by every module.

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace convo {

using Json = nlohmann::json;
using Timestamp = std::chrono::sys_seconds;

struct UserKey {
    std::string channel_id;
    std::string user_id;

    auto operator<=>(const UserKey&) const = default;
    bool operator==(const UserKey&) const = default;

    std::string to_string() const { return channel_id + ":" + user_id; }
};

enum class MediaKind { image, audio, other };

struct MediaRef {
    MediaKind kind = MediaKind::other;
    std::string uri;

    bool operator==(const MediaRef&) const = default;
};

struct TextPayload {
    std::string text;
    bool operator==(const TextPayload&) const = default;
};

struct QuickReplyPayload {
    std::string option_id;
    bool operator==(const QuickReplyPayload&) const = default;
};

struct MediaPayload {
    MediaRef media;
    bool operator==(const MediaPayload&) const = default;
};

struct VoicePayload {
    MediaRef media;
    bool operator==(const VoicePayload&) const = default;
};

using Payload = std::variant<TextPayload, QuickReplyPayload, MediaPayload, VoicePayload>;

struct InboundMessage {
    UserKey key;
    std::string message_id;
    Timestamp timestamp{};
    Payload payload;

    bool operator==(const InboundMessage&) const = default;
};

enum class ActionKind { send_text, send_quick_replies, send_typing, request_media };

struct QuickReplyOption {
    std::string id;
    std::string label;

    bool operator==(const QuickReplyOption&) const = default;
};

struct ChatAction {
    ActionKind kind = ActionKind::send_text;
    std::optional<std::string> text;
    std::vector<QuickReplyOption> options;
    std::map<std::string, std::string> metadata;

    bool operator==(const ChatAction&) const = default;

    static ChatAction typing() { return {ActionKind::send_typing, std::nullopt, {}, {}}; }
    static ChatAction say(std::string text) { return {ActionKind::send_text, std::move(text), {}, {}}; }
};

enum class Direction { user, bot };

struct TranscriptEntry {
    Direction direction = Direction::user;
    std::variant<Payload, ChatAction> content;

    bool operator==(const TranscriptEntry&) const = default;
};

using Transcript = std::vector<TranscriptEntry>;

/// Raised when a wire record does not describe a valid value. `field()` names
/// the offending field (empty for syntax errors).
class DecodeError : public std::runtime_error {
public:
    DecodeError(std::string field, const std::string& what)
        : std::runtime_error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised when constructing a value that violates its invariants.
class InvalidMessage : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string_view to_string(MediaKind kind);
std::optional<MediaKind> media_kind_from_string(std::string_view s);
std::string_view to_string(ActionKind kind);
std::optional<ActionKind> action_kind_from_string(std::string_view s);
std::string_view payload_type(const Payload& payload);

// Trims ASCII whitespace on both ends.
std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view s);

void validate(const UserKey& key);
void validate(const InboundMessage& msg);
void validate(const ChatAction& action);

Json to_json(const InboundMessage& msg);
Json to_json(const ChatAction& action);
Json to_json(const Payload& payload);
Json to_json(const TranscriptEntry& entry);

InboundMessage message_from_json(const Json& j);
ChatAction action_from_json(const Json& j);
Payload payload_from_json(const Json& j);
TranscriptEntry transcript_entry_from_json(const Json& j);

// Compact dump with sorted keys; invalid UTF-8 is replaced rather than thrown.
std::string canonical_dump(const Json& j);

/// Canonical serialization: compact JSON with lexicographically ordered keys.
std::string encode_message(const InboundMessage& msg);
InboundMessage decode_message(std::string_view bytes);

std::string encode_actions(const std::vector<ChatAction>& actions);
std::vector<ChatAction> decode_actions(std::string_view bytes);

}  // namespace convo
