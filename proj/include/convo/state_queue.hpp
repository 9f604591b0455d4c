#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convo/msgmodel.hpp"

namespace convo {

/// A named conversational context. `lifetime` counts the remaining dialog
/// moves; nullopt means unbounded.
struct DialogState {
    std::string name;
    std::optional<int> lifetime;
    int priority = 0;
    std::map<std::string, std::string> payload;

    static DialogState bounded(std::string name, int lifetime, int priority = 0) {
        return {std::move(name), lifetime, priority, {}};
    }
    static DialogState unbounded(std::string name, int priority = 0) {
        return {std::move(name), std::nullopt, priority, {}};
    }
    DialogState& with(std::string key, std::string value) {
        payload[std::move(key)] = std::move(value);
        return *this;
    }

    bool is_unbounded() const { return !lifetime.has_value(); }
    bool operator==(const DialogState&) const = default;
};

/// The set of simultaneously active dialog states, kept in dispatch order:
/// priority descending, then most recently added first. Names are unique and
/// expired entries never remain.
class StateQueue {
public:
    /// Adds `state`, replacing (and re-timing) any entry with the same name.
    /// Throws std::invalid_argument for empty names or lifetimes below 1.
    void push(DialogState state);
    bool remove(std::string_view name);
    void clear() { entries_.clear(); }

    /// Decrements every bounded lifetime by one and drops expired entries,
    /// unless `intent` is the fallback intent.
    void tick(std::string_view intent);

    const DialogState* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    /// States in dispatch order.
    std::vector<DialogState> states() const;
    std::vector<std::string> names() const;

    /// Checks ordering, uniqueness and expiry invariants.
    bool valid() const;

    Json to_json() const;
    static StateQueue from_json(const Json& j);

    /// Equality over the ordered states; internal recency counters are ignored.
    bool operator==(const StateQueue& other) const;

private:
    struct Entry {
        DialogState state;
        std::uint64_t seq;
    };
    void sort();

    std::vector<Entry> entries_;
    std::uint64_t next_seq_ = 0;
};

/// Functional form of StateQueue::tick.
StateQueue tick_lifetimes(StateQueue queue, std::string_view intent);

}  // namespace convo
