#pragma once

// Rule-based dialog routing.
//
// A RuleTable holds three tiers of handlers: stateless handlers (checked on
// every message), per-state handlers (checked for each active dialog state in
// queue order) and fallbacks (checked only when no state handler matched).

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "convo/context.hpp"
#include "convo/nlu.hpp"
#include "convo/state_queue.hpp"

namespace convo {

/// A chat action before template realization.
struct PlannedAction {
    ActionKind kind = ActionKind::send_text;
    std::string template_id;
    std::map<std::string, std::string> fills;
    std::vector<QuickReplyOption> options;

    bool operator==(const PlannedAction&) const = default;
};

enum class TransitionMode {
    replace,  // the state whose handler fired is removed first
    layer,    // pushed on top of whatever is active
};

struct StateTransition {
    DialogState state;
    TransitionMode mode = TransitionMode::layer;
};

struct ContextUpdates {
    // nullopt erases the slot
    std::map<std::string, std::optional<std::string>> slots;
    std::optional<Formality> formality;
    std::optional<Sentiment> mood;
    std::optional<std::string> user_name;

    bool empty() const { return slots.empty() && !formality && !mood && !user_name; }
};

struct PlanOutcome {
    std::vector<PlannedAction> actions;
    std::vector<StateTransition> new_states;
    std::vector<std::string> drop_states;
    ContextUpdates updates;
    // Named side effects executed by the host after dispatch (e.g. "submit_claim").
    std::vector<std::string> effects;

    PlanOutcome& say(std::string template_id, std::map<std::string, std::string> fills = {});
    PlanOutcome& menu(std::string template_id, std::vector<QuickReplyOption> options,
                      std::map<std::string, std::string> fills = {});
    PlanOutcome& ask_media(std::string template_id);
    PlanOutcome& layer(DialogState state);
    PlanOutcome& replace(DialogState state);
    PlanOutcome& drop(std::string state_name);
    PlanOutcome& set_slot(std::string name, std::string value);
    PlanOutcome& clear_slot(std::string name);
    PlanOutcome& effect(std::string name);

    bool empty() const {
        return actions.empty() && new_states.empty() && drop_states.empty() && updates.empty() && effects.empty();
    }
};

/// Applies slot/formality/mood/name updates.
void apply_updates(UserContext& ctx, const ContextUpdates& updates);

class Handler {
public:
    using Callback = std::function<PlanOutcome(const UserContext&, const MessageUnderstanding&)>;

    virtual ~Handler() = default;
    virtual bool matches(const MessageUnderstanding& mu) const = 0;
    virtual std::string_view variant() const = 0;
    /// Identity within a tier: two handlers with equal variant and key in the
    /// same tier/state are duplicates.
    virtual std::string key() const = 0;

    PlanOutcome fire(const UserContext& ctx, const MessageUnderstanding& mu) const { return callback_(ctx, mu); }
    std::string id() const { return std::string(variant()) + ":" + key(); }

    /// Declares the states this handler may transition to and the templates it
    /// may render, for registration-time validation.
    Handler& may_enter(std::initializer_list<std::string> states);
    Handler& may_render(std::initializer_list<std::string> template_ids);
    const std::vector<std::string>& transitions() const noexcept { return transitions_; }
    const std::vector<std::string>& templates() const noexcept { return templates_; }

protected:
    explicit Handler(Callback callback);

private:
    Callback callback_;
    std::vector<std::string> transitions_;
    std::vector<std::string> templates_;
};

using HandlerPtr = std::shared_ptr<Handler>;

/// Matches one intent, optionally requiring parameters (with an optional
/// required value each).
class IntentHandler final : public Handler {
public:
    IntentHandler(std::string intent, Callback callback,
                  std::map<std::string, std::optional<std::string>> required = {});
    bool matches(const MessageUnderstanding& mu) const override;
    std::string_view variant() const override { return "intent"; }
    std::string key() const override;

private:
    std::string intent_;
    std::map<std::string, std::optional<std::string>> required_;
};

/// Consolidates every intent that expresses agreement.
class AffirmationHandler final : public Handler {
public:
    explicit AffirmationHandler(Callback callback, std::set<std::string> intents = {"affirm"});
    bool matches(const MessageUnderstanding& mu) const override { return intents_.count(mu.intent) != 0; }
    std::string_view variant() const override { return "affirmation"; }
    std::string key() const override;

private:
    std::set<std::string> intents_;
};

class NegationHandler final : public Handler {
public:
    explicit NegationHandler(Callback callback, std::set<std::string> intents = {"deny"});
    bool matches(const MessageUnderstanding& mu) const override { return intents_.count(mu.intent) != 0; }
    std::string_view variant() const override { return "negation"; }
    std::string key() const override;

private:
    std::set<std::string> intents_;
};

/// Case-insensitive regex search over the raw message text.
class RegexHandler final : public Handler {
public:
    RegexHandler(std::string pattern, Callback callback);
    bool matches(const MessageUnderstanding& mu) const override;
    std::string_view variant() const override { return "regex"; }
    std::string key() const override { return pattern_; }

private:
    std::string pattern_;
    std::regex regex_;
};

class MediaHandler final : public Handler {
public:
    MediaHandler(std::set<MediaKind> kinds, Callback callback);
    bool matches(const MessageUnderstanding& mu) const override;
    std::string_view variant() const override { return "media"; }
    std::string key() const override;

private:
    std::set<MediaKind> kinds_;
};

class EmojiSentimentHandler final : public Handler {
public:
    EmojiSentimentHandler(std::set<Sentiment> sentiments, Callback callback);
    bool matches(const MessageUnderstanding& mu) const override { return sentiments_.count(mu.sentiment) != 0; }
    std::string_view variant() const override { return "emoji_sentiment"; }
    std::string key() const override;

private:
    std::set<Sentiment> sentiments_;
};

class RegistrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RuleTable {
public:
    const std::vector<HandlerPtr>& stateless() const noexcept { return stateless_; }
    const std::vector<HandlerPtr>& fallbacks() const noexcept { return fallbacks_; }
    /// Handlers bound to `state`; empty for terminal or handler-less states.
    const std::vector<HandlerPtr>& for_state(std::string_view state) const;

    bool declares_state(std::string_view state) const;
    bool is_terminal(std::string_view state) const { return terminal_.count(std::string(state)) != 0; }
    std::vector<std::string> states() const;
    const std::set<std::string>& slots() const noexcept { return slots_; }
    bool declares_slot(const std::string& slot) const { return slots_.empty() || slots_.count(slot) != 0; }

private:
    friend class RuleTableBuilder;
    std::vector<HandlerPtr> stateless_;
    std::map<std::string, std::vector<HandlerPtr>, std::less<>> by_state_;
    std::set<std::string> terminal_;
    std::vector<HandlerPtr> fallbacks_;
    std::set<std::string> slots_;
};

class RuleTableBuilder {
public:
    RuleTableBuilder& stateless(HandlerPtr handler);
    RuleTableBuilder& on_state(const std::string& state, HandlerPtr handler);
    RuleTableBuilder& fallback(HandlerPtr handler);
    RuleTableBuilder& declare_state(const std::string& state);
    RuleTableBuilder& declare_terminal(const std::string& state);
    RuleTableBuilder& declare_slot(const std::string& slot);

    /// Validates and freezes the table. With `templates`, every template a
    /// handler declares must exist.
    RuleTable build(const TemplateTable* templates = nullptr) const;

private:
    std::vector<HandlerPtr> stateless_;
    std::vector<std::pair<std::string, HandlerPtr>> by_state_;
    std::set<std::string> declared_;
    std::set<std::string> terminal_;
    std::vector<HandlerPtr> fallbacks_;
    std::set<std::string> slots_;
};

enum class Tier { stateless, state, fallback };

std::string_view to_string(Tier tier);

struct FiredHandler {
    Tier tier;
    std::string state;  // empty unless tier == state
    std::string handler_id;

    bool operator==(const FiredHandler&) const = default;
};

struct DispatchResult {
    PlanOutcome outcome;
    std::vector<FiredHandler> fired;
    // The state whose handler consumed the message, if any.
    std::optional<std::string> consumed_by_state;
};

class NoHandlerMatched : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluates every matching stateless handler (their updates are visible to
/// later tiers), then the first matching handler of the active states in
/// queue order, else the first matching fallback. Outcomes are merged in
/// that order.
DispatchResult dispatch(const UserContext& ctx, const MessageUnderstanding& mu, const RuleTable& table);

/// Applies `outcome.drop_states`, then pushes `outcome.new_states`. Every
/// pushed state must be declared by `table`. dispatch() has already turned
/// replace transitions into a drop of the consuming state.
void apply_transitions(StateQueue& queue, const PlanOutcome& outcome, const RuleTable& table);

}  // namespace convo
