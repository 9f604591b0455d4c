#include "convo/dialog.hpp"

#include <algorithm>

namespace convo {

PlanOutcome& PlanOutcome::say(std::string template_id, std::map<std::string, std::string> fills) {
    actions.push_back({ActionKind::send_text, std::move(template_id), std::move(fills), {}});
    return *this;
}

PlanOutcome& PlanOutcome::menu(std::string template_id, std::vector<QuickReplyOption> options,
                               std::map<std::string, std::string> fills) {
    actions.push_back({ActionKind::send_quick_replies, std::move(template_id), std::move(fills), std::move(options)});
    return *this;
}

PlanOutcome& PlanOutcome::ask_media(std::string template_id) {
    actions.push_back({ActionKind::request_media, std::move(template_id), {}, {}});
    return *this;
}

PlanOutcome& PlanOutcome::layer(DialogState state) {
    new_states.push_back({std::move(state), TransitionMode::layer});
    return *this;
}

PlanOutcome& PlanOutcome::replace(DialogState state) {
    new_states.push_back({std::move(state), TransitionMode::replace});
    return *this;
}

PlanOutcome& PlanOutcome::drop(std::string state_name) {
    drop_states.push_back(std::move(state_name));
    return *this;
}

PlanOutcome& PlanOutcome::set_slot(std::string name, std::string value) {
    updates.slots[std::move(name)] = std::move(value);
    return *this;
}

PlanOutcome& PlanOutcome::clear_slot(std::string name) {
    updates.slots[std::move(name)] = std::nullopt;
    return *this;
}

PlanOutcome& PlanOutcome::effect(std::string name) {
    effects.push_back(std::move(name));
    return *this;
}

void apply_updates(UserContext& ctx, const ContextUpdates& updates) {
    for (const auto& [name, value] : updates.slots) {
        if (value) ctx.slots[name] = *value;
        else ctx.slots.erase(name);
    }
    if (updates.formality) ctx.formality = *updates.formality;
    if (updates.mood) ctx.mood = *updates.mood;
    if (updates.user_name) ctx.user_name = *updates.user_name;
}

Handler::Handler(Callback callback) : callback_(std::move(callback)) {
    if (!callback_) throw std::invalid_argument("handler callback empty");
}

Handler& Handler::may_enter(std::initializer_list<std::string> states) {
    transitions_.insert(transitions_.end(), states.begin(), states.end());
    return *this;
}

Handler& Handler::may_render(std::initializer_list<std::string> template_ids) {
    templates_.insert(templates_.end(), template_ids.begin(), template_ids.end());
    return *this;
}

namespace {

template <typename Set>
std::string join_key(const Set& items) {
    std::string out;
    for (const auto& i : items) {
        if (!out.empty()) out += ',';
        out += i;
    }
    return out;
}

}  // namespace

IntentHandler::IntentHandler(std::string intent, Callback callback,
                             std::map<std::string, std::optional<std::string>> required)
    : Handler(std::move(callback)), intent_(std::move(intent)), required_(std::move(required)) {}

bool IntentHandler::matches(const MessageUnderstanding& mu) const {
    if (mu.intent != intent_) return false;
    for (const auto& [param, value] : required_) {
        auto it = mu.parameters.find(param);
        if (it == mu.parameters.end()) return false;
        if (value && it->second != *value) return false;
    }
    return true;
}

std::string IntentHandler::key() const {
    std::string k = intent_;
    for (const auto& [param, value] : required_) {
        k += "[" + param + (value ? "=" + *value : "") + "]";
    }
    return k;
}

AffirmationHandler::AffirmationHandler(Callback callback, std::set<std::string> intents)
    : Handler(std::move(callback)), intents_(std::move(intents)) {}

std::string AffirmationHandler::key() const { return join_key(intents_); }

NegationHandler::NegationHandler(Callback callback, std::set<std::string> intents)
    : Handler(std::move(callback)), intents_(std::move(intents)) {}

std::string NegationHandler::key() const { return join_key(intents_); }

RegexHandler::RegexHandler(std::string pattern, Callback callback)
    : Handler(std::move(callback)),
      pattern_(std::move(pattern)),
      regex_(pattern_, std::regex::ECMAScript | std::regex::icase) {}

bool RegexHandler::matches(const MessageUnderstanding& mu) const {
    return std::regex_search(mu.raw_text, regex_);
}

MediaHandler::MediaHandler(std::set<MediaKind> kinds, Callback callback)
    : Handler(std::move(callback)), kinds_(std::move(kinds)) {}

bool MediaHandler::matches(const MessageUnderstanding& mu) const {
    return mu.media_kind && kinds_.count(*mu.media_kind) != 0;
}

std::string MediaHandler::key() const {
    std::vector<std::string> names;
    for (auto k : kinds_) names.emplace_back(to_string(k));
    return join_key(names);
}

EmojiSentimentHandler::EmojiSentimentHandler(std::set<Sentiment> sentiments, Callback callback)
    : Handler(std::move(callback)), sentiments_(std::move(sentiments)) {}

std::string EmojiSentimentHandler::key() const {
    std::vector<std::string> names;
    for (auto s : sentiments_) names.emplace_back(to_string(s));
    return join_key(names);
}

const std::vector<HandlerPtr>& RuleTable::for_state(std::string_view state) const {
    static const std::vector<HandlerPtr> none;
    auto it = by_state_.find(state);
    return it == by_state_.end() ? none : it->second;
}

bool RuleTable::declares_state(std::string_view state) const {
    return by_state_.find(state) != by_state_.end() || terminal_.count(std::string(state)) != 0;
}

std::vector<std::string> RuleTable::states() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : by_state_) out.push_back(name);
    for (const auto& t : terminal_) {
        if (by_state_.find(t) == by_state_.end()) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

RuleTableBuilder& RuleTableBuilder::stateless(HandlerPtr handler) {
    stateless_.push_back(std::move(handler));
    return *this;
}

RuleTableBuilder& RuleTableBuilder::on_state(const std::string& state, HandlerPtr handler) {
    declared_.insert(state);
    by_state_.emplace_back(state, std::move(handler));
    return *this;
}

RuleTableBuilder& RuleTableBuilder::fallback(HandlerPtr handler) {
    fallbacks_.push_back(std::move(handler));
    return *this;
}

RuleTableBuilder& RuleTableBuilder::declare_state(const std::string& state) {
    declared_.insert(state);
    return *this;
}

RuleTableBuilder& RuleTableBuilder::declare_terminal(const std::string& state) {
    terminal_.insert(state);
    return *this;
}

RuleTableBuilder& RuleTableBuilder::declare_slot(const std::string& slot) {
    slots_.insert(slot);
    return *this;
}

RuleTable RuleTableBuilder::build(const TemplateTable* templates) const {
    if (fallbacks_.empty()) throw RegistrationError("rule table needs at least one fallback handler");

    RuleTable table;
    std::set<std::string> seen;
    auto check = [&](const std::string& scope, const HandlerPtr& h) {
        if (!h) throw RegistrationError(scope + ": null handler");
        if (!seen.insert(scope + "|" + h->id()).second) {
            throw RegistrationError("duplicate handler " + h->id() + " in " + scope);
        }
    };
    for (const auto& h : stateless_) check("stateless", h);
    for (const auto& [state, h] : by_state_) check("state " + state, h);
    for (const auto& h : fallbacks_) check("fallbacks", h);

    table.stateless_ = stateless_;
    table.fallbacks_ = fallbacks_;
    for (const auto& state : declared_) table.by_state_[state];
    for (const auto& [state, h] : by_state_) table.by_state_[state].push_back(h);
    table.terminal_ = terminal_;
    table.slots_ = slots_;

    auto validate = [&](const HandlerPtr& h) {
        for (const auto& target : h->transitions()) {
            if (!table.declares_state(target)) {
                throw RegistrationError("handler " + h->id() + " transitions to undeclared state '" + target + "'");
            }
        }
        if (templates) {
            for (const auto& t : h->templates()) {
                if (!templates->contains(t)) {
                    throw RegistrationError("handler " + h->id() + " renders unknown template '" + t + "'");
                }
            }
        }
    };
    for (const auto& h : stateless_) validate(h);
    for (const auto& [_, h] : by_state_) validate(h);
    for (const auto& h : fallbacks_) validate(h);
    return table;
}

std::string_view to_string(Tier tier) {
    switch (tier) {
        case Tier::stateless: return "stateless";
        case Tier::state: return "state";
        case Tier::fallback: return "fallback";
    }
    return "fallback";
}

namespace {

void merge_into(PlanOutcome& into, PlanOutcome&& from) {
    std::move(from.actions.begin(), from.actions.end(), std::back_inserter(into.actions));
    std::move(from.new_states.begin(), from.new_states.end(), std::back_inserter(into.new_states));
    std::move(from.drop_states.begin(), from.drop_states.end(), std::back_inserter(into.drop_states));
    std::move(from.effects.begin(), from.effects.end(), std::back_inserter(into.effects));
    for (auto& [k, v] : from.updates.slots) into.updates.slots[k] = std::move(v);
    if (from.updates.formality) into.updates.formality = from.updates.formality;
    if (from.updates.mood) into.updates.mood = from.updates.mood;
    if (from.updates.user_name) into.updates.user_name = std::move(from.updates.user_name);
}

}  // namespace

DispatchResult dispatch(const UserContext& ctx, const MessageUnderstanding& mu, const RuleTable& table) {
    DispatchResult result;
    UserContext view = ctx;

    for (const auto& h : table.stateless()) {
        if (!h->matches(mu)) continue;
        PlanOutcome out = h->fire(view, mu);
        apply_updates(view, out.updates);
        for (auto& t : out.new_states) t.mode = TransitionMode::layer;
        result.fired.push_back({Tier::stateless, "", h->id()});
        merge_into(result.outcome, std::move(out));
    }

    for (const auto& state : ctx.states.states()) {
        for (const auto& h : table.for_state(state.name)) {
            if (!h->matches(mu)) continue;
            PlanOutcome out = h->fire(view, mu);
            bool replaces = false;
            for (auto& t : out.new_states) {
                if (t.mode == TransitionMode::replace) replaces = true;
                t.mode = TransitionMode::layer;
            }
            if (replaces) out.drop_states.insert(out.drop_states.begin(), state.name);
            result.fired.push_back({Tier::state, state.name, h->id()});
            result.consumed_by_state = state.name;
            merge_into(result.outcome, std::move(out));
            return result;
        }
    }

    for (const auto& h : table.fallbacks()) {
        if (!h->matches(mu)) continue;
        PlanOutcome out = h->fire(view, mu);
        for (auto& t : out.new_states) t.mode = TransitionMode::layer;
        result.fired.push_back({Tier::fallback, "", h->id()});
        merge_into(result.outcome, std::move(out));
        return result;
    }

    throw NoHandlerMatched("no handler matched intent '" + mu.intent + "'");
}

void apply_transitions(StateQueue& queue, const PlanOutcome& outcome, const RuleTable& table) {
    for (const auto& name : outcome.drop_states) queue.remove(name);
    for (const auto& t : outcome.new_states) {
        if (!table.declares_state(t.state.name)) {
            throw RegistrationError("transition to undeclared state '" + t.state.name + "'");
        }
        queue.push(t.state);
    }
}

}  // namespace convo
