#include "convo/engine.hpp"

namespace convo {

ChatAction Responder::realize(const PlannedAction& action, const UserContext& ctx, std::uint64_t seed) const {
    auto table = templates_->current();
    std::map<std::string, std::string> fills = action.fills;
    if (ctx.user_name) fills.try_emplace("user_name", *ctx.user_name);

    std::string text = table->render(action.template_id, ctx.formality.level, fills, seed);
    const auto* tmpl = table->find(action.template_id);
    if (tmpl && tmpl->repair && ctx.mood == Sentiment::negative && table->contains("empathy_prefix")) {
        text = table->render("empathy_prefix", ctx.formality.level, fills, seed) + " " + text;
    }

    ChatAction out;
    out.kind = action.kind;
    out.text = std::move(text);
    out.options = action.options;
    out.metadata["template"] = action.template_id;
    validate(out);
    return out;
}

MessageUnderstanding understand_payload(const Payload& payload, Date reference, const Understander& nlu,
                                        const Transcriber& transcriber) {
    return std::visit(
        [&](const auto& p) -> MessageUnderstanding {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TextPayload>) {
                return nlu.understand(p.text, reference);
            } else if constexpr (std::is_same_v<T, QuickReplyPayload>) {
                return understand_option(p.option_id, reference);
            } else if constexpr (std::is_same_v<T, VoicePayload>) {
                if (transcriber) {
                    if (auto text = transcriber(p.media); text && !trim(*text).empty()) {
                        return nlu.understand(*text, reference);
                    }
                }
                return understand_media(MediaKind::audio, reference);
            } else {
                return understand_media(p.media.kind, reference);
            }
        },
        payload);
}

namespace {

std::string summarize_user(const MessageUnderstanding& mu) {
    std::string s = "intent=" + mu.intent;
    for (const auto& [k, v] : mu.parameters) s += " " + k;
    return s;
}

}  // namespace

StepResult step(UserContext ctx, const InboundMessage& inbound, const Understander& nlu, const RuleTable& table,
                const Responder& responder, EffectRunner* effects, const StepOptions& options) {
    StepResult result;
    result.actions.push_back(ChatAction::typing());
    const std::uint64_t seed = options.seed ^ (ctx.turn * 0x9E3779B97F4A7C15ULL);
    const UserContext before = ctx;

    try {
        validate(inbound);
        const Date reference = date_of(inbound.timestamp);
        auto mu = understand_payload(inbound.payload, reference, nlu, options.transcriber);
        result.trace.understanding = mu;

        ctx.mood = mu.sentiment;
        ctx.states.tick(mu.intent);

        auto dispatched = dispatch(ctx, mu, table);
        result.trace.fired = dispatched.fired;
        auto& outcome = dispatched.outcome;

        for (const auto& [slot, _] : outcome.updates.slots) {
            if (!table.declares_slot(slot)) throw RegistrationError("write to undeclared slot '" + slot + "'");
        }
        apply_updates(ctx, outcome.updates);
        apply_transitions(ctx.states, outcome, table);

        std::map<std::string, std::string> effect_fills;
        for (const auto& name : outcome.effects) {
            if (!effects) throw std::runtime_error("plan requested effect '" + name + "' but no effect runner is set");
            for (auto& [k, v] : effects->run(name, ctx, inbound)) effect_fills[k] = std::move(v);
            result.trace.effects.push_back(name);
        }

        std::vector<ChatAction> rendered;
        std::uint64_t n = 0;
        for (auto planned : outcome.actions) {
            for (const auto& [k, v] : effect_fills) planned.fills.try_emplace(k, v);
            rendered.push_back(responder.realize(planned, ctx, seed + n++));
            result.trace.templates.push_back(planned.template_id);
        }
        std::move(rendered.begin(), rendered.end(), std::back_inserter(result.actions));

        ctx.remember({inbound.timestamp, Direction::user, summarize_user(mu)}, options.history_limit);
        for (const auto& t : result.trace.templates) {
            ctx.remember({inbound.timestamp, Direction::bot, "template=" + t}, options.history_limit);
        }
    } catch (const std::exception& e) {
        ctx = before;
        result.trace.error = true;
        result.trace.error_message = e.what();
        result.trace.templates.clear();
        ChatAction repair;
        try {
            repair = responder.realize({ActionKind::send_text, options.error_template, {}, {}}, ctx, seed);
        } catch (const std::exception&) {
            repair = ChatAction::say("Sorry, something went wrong on my side. Please try again.");
            repair.metadata["template"] = options.error_template;
        }
        result.actions.resize(1);
        result.actions.push_back(std::move(repair));
        result.trace.templates.push_back(options.error_template);
        ctx.remember({inbound.timestamp, Direction::user, "error"}, options.history_limit);
    }

    ++ctx.turn;
    result.context = std::move(ctx);
    return result;
}

}  // namespace convo
