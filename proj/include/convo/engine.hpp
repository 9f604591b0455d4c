#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "convo/context.hpp"
#include "convo/dialog.hpp"
#include "convo/nlu.hpp"
#include "convo/respond.hpp"

namespace convo {

/// Turns planned actions into concrete chat actions for one user.
class Responder {
public:
    explicit Responder(std::shared_ptr<const TemplateSource> templates) : templates_(std::move(templates)) {}
    explicit Responder(std::shared_ptr<const TemplateTable> table)
        : templates_(std::make_shared<TemplateSource>(std::move(table))) {}

    /// Every rendered action carries its template id in metadata["template"].
    ChatAction realize(const PlannedAction& action, const UserContext& ctx, std::uint64_t seed) const;

    std::shared_ptr<const TemplateTable> table() const { return templates_->current(); }

private:
    std::shared_ptr<const TemplateSource> templates_;
};

/// Host-side executor for the named effects a plan may request. Returned
/// fills become available to every action rendered in the same turn.
class EffectRunner {
public:
    virtual ~EffectRunner() = default;
    virtual std::map<std::string, std::string> run(const std::string& effect, const UserContext& ctx,
                                                   const InboundMessage& inbound) = 0;
};

/// Optional speech-to-text hook for voice payloads.
using Transcriber = std::function<std::optional<std::string>(const MediaRef&)>;

struct StepOptions {
    std::uint64_t seed = 0;
    std::size_t history_limit = UserContext::kDefaultHistoryLimit;
    Transcriber transcriber;
    // Template rendered when the pipeline throws.
    std::string error_template = "error_repair";
};

struct TurnTrace {
    MessageUnderstanding understanding;
    std::vector<FiredHandler> fired;
    std::vector<std::string> templates;
    std::vector<std::string> effects;
    bool error = false;
    std::string error_message;
};

struct StepResult {
    UserContext context;
    std::vector<ChatAction> actions;
    TurnTrace trace;
};

/// One full turn: understand, tick lifetimes, dispatch, apply updates and
/// transitions, run effects, render. The first action is always a typing
/// notification. On any failure the state queue is left unchanged and an
/// apologetic repair message is returned instead.
StepResult step(UserContext ctx, const InboundMessage& inbound, const Understander& nlu, const RuleTable& table,
                const Responder& responder, EffectRunner* effects = nullptr, const StepOptions& options = {});

/// Understanding for any payload kind.
MessageUnderstanding understand_payload(const Payload& payload, Date reference, const Understander& nlu,
                                        const Transcriber& transcriber = {});

}  // namespace convo
