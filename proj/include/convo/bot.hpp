#pragma once

// A ready-to-run claim bot: catalog, rules, templates and stores wired
// together, with per-user serialization of turns.

#include <array>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "convo/claimbot.hpp"
#include "convo/context_store.hpp"
#include "convo/engine.hpp"

namespace convo {

struct BotConfig {
    std::filesystem::path data_dir;
    std::string language = "en";
    // Override the per-language defaults under data_dir.
    std::optional<std::filesystem::path> catalog_path;
    std::optional<std::filesystem::path> templates_path;
    bool reload_templates = false;
    std::uint64_t seed = 0;
    std::size_t history_limit = UserContext::kDefaultHistoryLimit;

    std::filesystem::path catalog_file() const;
    std::filesystem::path templates_file() const;
};

/// Loads catalog, templates and scenario, and checks them against each other.
/// Throws on the first inconsistency.
class Bot {
public:
    Bot(const BotConfig& config, std::shared_ptr<ContextStore> contexts, std::shared_ptr<claim::ClaimStore> claims);

    /// One turn for the message's user: load, step, save. Turns of the same
    /// user never overlap. Throws VersionConflict if another process saved
    /// the same context in between.
    StepResult handle(const InboundMessage& msg);

    const Catalog& catalog() const noexcept { return *catalog_; }
    const RuleTable& rules() const noexcept { return rules_; }
    const Responder& responder() const noexcept { return responder_; }
    const claim::Scenario& scenario() const noexcept { return *scenario_; }
    ContextStore& contexts() noexcept { return *contexts_; }
    claim::ClaimStore& claims() noexcept { return *claims_; }
    const StepOptions& options() const noexcept { return options_; }
    void set_transcriber(Transcriber t) { options_.transcriber = std::move(t); }

private:
    std::mutex& gate_for(const UserKey& key);

    std::shared_ptr<const Catalog> catalog_;
    CatalogUnderstander nlu_;
    std::shared_ptr<const claim::Scenario> scenario_;
    Responder responder_;
    RuleTable rules_;
    std::shared_ptr<ContextStore> contexts_;
    std::shared_ptr<claim::ClaimStore> claims_;
    claim::ClaimEffects effects_;
    StepOptions options_;
    std::array<std::mutex, 64> gates_;
};

}  // namespace convo
