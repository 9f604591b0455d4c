#pragma once

// Scripted conversations replayed against a fresh bot, for regression
// testing and dialog metrics.
//
// Script file:
//   {"name": "happy_path", "persona": "...", "language": "en",
//    "start": "2026-10-16T09:00:00Z", "turn_seconds": 30, "seed": 0,
//    "expect_completion": true,
//    "turns": [
//      {"text": "my phone broke",
//       "expect": {"intent": "phone_broken", "states_active": [...], "states_absent": [...],
//                  "slots": {"damage_type": "display_damage"}, "formality": "informal",
//                  "templates": [...],
//                  "actions": [ ...golden chat actions... ]}},
//      {"quick_reply": "iphone_8"},
//      {"media": {"kind": "image", "uri": "..."}}]}

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "convo/bot.hpp"

namespace convo {

struct TurnExpectation {
    std::optional<std::string> intent;
    std::vector<std::string> states_active;
    std::vector<std::string> states_absent;
    std::map<std::string, std::string> slots;
    std::optional<std::string> formality;  // "formal" or "informal"
    std::optional<std::vector<std::string>> templates;
    // Golden output for exact mode.
    std::optional<std::vector<ChatAction>> actions;
};

struct ScriptTurn {
    Payload payload;
    TurnExpectation expect;
};

struct ReplayScript {
    std::string name;
    std::string persona;
    std::string language = "en";
    Timestamp start{};
    int turn_seconds = 30;
    std::uint64_t seed = 0;
    bool expect_completion = false;
    // A turn rendering this template completes the task.
    std::string completion_template = "claim_submitted";
    std::vector<ScriptTurn> turns;
};

class ScriptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ReplayScript script_from_json(const Json& j);
Json to_json(const ReplayScript& script);
ReplayScript load_script(const std::filesystem::path& path);
/// Every *.json file of a directory, sorted by file name.
std::vector<ReplayScript> load_suite(const std::filesystem::path& dir);

enum class ReplayMode {
    exact,      // actions must equal the golden actions byte for byte
    predicate,  // intent, states, slots and templates only; text may vary
};

std::string_view to_string(ReplayMode mode);
std::optional<ReplayMode> replay_mode_from_string(std::string_view s);

struct ScriptReport {
    std::string name;
    std::string persona;
    bool passed = true;
    bool completed = false;
    std::size_t turns = 0;
    std::optional<std::size_t> turns_to_completion;
    std::size_t fallback_turns = 0;
    std::size_t errors = 0;
    std::vector<std::string> failures;
    Transcript transcript;
};

struct SuiteReport {
    ReplayMode mode = ReplayMode::predicate;
    std::vector<ScriptReport> scripts;

    bool passed() const;
};

struct SuiteMetrics {
    double completion_rate = 0.0;
    // Mean over completed scripts; 0 when none completed.
    double mean_turns_to_completion = 0.0;
    double fallback_rate = 0.0;
    std::size_t passed = 0;
};

/// Throws std::invalid_argument for an empty report.
SuiteMetrics report_metrics(const SuiteReport& report);

/// Deterministic report JSON (no timings); transcripts only when asked for.
Json to_json(const SuiteReport& report, bool with_transcripts = false);

/// Replays one script against a fresh in-memory bot built from `base`
/// (language and seed come from the script).
ScriptReport run_script(const ReplayScript& script, const BotConfig& base, ReplayMode mode);
SuiteReport run_suite(const std::vector<ReplayScript>& scripts, const BotConfig& base, ReplayMode mode);

/// Replays the script and stores the produced actions, templates, intent and
/// active states as the new expectations.
ReplayScript record_script(const ReplayScript& script, const BotConfig& base);

}  // namespace convo
