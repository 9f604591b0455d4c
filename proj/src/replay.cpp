#include "convo/replay.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace convo {

namespace {

Payload turn_payload(const Json& t) {
    int kinds = 0;
    for (const char* k : {"text", "quick_reply", "media", "voice"}) kinds += t.contains(k) ? 1 : 0;
    if (kinds != 1) throw ScriptError("turn needs exactly one of text, quick_reply, media, voice");
    if (t.contains("text")) return TextPayload{t.at("text").get<std::string>()};
    if (t.contains("quick_reply")) return QuickReplyPayload{t.at("quick_reply").get<std::string>()};
    const bool voice = t.contains("voice");
    const Json& m = voice ? t.at("voice") : t.at("media");
    auto kind = media_kind_from_string(m.at("kind").get<std::string>());
    if (!kind) throw ScriptError("unknown media kind " + m.at("kind").dump());
    MediaRef ref{*kind, m.value("uri", "")};
    if (voice) return VoicePayload{ref};
    return MediaPayload{ref};
}

Json turn_payload_json(const Payload& p) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TextPayload>) {
                return Json{{"text", v.text}};
            } else if constexpr (std::is_same_v<T, QuickReplyPayload>) {
                return Json{{"quick_reply", v.option_id}};
            } else if constexpr (std::is_same_v<T, MediaPayload>) {
                return Json{{"media", {{"kind", to_string(v.media.kind)}, {"uri", v.media.uri}}}};
            } else {
                return Json{{"voice", {{"kind", to_string(v.media.kind)}, {"uri", v.media.uri}}}};
            }
        },
        p);
}

TurnExpectation expectation_from_json(const Json& e) {
    TurnExpectation x;
    if (e.contains("intent")) x.intent = e.at("intent").get<std::string>();
    x.states_active = e.value("states_active", std::vector<std::string>{});
    x.states_absent = e.value("states_absent", std::vector<std::string>{});
    x.slots = e.value("slots", std::map<std::string, std::string>{});
    if (e.contains("formality")) {
        x.formality = e.at("formality").get<std::string>();
        if (!formality_level_from_string(*x.formality)) throw ScriptError("unknown formality '" + *x.formality + "'");
    }
    if (e.contains("templates")) x.templates = e.at("templates").get<std::vector<std::string>>();
    if (e.contains("actions")) {
        std::vector<ChatAction> actions;
        for (const auto& a : e.at("actions")) actions.push_back(action_from_json(a));
        x.actions = std::move(actions);
    }
    return x;
}

Json to_json(const TurnExpectation& x) {
    Json e = Json::object();
    if (x.intent) e["intent"] = *x.intent;
    if (!x.states_active.empty()) e["states_active"] = x.states_active;
    if (!x.states_absent.empty()) e["states_absent"] = x.states_absent;
    if (!x.slots.empty()) e["slots"] = x.slots;
    if (x.formality) e["formality"] = *x.formality;
    if (x.templates) e["templates"] = *x.templates;
    if (x.actions) {
        e["actions"] = Json::array();
        for (const auto& a : *x.actions) e["actions"].push_back(to_json(a));
    }
    return e;
}

}  // namespace

ReplayScript script_from_json(const Json& j) {
    try {
        ReplayScript s;
        s.name = j.at("name").get<std::string>();
        s.persona = j.value("persona", "");
        s.language = j.value("language", "en");
        auto start = parse_timestamp(j.value("start", "2026-01-01T09:00:00Z"));
        if (!start) throw ScriptError("bad start timestamp");
        s.start = *start;
        s.turn_seconds = j.value("turn_seconds", 30);
        s.seed = j.value("seed", std::uint64_t{0});
        s.expect_completion = j.value("expect_completion", false);
        s.completion_template = j.value("completion_template", s.completion_template);
        for (const auto& t : j.at("turns")) {
            ScriptTurn turn{turn_payload(t), {}};
            if (t.contains("expect")) turn.expect = expectation_from_json(t.at("expect"));
            s.turns.push_back(std::move(turn));
        }
        if (s.turns.empty()) throw ScriptError("script has no turns");
        return s;
    } catch (const ScriptError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScriptError(e.what());
    }
}

Json to_json(const ReplayScript& s) {
    Json j{{"name", s.name},
           {"persona", s.persona},
           {"language", s.language},
           {"start", format_timestamp(s.start)},
           {"turn_seconds", s.turn_seconds},
           {"seed", s.seed},
           {"expect_completion", s.expect_completion},
           {"completion_template", s.completion_template},
           {"turns", Json::array()}};
    for (const auto& t : s.turns) {
        Json tj = turn_payload_json(t.payload);
        Json e = to_json(t.expect);
        if (!e.empty()) tj["expect"] = std::move(e);
        j["turns"].push_back(std::move(tj));
    }
    return j;
}

ReplayScript load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError("cannot open script " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Json j = Json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw ScriptError(path.string() + ": malformed JSON");
    try {
        return script_from_json(j);
    } catch (const ScriptError& e) {
        throw ScriptError(path.filename().string() + ": " + e.what());
    }
}

std::vector<ReplayScript> load_suite(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ReplayScript> out;
    for (const auto& f : files) out.push_back(load_script(f));
    return out;
}

std::string_view to_string(ReplayMode mode) { return mode == ReplayMode::exact ? "exact" : "predicate"; }

std::optional<ReplayMode> replay_mode_from_string(std::string_view s) {
    if (s == "exact") return ReplayMode::exact;
    if (s == "predicate") return ReplayMode::predicate;
    return std::nullopt;
}

bool SuiteReport::passed() const {
    return std::all_of(scripts.begin(), scripts.end(), [](const auto& s) { return s.passed; });
}

SuiteMetrics report_metrics(const SuiteReport& report) {
    if (report.scripts.empty()) throw std::invalid_argument("metrics of an empty replay report");
    SuiteMetrics m;
    std::size_t completed = 0, turns = 0, fallbacks = 0, completion_turns = 0;
    for (const auto& s : report.scripts) {
        if (s.passed) ++m.passed;
        turns += s.turns;
        fallbacks += s.fallback_turns;
        if (s.completed) {
            ++completed;
            completion_turns += *s.turns_to_completion;
        }
    }
    m.completion_rate = static_cast<double>(completed) / static_cast<double>(report.scripts.size());
    m.mean_turns_to_completion = completed ? static_cast<double>(completion_turns) / static_cast<double>(completed) : 0.0;
    m.fallback_rate = turns ? static_cast<double>(fallbacks) / static_cast<double>(turns) : 0.0;
    return m;
}

Json to_json(const SuiteReport& report, bool with_transcripts) {
    Json scripts = Json::array();
    for (const auto& s : report.scripts) {
        Json j{{"name", s.name},
               {"persona", s.persona},
               {"passed", s.passed},
               {"completed", s.completed},
               {"turns", s.turns},
               {"turns_to_completion", s.turns_to_completion ? Json(*s.turns_to_completion) : Json(nullptr)},
               {"fallback_turns", s.fallback_turns},
               {"errors", s.errors},
               {"failures", s.failures}};
        if (with_transcripts) {
            j["transcript"] = Json::array();
            for (const auto& e : s.transcript) j["transcript"].push_back(to_json(e));
        }
        scripts.push_back(std::move(j));
    }
    Json out{{"mode", to_string(report.mode)}, {"scripts", std::move(scripts)}};
    if (!report.scripts.empty()) {
        const auto m = report_metrics(report);
        out["summary"] = {{"scripts", report.scripts.size()},
                          {"passed", m.passed},
                          {"completion_rate", m.completion_rate},
                          {"mean_turns_to_completion", m.mean_turns_to_completion},
                          {"fallback_rate", m.fallback_rate}};
    }
    return out;
}

namespace {

BotConfig config_for(const ReplayScript& script, BotConfig base) {
    base.language = script.language;
    base.seed = script.seed;
    // Per-language defaults apply unless the base pins explicit files.
    return base;
}

struct Replayer {
    Replayer(const ReplayScript& script, const BotConfig& base)
        : bot(config_for(script, base), std::make_shared<MemoryStore>(), std::make_shared<claim::MemoryClaimStore>()) {}

    Bot bot;
};

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

void check_turn(const TurnExpectation& x, const StepResult& r, ReplayMode mode, std::vector<std::string>& fails,
                const std::string& at) {
    if (x.intent && r.trace.understanding.intent != *x.intent) {
        fails.push_back(at + ": intent " + r.trace.understanding.intent + ", expected " + *x.intent);
    }
    for (const auto& s : x.states_active) {
        if (!r.context.states.contains(s)) fails.push_back(at + ": state " + s + " not active");
    }
    for (const auto& s : x.states_absent) {
        if (r.context.states.contains(s)) fails.push_back(at + ": state " + s + " unexpectedly active");
    }
    for (const auto& [k, v] : x.slots) {
        auto got = r.context.slot(k);
        if (!got) fails.push_back(at + ": slot " + k + " unset, expected " + v);
        else if (*got != v) fails.push_back(at + ": slot " + k + " = " + *got + ", expected " + v);
    }
    if (x.formality && to_string(r.context.formality.level) != *x.formality) {
        fails.push_back(at + ": formality " + std::string(to_string(r.context.formality.level)) + ", expected " +
                        *x.formality);
    }
    if (x.templates && r.trace.templates != *x.templates) {
        fails.push_back(at + ": templates [" + join(r.trace.templates) + "], expected [" + join(*x.templates) + "]");
    }
    if (mode == ReplayMode::exact) {
        if (!x.actions) {
            fails.push_back(at + ": no golden actions recorded");
        } else if (encode_actions(r.actions) != encode_actions(*x.actions)) {
            fails.push_back(at + ": actions differ: got " + encode_actions(r.actions));
        }
    }
}

InboundMessage message_for(const ReplayScript& script, std::size_t i) {
    return {{"replay", script.name},
            script.name + "-" + std::to_string(i + 1),
            script.start + std::chrono::seconds(static_cast<long long>(script.turn_seconds) * static_cast<long long>(i)),
            script.turns[i].payload};
}

}  // namespace

ScriptReport run_script(const ReplayScript& script, const BotConfig& base, ReplayMode mode) {
    ScriptReport rep;
    rep.name = script.name;
    rep.persona = script.persona;
    Replayer r(script, base);
    for (std::size_t i = 0; i < script.turns.size(); ++i) {
        const auto msg = message_for(script, i);
        const auto result = r.bot.handle(msg);
        ++rep.turns;
        rep.transcript.push_back({Direction::user, msg.payload});
        for (const auto& a : result.actions) rep.transcript.push_back({Direction::bot, a});
        if (result.trace.understanding.is_fallback() && !result.trace.understanding.media_kind) ++rep.fallback_turns;
        if (result.trace.error) {
            ++rep.errors;
            rep.failures.push_back("turn " + std::to_string(i + 1) + ": pipeline error: " + result.trace.error_message);
        }
        check_turn(script.turns[i].expect, result, mode, rep.failures, "turn " + std::to_string(i + 1));
        const auto& t = result.trace.templates;
        if (!rep.completed && std::find(t.begin(), t.end(), script.completion_template) != t.end()) {
            rep.completed = true;
            rep.turns_to_completion = i + 1;
        }
    }
    if (script.expect_completion && !rep.completed) rep.failures.push_back("task not completed");
    rep.passed = rep.failures.empty();
    return rep;
}

SuiteReport run_suite(const std::vector<ReplayScript>& scripts, const BotConfig& base, ReplayMode mode) {
    SuiteReport report;
    report.mode = mode;
    for (const auto& s : scripts) report.scripts.push_back(run_script(s, base, mode));
    return report;
}

ReplayScript record_script(const ReplayScript& script, const BotConfig& base) {
    ReplayScript out = script;
    Replayer r(script, base);
    for (std::size_t i = 0; i < script.turns.size(); ++i) {
        const auto result = r.bot.handle(message_for(script, i));
        auto& x = out.turns[i].expect;
        x.intent = result.trace.understanding.intent;
        x.templates = result.trace.templates;
        x.actions = result.actions;
    }
    return out;
}

}  // namespace convo
