#include <doctest.h>

#include <fstream>

#include "convo/replay.hpp"
#include "support/helpers.hpp"

using namespace convo;

namespace {

ReplayScript tiny() {
    return script_from_json(Json::parse(R"({
      "name": "tiny", "persona": "says hi, asks for a joke", "language": "en",
      "start": "2026-10-16T09:00:00Z",
      "turns": [
        {"text": "Hi", "expect": {"intent": "greeting", "templates": ["greeting", "offer_help"]}},
        {"text": "tell me a joke", "expect": {"intent": "joke", "states_absent": ["ASK_IMEI"]}}
      ]})"));
}

// Rewrites every template string of a table file, keeping ids and placeholders.
std::filesystem::path edited_templates(const testing::TempDir& dir, const std::string& lang) {
    std::ifstream in(testing::data_dir() / lang / "templates.json");
    Json j = Json::parse(in);
    for (auto& t : j["templates"]) {
        for (const char* key : {"text", "formal", "informal"}) {
            if (!t.contains(key)) continue;
            for (auto& v : t[key]) v = "[edited] " + v.get<std::string>();
        }
    }
    const auto path = dir.path() / (lang + "-templates.json");
    std::ofstream(path) << j.dump(2);
    return path;
}

}  // namespace

TEST_CASE("script parsing") {
    const auto s = tiny();
    CHECK(s.turns.size() == 2);
    CHECK(s.turn_seconds == 30);
    CHECK_FALSE(s.expect_completion);
    CHECK(std::get<TextPayload>(s.turns[0].payload).text == "Hi");
    CHECK(script_from_json(to_json(s)).turns.size() == 2);
    CHECK_THROWS_AS(script_from_json(Json::parse(R"({"name": "x", "turns": []})")), ScriptError);
    CHECK_THROWS_AS(script_from_json(Json::parse(R"({"name": "x", "turns": [{"wave": true}]})")), ScriptError);
    CHECK_THROWS_AS(script_from_json(Json::parse(R"({"name": "x", "turns": [{"text": "a", "expect": {"formality": "posh"}}]})")),
                    ScriptError);
    const auto media = script_from_json(Json::parse(
        R"({"name": "m", "turns": [{"media": {"kind": "image", "uri": "u"}}, {"quick_reply": "theft"}, {"voice": {"kind": "audio", "uri": "v.ogg"}}]})"));
    CHECK(std::holds_alternative<MediaPayload>(media.turns[0].payload));
    CHECK(std::holds_alternative<QuickReplyPayload>(media.turns[1].payload));
    CHECK(std::holds_alternative<VoicePayload>(media.turns[2].payload));
}

TEST_CASE("predicate replay reports per-turn failures") {
    auto s = tiny();
    auto report = run_script(s, testing::bot_config(), ReplayMode::predicate);
    CHECK(report.passed);
    CHECK(report.turns == 2);
    CHECK_FALSE(report.completed);

    s.turns[1].expect.intent = "goodbye";
    s.turns[1].expect.states_active = {"ASK_IMEI"};
    report = run_script(s, testing::bot_config(), ReplayMode::predicate);
    CHECK_FALSE(report.passed);
    CHECK(report.failures.size() == 2);
}

TEST_CASE("exact mode needs golden actions") {
    auto report = run_script(tiny(), testing::bot_config(), ReplayMode::exact);
    CHECK_FALSE(report.passed);
    const auto recorded = record_script(tiny(), testing::bot_config());
    REQUIRE(recorded.turns[0].expect.actions);
    CHECK(run_script(recorded, testing::bot_config(), ReplayMode::exact).passed);
}

TEST_CASE("template copy edits break exact mode only") {
    testing::TempDir dir("edit");
    const auto suite = load_suite(testing::fixtures_dir() / "personas");
    REQUIRE(suite.size() == 14);
    auto en = testing::bot_config("en");
    en.templates_path = edited_templates(dir, "en");
    std::vector<ReplayScript> english;
    for (const auto& s : suite) {
        if (s.language == "en") english.push_back(s);
    }
    REQUIRE_FALSE(english.empty());
    CHECK(run_suite(english, en, ReplayMode::predicate).passed());
    CHECK_FALSE(run_suite(english, en, ReplayMode::exact).passed());
}

TEST_CASE("golden suite: complete, deterministic") {
    const auto suite = load_suite(testing::fixtures_dir() / "personas");
    const auto a = run_suite(suite, testing::bot_config(), ReplayMode::exact);
    const auto b = run_suite(suite, testing::bot_config(), ReplayMode::exact);
    CHECK(a.passed());
    CHECK(to_json(a, true).dump() == to_json(b, true).dump());
    const auto m = report_metrics(a);
    CHECK(m.completion_rate == 1.0);
    CHECK(m.passed == 14);
    CHECK(m.mean_turns_to_completion > 0.0);
}

TEST_CASE("metrics arithmetic") {
    SuiteReport r;
    CHECK_THROWS_AS(report_metrics(r), std::invalid_argument);
    for (int i = 0; i < 14; ++i) {
        ScriptReport s;
        s.name = "s" + std::to_string(i);
        s.turns = 10;
        s.completed = i != 0;
        s.passed = i != 0;
        if (s.completed) s.turns_to_completion = 8;
        s.fallback_turns = i % 2;
        r.scripts.push_back(s);
    }
    const auto m = report_metrics(r);
    CHECK(m.completion_rate == doctest::Approx(13.0 / 14.0));
    CHECK(m.completion_rate == doctest::Approx(0.929).epsilon(0.001));
    CHECK(m.mean_turns_to_completion == doctest::Approx(8.0));
    CHECK(m.fallback_rate == doctest::Approx(7.0 / 140.0));
    CHECK(m.passed == 13);
    CHECK_FALSE(r.passed());
}

TEST_CASE("replay mode names") {
    CHECK(replay_mode_from_string("exact") == ReplayMode::exact);
    CHECK(replay_mode_from_string(to_string(ReplayMode::predicate)) == ReplayMode::predicate);
    CHECK_FALSE(replay_mode_from_string("fuzzy"));
}
