// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "convo/bot.hpp"
#include "convo/channels.hpp"
#include "convo/imei.hpp"
#include "convo/replay.hpp"
#include "oracles/calendar_oracle.hpp"
#include "oracles/luhn_oracle.hpp"
#include "oracles/queue_oracle.hpp"
#include "support/dispatch_fixtures.hpp"
#include "support/helpers.hpp"

using namespace convo;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool passed;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream s;
    s.precision(digits);
    s << std::fixed << v;
    return s.str();
}

// ---------------------------------------------------------------------------

Verdict task_completion() {
    constexpr double kMaxSeconds = 5.0;
    const auto t0 = Clock::now();
    const auto suite = load_suite(testing::fixtures_dir() / "personas");
    const auto report = run_suite(suite, testing::bot_config(), ReplayMode::exact);
    const double elapsed = seconds_since(t0);
    const auto m = report_metrics(report);
    std::size_t completed = 0;
    for (const auto& s : report.scripts) completed += s.completed ? 1 : 0;
    const bool ok = suite.size() == 14 && m.completion_rate == 1.0 && report.passed() && elapsed < kMaxSeconds;
    return {ok, std::to_string(completed) + "/" + std::to_string(suite.size()) + " completed, " +
                    std::to_string(m.passed) + " passed exact, rate " + fmt(m.completion_rate) + ", " +
                    fmt(elapsed) + " s (limit " + fmt(kMaxSeconds, 1) + " s)"};
}

// ---------------------------------------------------------------------------

bool queue_matches(const StateQueue& q, const oracle::QueueSim& sim) {
    const auto want = sim.ordered();
    const auto got = q.states();
    if (want.size() != got.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const auto& [name, remaining, priority] = want[i];
        if (got[i].name != name || got[i].lifetime != remaining || got[i].priority != priority) return false;
    }
    return true;
}

Verdict lifetime_oracle() {
    constexpr int kTrials = 1000;
    std::mt19937_64 rng(20261016);
    const std::vector<std::string> names = {"ASK_DAMAGE_TYPE", "ASK_IMEI", "CLARIFY_PHONE_MODEL",
                                            "USER_CONFIRMING_ANSWER", "CONFIRM_SUBMISSION", "CHOOSE_CORRECTION"};
    const std::vector<std::string> intents = {std::string(kFallbackIntent), "affirm", "deny", "give_number",
                                              std::string(kOptionSelectedIntent), "joke"};
    std::size_t steps = 0, fallback_steps = 0;
    for (int trial = 0; trial < kTrials; ++trial) {
        StateQueue q;
        oracle::QueueSim sim;
        auto random_push = [&] {
            const auto& name = names[rng() % names.size()];
            const int priority = static_cast<int>(rng() % 4) * 10;
            std::optional<int> life;
            if (rng() % 4) life = 1 + static_cast<int>(rng() % 5);
            q.push({name, life, priority, {}});
            sim.push(name, life, priority);
        };
        const int initial = static_cast<int>(rng() % 6);
        for (int i = 0; i < initial; ++i) random_push();
        if (!queue_matches(q, sim)) return {false, "initial queue differs in trial " + std::to_string(trial)};

        const int length = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < length; ++i) {
            const auto& intent = intents[rng() % intents.size()];
            q = tick_lifetimes(q, intent);
            sim.turn(intent);
            ++steps;
            fallback_steps += intent == kFallbackIntent ? 1 : 0;
            if (!queue_matches(q, sim) || !q.valid()) {
                return {false, "trial " + std::to_string(trial) + " step " + std::to_string(i) + " (" + intent + ")"};
            }
            if (rng() % 3 == 0) {
                random_push();
                if (!queue_matches(q, sim)) return {false, "push diverged in trial " + std::to_string(trial)};
            }
        }
    }
    return {true, std::to_string(kTrials) + " trials, " + std::to_string(steps) + " steps (" +
                      std::to_string(fallback_steps) + " fallback), all equal"};
}

// ---------------------------------------------------------------------------

Verdict dispatch_ordering() {
    const std::pair<const char*, std::function<std::string()>> cases[] = {
        {"a", fixtures::stateless_merges_with_state},
        {"b", fixtures::fallback_only_when_no_state_matches},
        {"c", fixtures::higher_priority_state_wins},
    };
    std::string detail;
    bool ok = true;
    for (const auto& [id, check] : cases) {
        std::string problem;
        try {
            problem = check();
        } catch (const std::exception& e) {
            problem = std::string("threw: ") + e.what();
        }
        if (!problem.empty()) ok = false;
        detail += std::string(detail.empty() ? "" : ", ") + "(" + id + ") " + (problem.empty() ? "ok" : problem);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------------------

Verdict imei_oracle() {
    constexpr int kRandom = 10000;
    constexpr int kValid = 100;
    std::mt19937_64 rng(490154203237518ULL);
    auto digits = [&](std::size_t n) {
        std::string s(n, '0');
        for (auto& c : s) c = static_cast<char>('0' + rng() % 10);
        return s;
    };
    std::size_t checked = 0, valid_seen = 0, disagreements = 0;
    for (int i = 0; i < kRandom; ++i) {
        const auto s = digits(15);
        const bool want = oracle::imei(s);
        valid_seen += want ? 1 : 0;
        disagreements += validate_imei(s) != want ? 1 : 0;
        ++checked;
    }
    std::size_t perturbations = 0;
    for (int i = 0; i < kValid; ++i) {
        const auto imei = oracle::complete_imei(digits(14));
        disagreements += validate_imei(imei) != oracle::imei(imei) ? 1 : 0;
        ++checked;
        for (std::size_t pos = 0; pos < imei.size(); ++pos) {
            for (char d = '0'; d <= '9'; ++d) {
                if (d == imei[pos]) continue;
                auto changed = imei;
                changed[pos] = d;
                disagreements += validate_imei(changed) != oracle::imei(changed) ? 1 : 0;
                ++perturbations;
                ++checked;
            }
        }
    }
    return {disagreements == 0, std::to_string(checked) + " strings (" + std::to_string(kRandom) + " random, " +
                                    std::to_string(valid_seen) + " of them valid; " + std::to_string(perturbations) +
                                    " perturbations of " + std::to_string(kValid) + " valid IMEIs), " +
                                    std::to_string(disagreements) + " disagreements"};
}

// ---------------------------------------------------------------------------

Verdict date_resolution() {
    constexpr int kReferences = 500;
    std::mt19937 rng(1602);
    const auto catalog = Catalog::load(testing::data_dir() / "en" / "catalog.json");
    const auto* entity = catalog.find_entity("damage_date");
    if (!entity) return {false, "catalog lacks damage_date"};

    std::vector<oracle::Day> refs;
    // Boundary references first: first/last day of every month over a leap
    // cycle and the century years 1900/2000/2100.
    for (int y : {2023, 2024, 2000, 2100, 1900}) {
        for (int m = 1; m <= 12 && refs.size() < 120; ++m) {
            refs.push_back({y, m, 1});
            refs.push_back({y, m, oracle::month_length(y, m)});
        }
    }
    while (refs.size() < static_cast<std::size_t>(kReferences)) {
        const int y = 1901 + static_cast<int>(rng() % 250);
        const int m = 1 + static_cast<int>(rng() % 12);
        refs.push_back({y, m, 1 + static_cast<int>(rng() % static_cast<unsigned>(oracle::month_length(y, m)))});
    }

    std::size_t checks = 0, mismatches = 0, leap_crossings = 0, month_crossings = 0;
    std::string first_mismatch;
    auto check = [&](const std::string& text, oracle::Day ref, oracle::Day want) {
        const Date r = std::chrono::year{ref.year} / static_cast<unsigned>(ref.month) / static_cast<unsigned>(ref.day);
        const auto got = scan_date(text, r);
        const auto via_nlu = catalog.extract(*entity, text, r);
        ++checks;
        if (!got || format_date(*got) != oracle::iso(want) || via_nlu != oracle::iso(want)) {
            if (mismatches++ == 0) {
                first_mismatch = "'" + text + "' @ " + oracle::iso(ref) + " -> " + (got ? format_date(*got) : "none") +
                                 ", want " + oracle::iso(want);
            }
        }
        if (want.month != ref.month) ++month_crossings;
        if (want.month == 2 && want.day == 29) ++leap_crossings;
    };
    const char* words[] = {"", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};
    for (const auto& ref : refs) {
        check("today", ref, ref);
        check("it happened yesterday", ref, oracle::days_back(ref, 1));
        const int n = 1 + static_cast<int>(rng() % 400);
        check(std::to_string(n) + " days ago", ref, oracle::days_back(ref, n));
        const int w = 1 + static_cast<int>(rng() % 10);
        check(std::string(words[w]) + (w == 1 ? " day ago" : " days ago"), ref, oracle::days_back(ref, w));
    }
    return {mismatches == 0, std::to_string(refs.size()) + " reference dates, " + std::to_string(checks) +
                                 " expressions (" + std::to_string(month_crossings) + " cross a month, " +
                                 std::to_string(leap_crossings) + " land on Feb 29), " + std::to_string(mismatches) +
                                 " mismatches" + (first_mismatch.empty() ? "" : "; first: " + first_mismatch)};
}

// ---------------------------------------------------------------------------

std::filesystem::path edited_templates(const std::filesystem::path& dir, const std::string& lang) {
    std::ifstream in(testing::data_dir() / lang / "templates.json");
    Json j = Json::parse(in);
    for (auto& t : j["templates"]) {
        for (const char* key : {"text", "formal", "informal"}) {
            if (!t.contains(key)) continue;
            for (auto& v : t[key]) v = "(copy edit) " + v.get<std::string>() + " Thanks for your patience.";
        }
    }
    const auto path = dir / (lang + "-templates.json");
    std::ofstream(path) << j.dump(2);
    return path;
}

Verdict replay_determinism() {
    const auto suite = load_suite(testing::fixtures_dir() / "personas");
    const auto first = to_json(run_suite(suite, testing::bot_config(), ReplayMode::exact), true).dump(2);
    const auto second = to_json(run_suite(suite, testing::bot_config(), ReplayMode::exact), true).dump(2);
    const bool identical = first == second;

    testing::TempDir dir("acceptance-edit");
    std::map<std::string, std::vector<ReplayScript>> by_language;
    for (const auto& s : suite) by_language[s.language].push_back(s);
    std::size_t predicate_passed = 0, exact_failed = 0;
    for (const auto& [lang, scripts] : by_language) {
        auto cfg = testing::bot_config(lang);
        cfg.templates_path = edited_templates(dir.path(), lang);
        for (const auto& s : run_suite(scripts, cfg, ReplayMode::predicate).scripts) predicate_passed += s.passed ? 1 : 0;
        for (const auto& s : run_suite(scripts, cfg, ReplayMode::exact).scripts) exact_failed += s.passed ? 0 : 1;
    }
    const bool ok = identical && predicate_passed == suite.size() && exact_failed == suite.size();
    return {ok, std::string(identical ? "two reports byte-identical" : "reports differ") + " (" +
                    std::to_string(first.size()) + " bytes); after template copy edit: predicate " +
                    std::to_string(predicate_passed) + "/" + std::to_string(suite.size()) + " pass, exact " +
                    std::to_string(exact_failed) + "/" + std::to_string(suite.size()) + " fail as expected"};
}

// ---------------------------------------------------------------------------

std::vector<Payload> user_script(int user) {
    // Rotating conversation shapes; none submits a claim, so each user's
    // transcript is independent of every other user's.
    static const std::vector<std::vector<std::string>> shapes = {
        {"Hi", "my phone is broken", "#display_damage", "iphone", "#iphone_8", "0176 1234567", "490154203237519",
         "490154203237518", "yesterday", "tell me a joke", "I dropped it in the kitchen", "no", "#damage_date",
         "3 days ago", "thanks", "how are you?", "no", "#imei", "356938035643809", "bye"},
        {"my galaxy s9 got wet yesterday", "yes", "yes", "yes", "0176 7654321", "😡", "490154203237518",
         "it fell into the pool", "are you a robot?", "no", "#phone_model", "pixel", "no", "#event_details",
         "it slipped out of my hand", "hello", "what can you do?", "ok", "no", "#damage_type"},
        {"Hallo", "what", "qwertz", "my name is Sam", "I want to report a damage", "#theft", "nokia", "ipad",
         "#ipad_air_2", "12", "0176 1234567", "1234", "490154203237518", "next week", "today",
         "stolen on the bus", "no", "#phone_number", "0221 998877", "thanks"},
    };
    const auto& shape = shapes[static_cast<std::size_t>(user) % shapes.size()];
    std::vector<Payload> out;
    for (const auto& line : shape) {
        if (line.rfind("#", 0) == 0) {
            out.push_back(QuickReplyPayload{line.substr(1)});
        } else {
            out.push_back(TextPayload{line});
        }
    }
    return out;
}

Verdict concurrency_contract() {
    constexpr int kUsers = 50;
    constexpr int kMessages = 20;
    constexpr double kMaxSeconds = 30.0;
    const Timestamp start = testing::at("2026-10-16T08:00:00Z");
    auto message = [&](int user, int i) {
        return InboundMessage{{"webchat", "user-" + std::to_string(user)}, "m" + std::to_string(i),
                              start + std::chrono::seconds(30 * i), user_script(user)[static_cast<std::size_t>(i)]};
    };

    // Serial oracle: each user's conversation alone against a fresh bot.
    std::vector<std::vector<std::string>> expected(kUsers);
    {
        Bot serial(testing::bot_config(), std::make_shared<MemoryStore>(), std::make_shared<claim::MemoryClaimStore>());
        for (int u = 0; u < kUsers; ++u) {
            for (int i = 0; i < kMessages; ++i) expected[u].push_back(encode_actions(serial.handle(message(u, i)).actions));
        }
    }

    testing::TempDir dir("acceptance-webhook");
    Bot bot(testing::bot_config(), std::make_shared<FileStore>(dir.path() / "contexts"),
            std::make_shared<claim::FileClaimStore>(dir.path() / "claims"));
    WebhookServer server(bot, {"127.0.0.1", 0, std::nullopt});
    const int port = server.start();

    const auto t0 = Clock::now();
    std::vector<std::vector<std::string>> got(kUsers);
    std::atomic<int> conflicts{0}, other_errors{0};
    std::mutex error_mutex;
    std::string first_error;
    auto note_error = [&](int user, int i, const std::string& what) {
        std::lock_guard lock(error_mutex);
        first_error = "user " + std::to_string(user) + " message " + std::to_string(i) + ": " + what;
    };
    std::vector<std::thread> clients;
    for (int u = 0; u < kUsers; ++u) {
        clients.emplace_back([&, u] {
            httplib::Client cli("127.0.0.1", port);
            cli.set_read_timeout(std::chrono::seconds(20));
            for (int i = 0; i < kMessages; ++i) {
                auto res = cli.Post("/v1/messages", encode_message(message(u, i)), "application/json");
                if (!res) {
                    if (other_errors++ == 0) note_error(u, i, httplib::to_string(res.error()));
                    got[u].push_back("<transport error>");
                    continue;
                }
                if (res->status == 409) ++conflicts;
                if (res->status != 200 && res->status != 409 && other_errors++ == 0) {
                    note_error(u, i, std::to_string(res->status) + " " + res->body);
                }
                got[u].push_back(res->body);
            }
        });
    }
    for (auto& c : clients) c.join();
    const double elapsed = seconds_since(t0);
    server.stop();

    int matching_users = 0;
    for (int u = 0; u < kUsers; ++u) matching_users += got[u] == expected[u] ? 1 : 0;
    const bool ok = matching_users == kUsers && conflicts == 0 && other_errors == 0 && elapsed < kMaxSeconds;
    return {ok, std::to_string(kUsers) + " users x " + std::to_string(kMessages) + " messages, " +
                    std::to_string(matching_users) + "/" + std::to_string(kUsers) + " transcripts equal the serial oracle, " +
                    std::to_string(conflicts.load()) + " conflicts, " + std::to_string(other_errors.load()) +
                    " other errors, " + fmt(elapsed) + " s (limit " + fmt(kMaxSeconds, 1) + " s)" +
                    (first_error.empty() ? "" : "; first: " + first_error)};
}

// ---------------------------------------------------------------------------

// A representative state as the scenario pushes it.
DialogState scenario_state(const std::string& name) {
    DialogState s{name, std::nullopt, 10, {}};
    if (name == claim::kClarifyPhoneModel) s.with("family", "iphone");
    if (name == claim::kUserConfirmingAnswer) s.with("slot", "damage_type").with("value", "theft");
    return s;
}

// Plausible parameter values for an intent's entities.
std::map<std::string, std::string> sample_parameters(const Catalog& catalog, const std::string& intent, Date ref) {
    std::map<std::string, std::string> out;
    if (intent == kOptionSelectedIntent) out[std::string(kOptionEntity)] = "iphone_8";
    const auto* spec = catalog.find_intent(intent);
    if (!spec) return out;
    for (const auto& name : spec->entities) {
        const auto& e = *catalog.find_entity(name);
        switch (e.kind) {
            case EntityKind::enumerated: out[name] = e.values.begin()->first; break;
            case EntityKind::date: out[name] = format_date(ref); break;
            case EntityKind::digit_string: out[name] = "490154203237518"; break;
            case EntityKind::free_text: out[name] = "Sam"; break;
        }
    }
    return out;
}

Verdict no_dead_end() {
    std::size_t pairs = 0, dead = 0, broken = 0;
    std::string first_problem;
    for (const char* lang : {"en", "de"}) {
        Bot bot(testing::bot_config(lang), std::make_shared<MemoryStore>(), std::make_shared<claim::MemoryClaimStore>());
        const Date ref = std::chrono::year{2026} / 10 / 16;
        auto states = bot.rules().states();
        states.insert(states.begin(), "");  // no active state
        for (const auto& state : states) {
            for (const auto& intent : bot.catalog().all_intent_names()) {
                for (bool with_params : {false, true}) {
                    auto ctx = fresh_context({"probe", "u"});
                    ctx.slots = {{"damage_type", "theft"}, {"phone_number", "01761234567"}};
                    if (!state.empty()) ctx.states.push(scenario_state(state));
                    MessageUnderstanding mu;
                    mu.intent = intent;
                    mu.raw_text = intent;
                    mu.reference_date = ref;
                    if (intent == kMediaReceivedIntent) {
                        mu.media_kind = MediaKind::image;
                        mu.raw_text.clear();
                    }
                    if (with_params) mu.parameters = sample_parameters(bot.catalog(), intent, ref);
                    ++pairs;
                    const std::string where = std::string(lang) + " " + (state.empty() ? "<none>" : state) + " x " +
                                              intent + (with_params ? " (with parameters)" : "");
                    try {
                        const auto r = dispatch(ctx, mu, bot.rules());
                        apply_updates(ctx, r.outcome.updates);
                        apply_transitions(ctx.states, r.outcome, bot.rules());
                        for (auto planned : r.outcome.actions) {
                            planned.fills.try_emplace("claim_id", "CLM-00000000-000000");
                            bot.responder().realize(planned, ctx, 0);
                        }
                    } catch (const NoHandlerMatched&) {
                        if (dead++ == 0 && first_problem.empty()) first_problem = "dead end: " + where;
                    } catch (const std::exception& e) {
                        if (broken++ == 0 && first_problem.empty()) first_problem = where + ": " + e.what();
                    }
                }
            }
        }
    }
    return {dead == 0 && broken == 0, std::to_string(pairs) + " (state, intent) pairs over en+de, " +
                                          std::to_string(dead) + " without a handler, " + std::to_string(broken) +
                                          " failing" + (first_problem.empty() ? "" : "; " + first_problem)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"task-completion", task_completion},
        {"lifetime-oracle", lifetime_oracle},
        {"dispatch-ordering", dispatch_ordering},
        {"imei-oracle", imei_oracle},
        {"date-resolution", date_resolution},
        {"replay-determinism", replay_determinism},
        {"concurrency-contract", concurrency_contract},
        {"no-dead-end", no_dead_end},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failures += v.passed ? 0 : 1;
        std::cout << (v.passed ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}
