#include <doctest.h>

#include <random>
#include <set>
#include <thread>

#include "convo/bot.hpp"
#include "convo/imei.hpp"
#include "oracles/luhn_oracle.hpp"
#include "support/helpers.hpp"

using namespace convo;
using namespace convo::claim;

namespace {

struct Conversation {
    std::shared_ptr<MemoryClaimStore> claims = std::make_shared<MemoryClaimStore>();
    Bot bot;
    UserKey user{"test", "claimant"};
    Timestamp clock = testing::at("2026-10-16T10:00:00Z");
    int n = 0;
    StepResult last;

    explicit Conversation(const std::string& lang = "en")
        : bot(testing::bot_config(lang), std::make_shared<MemoryStore>(), claims) {}

    StepResult& send(Payload p) {
        last = bot.handle({user, "m" + std::to_string(++n), clock + std::chrono::seconds(30 * n), std::move(p)});
        return last;
    }
    StepResult& say(const std::string& text) { return send(TextPayload{text}); }
    StepResult& pick(const std::string& option) { return send(QuickReplyPayload{option}); }

    bool rendered(const std::string& template_id) const {
        const auto& t = last.trace.templates;
        return std::find(t.begin(), t.end(), template_id) != t.end();
    }
    bool active(const std::string& state) const { return last.context.states.contains(state); }
    std::optional<std::string> slot(const std::string& s) const { return last.context.slot(s); }
    const ChatAction* menu() const {
        for (const auto& a : last.actions) {
            if (a.kind == ActionKind::send_quick_replies) return &a;
        }
        return nullptr;
    }
};

std::map<std::string, std::string> complete_fields() {
    return {{"damage_type", "display_damage"}, {"phone_model", "iphone_8"}, {"phone_number", "01761234567"},
            {"imei", "490154203237518"},       {"damage_date", "2026-10-15"}, {"event_details", "dropped it"}};
}

}  // namespace

TEST_CASE("happy path writes a complete claim record") {
    Conversation c;
    c.say("Hi");
    c.say("I want to report a damage");
    CHECK(c.active(kAskDamageType));
    c.pick("display_damage");
    c.say("It's an iPhone 8");
    c.say("0176 1234567");
    c.say("490154203237518");
    c.say("yesterday");
    c.say("I dropped it on the pavement while getting off the bus");
    CHECK(c.active(kConfirmSubmission));
    c.say("yes");
    CHECK(c.rendered("claim_submitted"));
    CHECK(c.active(kClaimSubmitted));

    const auto records = c.claims->list();
    REQUIRE(records.size() == 1);
    const auto& r = records[0];
    CHECK(r.claim_id == "CLM-20261016-000001");
    CHECK(r.user == c.user);
    CHECK(r.fields == std::map<std::string, std::string>{{"damage_type", "display_damage"},
                                                         {"phone_model", "iphone_8"},
                                                         {"phone_number", "01761234567"},
                                                         {"imei", "490154203237518"},
                                                         {"damage_date", "2026-10-15"},
                                                         {"event_details", "I dropped it on the pavement while getting off the bus"}});
    CHECK(c.last.actions.back().text->find(r.claim_id) != std::string::npos);
}

TEST_CASE("an ambiguous family opens a menu of its models") {
    Conversation c;
    c.say("my phone is broken");
    c.pick("display_damage");
    c.say("iphone");
    REQUIRE(c.menu());
    std::vector<std::string> ids;
    for (const auto& o : c.menu()->options) ids.push_back(o.id);
    CHECK(ids == std::vector<std::string>{"iphone_7", "iphone_8", "iphone_x"});
    CHECK(c.active(kClarifyPhoneModel));
    c.pick("iphone_x");
    CHECK(c.slot("phone_model") == "iphone_x");
    CHECK(c.active(kAskPhoneNumber));
}

TEST_CASE("a single-model family resolves without a menu") {
    Conversation c;
    c.say("my phone is broken");
    c.pick("display_damage");
    c.say("a pixel");
    CHECK(c.slot("phone_model") == "pixel_2");
}

TEST_CASE("denying a mentioned value clears it and asks again") {
    Conversation c;
    c.say("my iphone 8 fell into water yesterday");
    CHECK(c.active(kUserConfirmingAnswer));
    c.say("yes");
    CHECK(c.slot("damage_type") == "water_damage");
    CHECK(c.active(kUserConfirmingAnswer));
    c.say("no");
    CHECK_FALSE(c.slot("phone_model"));
    CHECK(c.active(kAskPhoneModel));
    CHECK_FALSE(c.active(kUserConfirmingAnswer));
    CHECK(c.rendered("ask_phone_model"));
}

TEST_CASE("small talk does not destroy the questionnaire") {
    Conversation c;
    c.say("my phone is broken");
    c.pick("theft");
    c.say("galaxy s9");
    c.say("0176 1234567");
    CHECK(c.active(kAskImei));
    for (const char* chit : {"tell me a joke", "how are you?", "are you a robot?", "thanks", "😀"}) {
        CAPTURE(chit);
        c.say(chit);
        CHECK(c.active(kAskImei));
        CHECK(c.slot("phone_number") == "01761234567");
    }
    c.say("490154203237518");
    CHECK(c.slot("imei") == "490154203237518");
}

TEST_CASE("confirmed slots are not overwritten by later mentions") {
    Conversation c;
    c.say("my phone is broken");
    c.pick("display_damage");
    c.say("iphone 7");
    c.say("it fell into water, it was a galaxy s9");
    CHECK(c.slot("damage_type") == "display_damage");
    CHECK(c.slot("phone_model") == "iphone_7");
    CHECK(c.active(kAskPhoneNumber));
}

TEST_CASE("invalid IMEI and future dates are repaired, not stored") {
    Conversation c;
    c.say("my phone is broken");
    c.pick("display_damage");
    c.say("iphone 7");
    c.say("0176 1234567");
    c.say("490154203237519");
    CHECK(c.rendered("invalid_imei"));
    CHECK_FALSE(c.slot("imei"));
    CHECK(c.active(kAskImei));
    c.say("490154203237518");
    c.say("20.10.2026");
    CHECK(c.rendered("date_in_future"));
    CHECK_FALSE(c.slot("damage_date"));
    c.say("14.10.2026");
    CHECK(c.slot("damage_date") == "2026-10-14");
}

TEST_CASE("too-short phone numbers are refused") {
    Conversation c;
    c.say("my phone is broken");
    c.pick("display_damage");
    c.say("iphone 7");
    c.say("123");
    CHECK(c.rendered("invalid_phone_number"));
    CHECK_FALSE(c.slot("phone_number"));
}

TEST_CASE("correction menu reopens one slot") {
    Conversation c;
    c.say("my phone is broken");
    c.pick("theft");
    c.say("galaxy s9");
    c.say("0176 1234567");
    c.say("490154203237518");
    c.say("today");
    c.say("someone took it from my bag on the train");
    c.say("no");
    CHECK(c.active(kChooseCorrection));
    c.pick("imei");
    CHECK_FALSE(c.slot("imei"));
    CHECK(c.slot("phone_number") == "01761234567");
    c.say("356938035643809");
    CHECK(c.active(kConfirmSubmission));
    c.say("yes");
    REQUIRE(c.claims->list().size() == 1);
    CHECK(c.claims->list()[0].fields.at("imei") == "356938035643809");
}

TEST_CASE("German: informal address is picked up mid-dialog") {
    Conversation c("de");
    c.say("Hallo");
    CHECK(c.last.context.formality.level == FormalityLevel::formal);
    c.say("Kannst du mir helfen? Mein Handy ist kaputt");
    CHECK(c.last.context.formality.level == FormalityLevel::informal);
    CHECK(c.last.context.formality.source == FormalitySource::detected);
}

TEST_CASE("claim_problems") {
    const Date today = std::chrono::year{2026} / 10 / 16;
    CHECK(claim_problems(complete_fields(), today).empty());
    auto f = complete_fields();
    f.erase("event_details");
    CHECK(claim_problems(f, today) == std::vector<std::string>{"missing event_details"});
    f = complete_fields();
    f["imei"] = "490154203237519";
    f["damage_date"] = "2026-10-17";
    f["damage_type"] = "meteor";
    f["phone_number"] = "12";
    CHECK(claim_problems(f, today).size() == 4);
}

TEST_CASE("the submit effect refuses incomplete frames") {
    auto store = std::make_shared<MemoryClaimStore>();
    ClaimEffects fx(store);
    auto ctx = fresh_context({"c", "u"});
    ctx.slots = complete_fields();
    ctx.slots.erase("event_details");
    InboundMessage m{{"c", "u"}, "m", testing::at("2026-10-16T10:00:00Z"), TextPayload{"yes"}};
    CHECK_THROWS_AS(fx.run("submit_claim", ctx, m), ClaimError);
    CHECK(store->list().empty());
    ctx.slots = complete_fields();
    CHECK(fx.run("submit_claim", ctx, m).at("claim_id") == "CLM-20261016-000001");
    CHECK_THROWS_AS(fx.run("launch_rocket", ctx, m), ClaimError);
}

TEST_CASE("file claim store round-trips records") {
    testing::TempDir dir("claims");
    FileClaimStore store(dir.path());
    ClaimRecord r{"", {"web", "u/1"}, testing::at("2026-10-16T10:00:00Z"), complete_fields()};
    const auto id = store.submit(r);
    r.claim_id = id;
    CHECK(std::filesystem::exists(dir.path() / (id + ".json")));
    const auto back = FileClaimStore(dir.path()).list();
    REQUIRE(back.size() == 1);
    CHECK(back[0] == r);
    CHECK(claim_from_json(to_json(r)) == r);
}

TEST_CASE("100 random valid frames get 100 distinct ids") {
    testing::TempDir dir("claims-fuzz");
    FileClaimStore files(dir.path());
    MemoryClaimStore memory;
    std::mt19937_64 rng(17);
    std::set<std::string> file_ids, memory_ids;
    const Timestamp base = testing::at("2026-10-16T00:00:00Z");
    for (int i = 0; i < 100; ++i) {
        std::string body(14, '0');
        for (auto& ch : body) ch = static_cast<char>('0' + rng() % 10);
        auto fields = complete_fields();
        fields["imei"] = oracle::complete_imei(body);
        fields["damage_type"] = kDamageTypes[rng() % kDamageTypes.size()];
        const Timestamp at = base + std::chrono::hours(rng() % 48);
        REQUIRE(claim_problems(fields, date_of(at)).empty());
        ClaimRecord r{"", {"fuzz", std::to_string(i)}, at, fields};
        file_ids.insert(files.submit(r));
        memory_ids.insert(memory.submit(r));
    }
    CHECK(file_ids.size() == 100);
    CHECK(memory_ids.size() == 100);
}

TEST_CASE("concurrent submissions to one directory stay unique") {
    testing::TempDir dir("claims-threads");
    std::vector<std::thread> threads;
    std::mutex mu;
    std::set<std::string> ids;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            FileClaimStore store(dir.path());  // separate instances, shared directory
            for (int i = 0; i < 10; ++i) {
                auto id = store.submit({"", {"c", std::to_string(t)}, testing::at("2026-10-16T10:00:00Z"), complete_fields()});
                std::lock_guard lock(mu);
                ids.insert(id);
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK(ids.size() == 80);
}

TEST_CASE("claim ids") {
    CHECK(format_claim_id(std::chrono::year{2026} / 3 / 2, 42) == "CLM-20260302-000042");
}

TEST_CASE("phone catalog and scenario data") {
    const auto scenario = Scenario::load(testing::data_dir(), "en");
    const auto& phones = scenario.phones;
    CHECK(phones.is_family("iphone"));
    CHECK(phones.family_models("iphone").size() == 3);
    CHECK(phones.find_model("galaxy_s8")->family == "galaxy");
    CHECK(phones.display_name("iphone_x") == "iPhone X");
    CHECK(phones.display_name("nokia_3310") == "nokia_3310");
    CHECK(scenario.damage_menu().size() == kDamageTypes.size());
    CHECK(scenario.correction_menu().size() == kSlotOrder.size());

    const auto de = Scenario::load(testing::data_dir(), "de");
    CHECK(de.dmy_dates);
    CHECK(de.display("damage_date", "2026-03-02") == "2.3.2026");
    CHECK(scenario.display("damage_date", "2026-03-02") == "2026-03-02");

    for (const char* lang : {"en", "de"}) {
        const auto cat = Catalog::load(testing::data_dir() / lang / "catalog.json");
        CHECK(cross_check(Scenario::load(testing::data_dir(), lang), cat).empty());
    }
    CHECK_THROWS(PhoneCatalog::from_json(Json::parse(
        R"({"families": [{"id": "a", "name": "A"}], "models": [{"id": "x", "name": "X", "family": "a"}, {"id": "x", "name": "Y", "family": "a"}]})")));
}

TEST_CASE("helpers") {
    CHECK(ask_state_for("phone_model") == kAskPhoneModel);
    CHECK(mention_slot("damage_date") == "mentioned.damage_date");
    CHECK(valid_phone_number("123456"));
    CHECK_FALSE(valid_phone_number("12345"));
    CHECK_FALSE(valid_phone_number("1234567890123456"));
    CHECK_FALSE(valid_phone_number("12345a"));
}
