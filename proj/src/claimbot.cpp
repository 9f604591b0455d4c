#include "convo/claimbot.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "convo/imei.hpp"

namespace convo::claim {

std::string ask_state_for(const std::string& slot) {
    std::string out = "ASK_";
    for (char c : slot) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string mention_slot(const std::string& slot) { return "mentioned." + slot; }

bool valid_phone_number(const std::string& digits) {
    if (digits.size() < 6 || digits.size() > 15) return false;
    return std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
}

namespace {

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Json j = Json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw std::runtime_error(path.string() + ": malformed JSON");
    return j;
}

}  // namespace

PhoneCatalog PhoneCatalog::from_json(const Json& j) {
    PhoneCatalog c;
    for (const auto& f : j.at("families")) c.families_[f.at("id").get<std::string>()] = f.at("name").get<std::string>();
    for (const auto& m : j.at("models")) {
        PhoneModel pm{m.at("id").get<std::string>(), m.at("name").get<std::string>(), m.at("family").get<std::string>()};
        if (!c.families_.count(pm.family)) {
            throw std::runtime_error("phone model '" + pm.id + "' has unknown family '" + pm.family + "'");
        }
        if (c.find_model(pm.id) || c.families_.count(pm.id)) {
            throw std::runtime_error("duplicate phone id '" + pm.id + "'");
        }
        c.models_.push_back(std::move(pm));
    }
    for (const auto& [id, _] : c.families_) {
        if (c.family_models(id).empty()) throw std::runtime_error("phone family '" + id + "' has no models");
    }
    return c;
}

PhoneCatalog PhoneCatalog::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

const PhoneModel* PhoneCatalog::find_model(const std::string& id) const {
    for (const auto& m : models_) {
        if (m.id == id) return &m;
    }
    return nullptr;
}

std::vector<PhoneModel> PhoneCatalog::family_models(const std::string& family) const {
    std::vector<PhoneModel> out;
    for (const auto& m : models_) {
        if (m.family == family) out.push_back(m);
    }
    return out;
}

std::string PhoneCatalog::display_name(const std::string& id) const {
    if (const auto* m = find_model(id)) return m->name;
    if (auto it = families_.find(id); it != families_.end()) return it->second;
    return id;
}

std::vector<std::string> PhoneCatalog::family_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : families_) out.push_back(id);
    return out;
}

Scenario Scenario::load(const std::filesystem::path& data_dir, const std::string& language) {
    const Json j = read_json_file(data_dir / language / "scenario.json");
    Scenario s;
    s.language = j.value("language", language);
    s.dmy_dates = j.value("date_format", "iso") == "dmy";
    s.damage_labels = j.at("damage_types").get<std::map<std::string, std::string>>();
    s.slot_labels = j.at("slot_labels").get<std::map<std::string, std::string>>();
    s.phones = PhoneCatalog::load(data_dir / "phones.json");
    for (const auto& d : kDamageTypes) {
        if (!s.damage_labels.count(d)) throw std::runtime_error("scenario: missing label for damage type '" + d + "'");
    }
    for (const auto& slot : kSlotOrder) {
        if (!s.slot_labels.count(slot)) throw std::runtime_error("scenario: missing label for slot '" + slot + "'");
    }
    return s;
}

std::string Scenario::display(const std::string& slot, const std::string& value) const {
    if (slot == "damage_type") {
        auto it = damage_labels.find(value);
        return it == damage_labels.end() ? value : it->second;
    }
    if (slot == "phone_model") return phones.display_name(value);
    if (slot == "damage_date" && dmy_dates) {
        if (auto d = parse_date(value)) {
            return std::to_string(static_cast<unsigned>(d->day())) + "." +
                   std::to_string(static_cast<unsigned>(d->month())) + "." + std::to_string(static_cast<int>(d->year()));
        }
    }
    return value;
}

std::vector<QuickReplyOption> Scenario::damage_menu() const {
    std::vector<QuickReplyOption> out;
    for (const auto& d : kDamageTypes) out.push_back({d, damage_labels.at(d)});
    return out;
}

std::vector<QuickReplyOption> Scenario::correction_menu() const {
    std::vector<QuickReplyOption> out;
    for (const auto& s : kSlotOrder) out.push_back({s, slot_labels.at(s)});
    return out;
}

std::vector<QuickReplyOption> Scenario::model_menu(const std::string& family) const {
    std::vector<QuickReplyOption> out;
    for (const auto& m : phones.family_models(family)) out.push_back({m.id, m.name});
    return out;
}

std::vector<std::string> cross_check(const Scenario& scenario, const Catalog& catalog) {
    std::vector<std::string> problems;
    if (const auto* e = catalog.find_entity("phone_model")) {
        for (const auto& [canonical, _] : e->values) {
            if (!scenario.phones.find_model(canonical) && !scenario.phones.is_family(canonical)) {
                problems.push_back("phone_model value '" + canonical + "' is not in the phone catalog");
            }
        }
    } else {
        problems.push_back("catalog has no phone_model entity");
    }
    if (const auto* e = catalog.find_entity("damage_type")) {
        for (const auto& d : kDamageTypes) {
            if (!e->values.count(d)) problems.push_back("damage_type entity lacks value '" + d + "'");
        }
        for (const auto& [canonical, _] : e->values) {
            if (!scenario.damage_labels.count(canonical)) {
                problems.push_back("damage_type value '" + canonical + "' has no label");
            }
        }
    } else {
        problems.push_back("catalog has no damage_type entity");
    }
    for (const auto& intent : kClaimIntents) {
        if (!catalog.find_intent(intent)) problems.push_back("catalog lacks intent '" + intent + "'");
    }
    return problems;
}

namespace {

const std::array<std::string, 3> kMentionable = {"damage_type", "phone_model", "damage_date"};

const std::array<std::string, 10> kClaimStates = {kAskDamageType,     kAskPhoneModel,        kAskPhoneNumber,
                                                  kAskImei,           kAskDamageDate,        kAskEventDetails,
                                                  kClarifyPhoneModel, kUserConfirmingAnswer, kConfirmSubmission,
                                                  kChooseCorrection};

constexpr int kAskPriority = 10;
constexpr int kMenuPriority = 20;
constexpr int kConfirmPriority = 30;
constexpr int kShortLifetime = 3;

std::map<std::string, std::optional<std::string>> requires_option() {
    return {{std::string(kOptionEntity), std::nullopt}};
}

bool claim_in_progress(const UserContext& ctx) {
    return std::any_of(kClaimStates.begin(), kClaimStates.end(),
                       [&](const std::string& s) { return ctx.states.contains(s); });
}

std::map<std::string, std::string> slots_after(const UserContext& ctx, const PlanOutcome& out) {
    auto slots = ctx.slots;
    for (const auto& [k, v] : out.updates.slots) {
        if (v) slots[k] = *v;
        else slots.erase(k);
    }
    return slots;
}

std::optional<std::string> param(const MessageUnderstanding& mu, const std::string& name) {
    auto it = mu.parameters.find(name);
    if (it == mu.parameters.end()) return std::nullopt;
    return it->second;
}

bool date_in_future(const std::string& iso, Date reference) {
    auto d = parse_date(iso);
    return d && std::chrono::sys_days(*d) > std::chrono::sys_days(reference);
}

std::size_t word_count(const std::string& text) {
    std::istringstream in(text);
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

class Rules {
public:
    explicit Rules(std::shared_ptr<const Scenario> scenario) : s_(std::move(scenario)) {}

    void ask(PlanOutcome& out, const std::string& slot) const {
        if (slot == "damage_type") out.menu("ask_damage_type", s_->damage_menu());
        else out.say("ask_" + slot);
    }

    void confirm(PlanOutcome& out, const std::string& slot, const std::string& value) const {
        std::string fill = slot == "damage_type" ? "damage" : slot == "phone_model" ? "model" : "date";
        out.say("confirm_" + slot, {{fill, s_->display(slot, value)}});
    }

    void clarify(PlanOutcome& out, const std::string& family) const {
        out.menu("clarify_phone_model", s_->model_menu(family), {{"family", s_->phones.display_name(family)}});
    }

    void summary(PlanOutcome& out, const std::map<std::string, std::string>& slots) const {
        auto get = [&](const std::string& k) {
            auto it = slots.find(k);
            return it == slots.end() ? std::string() : s_->display(k, it->second);
        };
        out.say("confirm_submission", {{"damage", get("damage_type")},
                                       {"model", get("phone_model")},
                                       {"phone_number", get("phone_number")},
                                       {"imei", get("imei")},
                                       {"date", get("damage_date")},
                                       {"details", get("event_details")}});
    }

    void correction_menu(PlanOutcome& out) const { out.menu("choose_correction", s_->correction_menu()); }

    // A family with a single model resolves to that model.
    std::optional<std::string> resolve_model(const std::string& id) const {
        if (s_->phones.find_model(id)) return id;
        auto models = s_->phones.family_models(id);
        if (models.size() == 1) return models.front().id;
        return std::nullopt;
    }

    /// Moves to the next open claim field: confirms a pending mention, asks
    /// the question, or asks for the final confirmation.
    void advance(PlanOutcome& out, const UserContext& ctx) const {
        const auto slots = slots_after(ctx, out);
        for (const auto& st : kClaimStates) out.drop(st);
        for (const auto& slot : kSlotOrder) {
            if (slots.count(slot)) continue;
            out.layer(DialogState::unbounded(ask_state_for(slot), kAskPriority));
            if (auto m = slots.find(mention_slot(slot)); m != slots.end()) {
                std::string value = m->second;
                if (slot == "phone_model") {
                    auto resolved = resolve_model(value);
                    if (!resolved) {
                        out.clear_slot(mention_slot(slot));
                        out.layer(DialogState::bounded(kClarifyPhoneModel, kShortLifetime, kMenuPriority)
                                      .with("family", value));
                        clarify(out, value);
                        return;
                    }
                    value = *resolved;
                }
                out.layer(DialogState::bounded(kUserConfirmingAnswer, kShortLifetime, kConfirmPriority)
                              .with("slot", slot)
                              .with("value", value));
                confirm(out, slot, value);
                return;
            }
            ask(out, slot);
            return;
        }
        out.layer(DialogState::unbounded(kConfirmSubmission, kAskPriority));
        summary(out, slots);
    }

    /// Repeats the question of the most relevant open claim state.
    bool reprompt(PlanOutcome& out, const UserContext& ctx) const {
        for (const auto& st : ctx.states.states()) {
            if (st.name == kUserConfirmingAnswer) {
                confirm(out, st.payload.at("slot"), st.payload.at("value"));
                return true;
            }
            if (st.name == kClarifyPhoneModel) {
                clarify(out, st.payload.at("family"));
                return true;
            }
            if (st.name == kChooseCorrection) {
                correction_menu(out);
                return true;
            }
            if (st.name == kConfirmSubmission) {
                summary(out, ctx.slots);
                return true;
            }
            for (const auto& slot : kSlotOrder) {
                if (st.name == ask_state_for(slot)) {
                    ask(out, slot);
                    return true;
                }
            }
        }
        return false;
    }

    void reprompt_or_offer(PlanOutcome& out, const UserContext& ctx) const {
        if (!reprompt(out, ctx)) out.say("offer_help");
    }

    void accept(PlanOutcome& out, const UserContext& ctx, const std::string& slot, const std::string& value) const {
        out.set_slot(slot, value);
        out.clear_slot(mention_slot(slot));
        advance(out, ctx);
    }

    void accept_model(PlanOutcome& out, const UserContext& ctx, const std::string& id) const {
        if (auto resolved = resolve_model(id)) {
            accept(out, ctx, "phone_model", *resolved);
            return;
        }
        out.clear_slot(mention_slot("phone_model"));
        out.layer(DialogState::bounded(kClarifyPhoneModel, kShortLifetime, kMenuPriority).with("family", id));
        clarify(out, id);
    }

    const Scenario& scenario() const { return *s_; }

private:
    std::shared_ptr<const Scenario> s_;
};

template <typename H, typename... Args>
HandlerPtr make(std::initializer_list<std::string> enters, std::initializer_list<std::string> renders,
                Args&&... args) {
    auto h = std::make_shared<H>(std::forward<Args>(args)...);
    h->may_enter(enters).may_render(renders);
    return h;
}

const std::initializer_list<std::string> kAdvanceStates = {
    kAskDamageType,     kAskPhoneModel,        kAskPhoneNumber,    kAskImei,          kAskDamageDate,
    kAskEventDetails,   kClarifyPhoneModel,    kUserConfirmingAnswer, kConfirmSubmission};

}  // namespace

RuleTable build_rules(std::shared_ptr<const Scenario> scenario, const TemplateTable* templates) {
    auto R = std::make_shared<const Rules>(std::move(scenario));
    RuleTableBuilder b;

    // Every template reachable through advance()/reprompt().
    const std::initializer_list<std::string> question_templates = {
        "ask_damage_type", "ask_phone_model", "ask_phone_number", "ask_imei",
        "ask_damage_date", "ask_event_details", "confirm_damage_type", "confirm_phone_model",
        "confirm_damage_date", "clarify_phone_model", "confirm_submission", "choose_correction",
        "offer_help"};

    for (const auto& slot : kSlotOrder) {
        b.declare_slot(slot);
        b.declare_slot(mention_slot(slot));
    }
    for (const auto& st : kClaimStates) b.declare_state(st);
    b.declare_terminal(kClaimSubmitted);

    // Stateless: formality detection, the user's name, mentions of claim facts.
    b.stateless(make<RegexHandler>(
        {}, {}, R"(\b(du|dich|dir|dein\w*|sie|ihnen|ihr\w*)\b)",
        [](const UserContext& ctx, const MessageUnderstanding& mu) {
            PlanOutcome out;
            if (ctx.formality.source == FormalitySource::explicit_choice) return out;
            if (auto f = detect_formality(mu.raw_text); f && f->level != ctx.formality.level) {
                out.updates.formality = *f;
            }
            return out;
        }));
    b.stateless(make<IntentHandler>(
        {}, {}, "introduce_name",
        [](const UserContext&, const MessageUnderstanding& mu) {
            PlanOutcome out;
            out.updates.user_name = mu.parameters.at("user_name");
            return out;
        },
        std::map<std::string, std::optional<std::string>>{{"user_name", std::nullopt}}));
    for (const auto& intent : kClaimIntents) {
        b.stateless(make<IntentHandler>({}, {}, intent, [](const UserContext& ctx, const MessageUnderstanding& mu) {
            PlanOutcome out;
            const bool active = claim_in_progress(ctx);
            for (const auto& slot : kMentionable) {
                auto value = param(mu, slot);
                if (!value) continue;
                if (active && ctx.slots.count(slot)) continue;
                if (slot == "damage_date" && date_in_future(*value, mu.reference_date)) continue;
                out.set_slot(mention_slot(slot), *value);
            }
            return out;
        }));
    }

    // ASK_DAMAGE_TYPE
    b.on_state(kAskDamageType,
               make<IntentHandler>(kAdvanceStates, question_templates, std::string(kOptionSelectedIntent),
                                   [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                       PlanOutcome out;
                                       const auto option = mu.parameters.at(std::string(kOptionEntity));
                                       if (std::find(kDamageTypes.begin(), kDamageTypes.end(), option) ==
                                           kDamageTypes.end()) {
                                           out.say("invalid_option");
                                           R->ask(out, "damage_type");
                                           return out;
                                       }
                                       R->accept(out, ctx, "damage_type", option);
                                       return out;
                                   },
                                   requires_option()));
    for (const auto& intent : kClaimIntents) {
        b.on_state(kAskDamageType,
                   make<IntentHandler>(kAdvanceStates, question_templates, intent,
                                       [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                           PlanOutcome out;
                                           R->accept(out, ctx, "damage_type", mu.parameters.at("damage_type"));
                                           return out;
                                       },
                                       std::map<std::string, std::optional<std::string>>{{"damage_type", std::nullopt}}));
    }

    // ASK_PHONE_MODEL and CLARIFY_PHONE_MODEL
    for (const auto& intent : kClaimIntents) {
        b.on_state(kAskPhoneModel,
                   make<IntentHandler>(kAdvanceStates, question_templates, intent,
                                       [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                           PlanOutcome out;
                                           R->accept_model(out, ctx, mu.parameters.at("phone_model"));
                                           return out;
                                       },
                                       std::map<std::string, std::optional<std::string>>{{"phone_model", std::nullopt}}));
    }
    b.on_state(kClarifyPhoneModel,
               make<IntentHandler>(kAdvanceStates, {"invalid_option", "clarify_phone_model", "ask_damage_type",
                                                    "ask_phone_number", "confirm_submission"},
                                   std::string(kOptionSelectedIntent),
                                   [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                       PlanOutcome out;
                                       const auto option = mu.parameters.at(std::string(kOptionEntity));
                                       const auto* family = ctx.states.find(kClarifyPhoneModel);
                                       const auto* model = R->scenario().phones.find_model(option);
                                       if (!model || !family || model->family != family->payload.at("family")) {
                                           out.say("invalid_option");
                                           R->reprompt(out, ctx);
                                           return out;
                                       }
                                       R->accept(out, ctx, "phone_model", option);
                                       return out;
                                   },
                                   requires_option()));
    b.on_state(kClarifyPhoneModel,
               make<IntentHandler>(kAdvanceStates, question_templates, "give_phone_model",
                                   [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                       PlanOutcome out;
                                       R->accept_model(out, ctx, mu.parameters.at("phone_model"));
                                       return out;
                                   },
                                   std::map<std::string, std::optional<std::string>>{{"phone_model", std::nullopt}}));

    // ASK_PHONE_NUMBER and ASK_IMEI
    b.on_state(kAskPhoneNumber,
               make<IntentHandler>(kAdvanceStates, {"invalid_phone_number", "ask_imei", "ask_damage_date",
                                                    "confirm_damage_date", "confirm_submission"},
                                   "give_number",
                                   [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                       PlanOutcome out;
                                       const auto digits = mu.parameters.at("digits");
                                       if (!valid_phone_number(digits)) {
                                           out.say("invalid_phone_number");
                                           return out;
                                       }
                                       R->accept(out, ctx, "phone_number", digits);
                                       return out;
                                   },
                                   std::map<std::string, std::optional<std::string>>{{"digits", std::nullopt}}));
    b.on_state(kAskImei,
               make<IntentHandler>(kAdvanceStates, {"invalid_imei", "ask_damage_date", "confirm_damage_date",
                                                    "ask_event_details", "confirm_submission"},
                                   "give_number",
                                   [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                       PlanOutcome out;
                                       const auto digits = mu.parameters.at("digits");
                                       if (!validate_imei(digits)) {
                                           out.say("invalid_imei");
                                           return out;
                                       }
                                       R->accept(out, ctx, "imei", digits);
                                       return out;
                                   },
                                   std::map<std::string, std::optional<std::string>>{{"digits", std::nullopt}}));

    // ASK_DAMAGE_DATE
    for (const auto& intent : kClaimIntents) {
        b.on_state(kAskDamageDate,
                   make<IntentHandler>(kAdvanceStates, {"date_in_future", "ask_event_details", "confirm_submission"},
                                       intent,
                                       [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                           PlanOutcome out;
                                           const auto date = mu.parameters.at("damage_date");
                                           if (date_in_future(date, mu.reference_date)) {
                                               out.say("date_in_future");
                                               return out;
                                           }
                                           R->accept(out, ctx, "damage_date", date);
                                           return out;
                                       },
                                       std::map<std::string, std::optional<std::string>>{{"damage_date", std::nullopt}}));
    }

    // ASK_EVENT_DETAILS: free text of at least three words.
    std::vector<std::string> detail_intents = {std::string(kFallbackIntent)};
    detail_intents.insert(detail_intents.end(), kClaimIntents.begin(), kClaimIntents.end());
    for (const auto& intent : detail_intents) {
        b.on_state(kAskEventDetails,
                   make<IntentHandler>(kAdvanceStates, {"details_too_short", "confirm_submission"}, intent,
                                       [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                           PlanOutcome out;
                                           const auto text = trim(mu.raw_text);
                                           if (word_count(text) < 3) {
                                               out.say("details_too_short");
                                               return out;
                                           }
                                           R->accept(out, ctx, "event_details", text);
                                           return out;
                                       }));
    }

    // USER_CONFIRMING_ANSWER
    b.on_state(kUserConfirmingAnswer,
               make<AffirmationHandler>(kAdvanceStates, question_templates,
                                        [R](const UserContext& ctx, const MessageUnderstanding&) {
                                            PlanOutcome out;
                                            const auto& p = ctx.states.find(kUserConfirmingAnswer)->payload;
                                            R->accept(out, ctx, p.at("slot"), p.at("value"));
                                            return out;
                                        }));
    b.on_state(kUserConfirmingAnswer,
               make<NegationHandler>(kAdvanceStates, question_templates,
                                     [R](const UserContext& ctx, const MessageUnderstanding&) {
                                         PlanOutcome out;
                                         const auto& p = ctx.states.find(kUserConfirmingAnswer)->payload;
                                         out.clear_slot(mention_slot(p.at("slot")));
                                         R->advance(out, ctx);
                                         return out;
                                     }));

    // CONFIRM_SUBMISSION and CHOOSE_CORRECTION
    b.on_state(kConfirmSubmission,
               make<AffirmationHandler>({kClaimSubmitted}, {"claim_submitted"},
                                        [](const UserContext&, const MessageUnderstanding&) {
                                            PlanOutcome out;
                                            out.effect("submit_claim");
                                            out.say("claim_submitted");
                                            for (const auto& st : kClaimStates) out.drop(st);
                                            out.layer(DialogState::bounded(kClaimSubmitted, kShortLifetime));
                                            return out;
                                        }));
    b.on_state(kConfirmSubmission,
               make<NegationHandler>({kChooseCorrection}, {"choose_correction"},
                                     [R](const UserContext&, const MessageUnderstanding&) {
                                         PlanOutcome out;
                                         out.layer(DialogState::bounded(kChooseCorrection, kShortLifetime, kMenuPriority));
                                         R->correction_menu(out);
                                         return out;
                                     }));
    b.on_state(kChooseCorrection,
               make<IntentHandler>(kAdvanceStates, {"invalid_option", "choose_correction", "ask_damage_type",
                                                    "ask_phone_model", "ask_phone_number", "ask_imei",
                                                    "ask_damage_date", "ask_event_details"},
                                   std::string(kOptionSelectedIntent),
                                   [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                                       PlanOutcome out;
                                       const auto option = mu.parameters.at(std::string(kOptionEntity));
                                       if (std::find(kSlotOrder.begin(), kSlotOrder.end(), option) == kSlotOrder.end()) {
                                           out.say("invalid_option");
                                           R->correction_menu(out);
                                           return out;
                                       }
                                       out.clear_slot(option);
                                       out.clear_slot(mention_slot(option));
                                       R->advance(out, ctx);
                                       return out;
                                   },
                                   requires_option()));

    // Fallbacks: claim intents start a claim (or are noted while one runs),
    // then small talk, media, sentiment and repair.
    for (const auto& intent : kClaimIntents) {
        b.fallback(make<IntentHandler>(
            kAdvanceStates, {"claim_start", "claim_in_progress", "noted_for_later", "ask_damage_type", "ask_phone_model",
                             "confirm_damage_type", "confirm_phone_model", "confirm_damage_date", "clarify_phone_model"},
            intent, [R](const UserContext& ctx, const MessageUnderstanding& mu) {
                PlanOutcome out;
                if (!claim_in_progress(ctx)) {
                    out.say("claim_start");
                    for (const auto& slot : kSlotOrder) {
                        if (ctx.slots.count(slot)) out.clear_slot(slot);
                    }
                    out.drop(kClaimSubmitted);
                    R->advance(out, ctx);
                    return out;
                }
                const bool mentioned = std::any_of(kMentionable.begin(), kMentionable.end(),
                                                   [&](const std::string& s) { return mu.has(s); });
                out.say(mentioned ? "noted_for_later" : "claim_in_progress");
                R->reprompt(out, ctx);
                return out;
            }));
    }

    auto small_talk = [&](const std::string& intent, const std::string& tmpl, bool offer,
                          std::map<std::string, std::optional<std::string>> required = {}) {
        b.fallback(make<IntentHandler>({}, {tmpl}, intent,
                                       [R, tmpl, offer](const UserContext& ctx, const MessageUnderstanding&) {
                                           PlanOutcome out;
                                           out.say(tmpl);
                                           if (offer) R->reprompt_or_offer(out, ctx);
                                           else R->reprompt(out, ctx);
                                           return out;
                                       },
                                       std::move(required)));
    };
    small_talk("help", "help", false);
    small_talk("greeting", "greeting", true);
    small_talk("joke", "joke", false);
    small_talk("how_are_you", "how_are_you", false);
    small_talk("thanks", "you_are_welcome", false);
    small_talk("bot_identity", "bot_identity", false);
    small_talk("introduce_name", "nice_to_meet", false, {{"user_name", std::nullopt}});
    b.fallback(make<IntentHandler>({}, {"goodbye"}, "goodbye", [](const UserContext&, const MessageUnderstanding&) {
        return PlanOutcome{}.say("goodbye");
    }));

    auto repair = [R](std::string tmpl) {
        return [R, tmpl](const UserContext& ctx, const MessageUnderstanding&) {
            PlanOutcome out;
            out.say(tmpl);
            R->reprompt_or_offer(out, ctx);
            return out;
        };
    };
    b.fallback(make<MediaHandler>({}, {"image_received"}, std::set<MediaKind>{MediaKind::image, MediaKind::other},
                                  repair("image_received")));
    b.fallback(make<MediaHandler>({}, {"audio_unsupported"}, std::set<MediaKind>{MediaKind::audio},
                                  repair("audio_unsupported")));
    b.fallback(make<EmojiSentimentHandler>({}, {"empathy"}, std::set<Sentiment>{Sentiment::negative}, repair("empathy")));
    b.fallback(make<EmojiSentimentHandler>({}, {"glad"}, std::set<Sentiment>{Sentiment::positive}, repair("glad")));
    b.fallback(make<AffirmationHandler>({}, {"affirm_unexpected"}, repair("affirm_unexpected")));
    b.fallback(make<NegationHandler>({}, {"deny_unexpected"}, repair("deny_unexpected")));
    b.fallback(make<IntentHandler>({}, {"stale_option"}, std::string(kOptionSelectedIntent), repair("stale_option")));
    b.fallback(make<IntentHandler>({}, {"number_unexpected"}, "give_number", repair("number_unexpected")));
    b.fallback(make<RegexHandler>({}, {"not_understood"}, ".*", repair("not_understood")));

    return b.build(templates);
}

Json to_json(const ClaimRecord& r) {
    return Json{{"claim_id", r.claim_id},
                {"channel_id", r.user.channel_id},
                {"user_id", r.user.user_id},
                {"submitted_at", format_timestamp(r.submitted_at)},
                {"fields", r.fields}};
}

ClaimRecord claim_from_json(const Json& j) {
    ClaimRecord r;
    r.claim_id = j.at("claim_id").get<std::string>();
    r.user = {j.at("channel_id").get<std::string>(), j.at("user_id").get<std::string>()};
    auto t = parse_timestamp(j.at("submitted_at").get<std::string>());
    if (!t) throw ClaimError("claim " + r.claim_id + ": bad submitted_at");
    r.submitted_at = *t;
    r.fields = j.at("fields").get<std::map<std::string, std::string>>();
    return r;
}

std::vector<std::string> claim_problems(const std::map<std::string, std::string>& fields, Date today) {
    std::vector<std::string> problems;
    auto get = [&](const std::string& slot) -> const std::string* {
        auto it = fields.find(slot);
        return it == fields.end() || trim(it->second).empty() ? nullptr : &it->second;
    };
    for (const auto& slot : kSlotOrder) {
        if (!get(slot)) problems.push_back("missing " + slot);
    }
    if (auto v = get("damage_type"); v && std::find(kDamageTypes.begin(), kDamageTypes.end(), *v) == kDamageTypes.end()) {
        problems.push_back("unknown damage_type '" + *v + "'");
    }
    if (auto v = get("phone_number"); v && !valid_phone_number(*v)) problems.push_back("invalid phone_number");
    if (auto v = get("imei"); v && !validate_imei(*v)) problems.push_back("invalid imei");
    if (auto v = get("damage_date")) {
        auto d = parse_date(*v);
        if (!d) {
            problems.push_back("malformed damage_date '" + *v + "'");
        } else if (*d > today) {
            problems.push_back("damage_date in the future");
        }
    }
    return problems;
}

std::string format_claim_id(Date day, std::uint64_t sequence) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "CLM-%04d%02u%02u-%06llu", static_cast<int>(day.year()),
                  static_cast<unsigned>(day.month()), static_cast<unsigned>(day.day()),
                  static_cast<unsigned long long>(sequence));
    return buf;
}

std::string MemoryClaimStore::submit(ClaimRecord record) {
    std::lock_guard lock(mu_);
    record.claim_id = format_claim_id(date_of(record.submitted_at), records_.size() + 1);
    records_.push_back(record);
    return record.claim_id;
}

std::vector<ClaimRecord> MemoryClaimStore::list() const {
    std::lock_guard lock(mu_);
    return records_;
}

FileClaimStore::FileClaimStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string FileClaimStore::submit(ClaimRecord record) {
    std::lock_guard lock(mu_);
    std::uint64_t seq = 1;
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
        if (e.path().extension() == ".json") ++seq;
    }
    const Date day = date_of(record.submitted_at);
    for (;; ++seq) {
        record.claim_id = format_claim_id(day, seq);
        const auto path = dir_ / (record.claim_id + ".json");
        std::FILE* f = std::fopen(path.c_str(), "wx");
        if (!f) {
            if (std::filesystem::exists(path)) continue;
            throw ClaimError("cannot create " + path.string());
        }
        const std::string body = to_json(record).dump(2) + "\n";
        const bool ok = std::fwrite(body.data(), 1, body.size(), f) == body.size();
        std::fclose(f);
        if (!ok) throw ClaimError("short write to " + path.string());
        return record.claim_id;
    }
}

std::vector<ClaimRecord> FileClaimStore::list() const {
    std::vector<ClaimRecord> out;
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
        if (e.path().extension() != ".json") continue;
        out.push_back(claim_from_json(read_json_file(e.path())));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.claim_id < b.claim_id; });
    return out;
}

std::map<std::string, std::string> ClaimEffects::run(const std::string& effect, const UserContext& ctx,
                                                     const InboundMessage& inbound) {
    if (effect != "submit_claim") throw ClaimError("unknown effect '" + effect + "'");
    ClaimRecord record;
    record.user = ctx.key;
    record.submitted_at = inbound.timestamp;
    for (const auto& slot : kSlotOrder) {
        if (auto v = ctx.slot(slot)) record.fields[slot] = *v;
    }
    const auto problems = claim_problems(record.fields, date_of(inbound.timestamp));
    if (!problems.empty()) throw ClaimError("claim not submittable: " + problems.front());
    return {{"claim_id", store_->submit(std::move(record))}};
}

}  // namespace convo::claim
