#pragma once

// Phone-insurance damage claim scenario: slot filling over six claim fields,
// confirmation of out-of-order mentions, and claim submission.

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "convo/calendar.hpp"
#include "convo/dialog.hpp"
#include "convo/engine.hpp"

namespace convo::claim {

inline const std::string kAskDamageType = "ASK_DAMAGE_TYPE";
inline const std::string kAskPhoneModel = "ASK_PHONE_MODEL";
inline const std::string kAskPhoneNumber = "ASK_PHONE_NUMBER";
inline const std::string kAskImei = "ASK_IMEI";
inline const std::string kAskDamageDate = "ASK_DAMAGE_DATE";
inline const std::string kAskEventDetails = "ASK_EVENT_DETAILS";
inline const std::string kClarifyPhoneModel = "CLARIFY_PHONE_MODEL";
inline const std::string kUserConfirmingAnswer = "USER_CONFIRMING_ANSWER";
inline const std::string kConfirmSubmission = "CONFIRM_SUBMISSION";
inline const std::string kChooseCorrection = "CHOOSE_CORRECTION";
inline const std::string kClaimSubmitted = "CLAIM_SUBMITTED";

/// Claim fields in the order they are asked.
inline const std::array<std::string, 6> kSlotOrder = {"damage_type", "phone_model", "phone_number",
                                                      "imei",        "damage_date", "event_details"};
inline const std::array<std::string, 4> kDamageTypes = {"display_damage", "water_damage", "theft", "other"};

/// Intents that carry claim information and may start a claim.
inline const std::array<std::string, 4> kClaimIntents = {"report_claim", "phone_broken", "give_phone_model",
                                                         "give_date"};

std::string ask_state_for(const std::string& slot);
std::string mention_slot(const std::string& slot);

/// Phone numbers are accepted with 6 to 15 digits.
bool valid_phone_number(const std::string& digits);

struct PhoneModel {
    std::string id;
    std::string name;
    std::string family;
};

class PhoneCatalog {
public:
    static PhoneCatalog from_json(const Json& j);
    static PhoneCatalog load(const std::filesystem::path& path);

    const PhoneModel* find_model(const std::string& id) const;
    bool is_family(const std::string& id) const { return families_.count(id) != 0; }
    /// Models of a family in catalog order.
    std::vector<PhoneModel> family_models(const std::string& family) const;
    /// Display name of a model or family id; the id itself when unknown.
    std::string display_name(const std::string& id) const;
    const std::vector<PhoneModel>& models() const noexcept { return models_; }
    std::vector<std::string> family_ids() const;

private:
    std::vector<PhoneModel> models_;
    std::map<std::string, std::string> families_;
};

/// Language-specific labels plus the phone catalog.
struct Scenario {
    std::string language = "en";
    bool dmy_dates = false;
    std::map<std::string, std::string> damage_labels;
    std::map<std::string, std::string> slot_labels;
    PhoneCatalog phones;

    /// Reads `<data_dir>/<language>/scenario.json` and `<data_dir>/phones.json`.
    static Scenario load(const std::filesystem::path& data_dir, const std::string& language);

    std::string display(const std::string& slot, const std::string& value) const;
    std::vector<QuickReplyOption> damage_menu() const;
    std::vector<QuickReplyOption> correction_menu() const;
    std::vector<QuickReplyOption> model_menu(const std::string& family) const;
};

/// Checks that every phone_model synonym in the NLU catalog names a known
/// model or family, and every damage type has a label. Returns problems.
std::vector<std::string> cross_check(const Scenario& scenario, const Catalog& catalog);

/// The dialog rules of the claim scenario.
RuleTable build_rules(std::shared_ptr<const Scenario> scenario, const TemplateTable* templates = nullptr);

struct ClaimRecord {
    std::string claim_id;
    UserKey user;
    Timestamp submitted_at{};
    std::map<std::string, std::string> fields;

    bool operator==(const ClaimRecord&) const = default;
};

Json to_json(const ClaimRecord& record);
ClaimRecord claim_from_json(const Json& j);

/// Problems that make a claim unsubmittable on `today`: missing slots, a
/// damage type outside kDamageTypes, a bad phone number or IMEI, a
/// malformed or future damage date, empty event details.
std::vector<std::string> claim_problems(const std::map<std::string, std::string>& fields, Date today);

class ClaimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Persists submitted claims and assigns ids `CLM-YYYYMMDD-NNNNNN`.
class ClaimStore {
public:
    virtual ~ClaimStore() = default;
    virtual std::string submit(ClaimRecord record) = 0;
    virtual std::vector<ClaimRecord> list() const = 0;
};

class MemoryClaimStore final : public ClaimStore {
public:
    std::string submit(ClaimRecord record) override;
    std::vector<ClaimRecord> list() const override;

private:
    mutable std::mutex mu_;
    std::vector<ClaimRecord> records_;
};

/// One JSON file per claim in `dir`; ids are reserved with exclusive file
/// creation so several processes can share the directory.
class FileClaimStore final : public ClaimStore {
public:
    explicit FileClaimStore(std::filesystem::path dir);
    std::string submit(ClaimRecord record) override;
    std::vector<ClaimRecord> list() const override;

private:
    std::filesystem::path dir_;
    std::mutex mu_;
};

std::string format_claim_id(Date day, std::uint64_t sequence);

/// Executes the "submit_claim" effect against a claim store.
class ClaimEffects final : public EffectRunner {
public:
    explicit ClaimEffects(std::shared_ptr<ClaimStore> store) : store_(std::move(store)) {}
    std::map<std::string, std::string> run(const std::string& effect, const UserContext& ctx,
                                           const InboundMessage& inbound) override;

private:
    std::shared_ptr<ClaimStore> store_;
};

}  // namespace convo::claim
