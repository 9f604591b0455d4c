#pragma once

// Deterministic, offline natural-language understanding.
//
// A Catalog lists intents (each with weighted trigger patterns) and the
// entities they may extract. `understand` scores every intent as
// matched-weight / total-weight, picks the best (ties go to the
// lexicographically smallest name) and falls back to the "fallback" intent
// when the best score is below the catalog threshold.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "convo/calendar.hpp"
#include "convo/msgmodel.hpp"
#include "convo/sentiment.hpp"

namespace convo {

inline constexpr std::string_view kFallbackIntent = "fallback";
inline constexpr std::string_view kOptionSelectedIntent = "option_selected";
inline constexpr std::string_view kMediaReceivedIntent = "media_received";
inline constexpr std::string_view kOptionEntity = "option";

struct MessageUnderstanding {
    std::string intent{kFallbackIntent};
    double confidence = 0.0;
    std::map<std::string, std::string> parameters;
    std::string raw_text;
    std::optional<MediaKind> media_kind;
    Sentiment sentiment = Sentiment::neutral;
    Date reference_date{};

    bool is_fallback() const { return intent == kFallbackIntent; }
    bool has(const std::string& param) const { return parameters.count(param) != 0; }
    bool operator==(const MessageUnderstanding&) const = default;
};

Json to_json(const MessageUnderstanding& mu);

enum class EntityKind { enumerated, date, digit_string, free_text };

std::string_view to_string(EntityKind kind);

struct EntitySpec {
    std::string name;
    EntityKind kind = EntityKind::free_text;
    // enumerated: canonical value -> surface synonyms. A value listed without
    // synonyms matches its own spelling.
    std::map<std::string, std::vector<std::string>> values;
    // digit_string bounds, inclusive.
    std::size_t min_length = 1;
    std::size_t max_length = 64;
    // free_text: optional regex whose first group is the value.
    std::optional<std::string> capture;
};

struct PatternSpec {
    enum class Kind { keywords, regex, entity };
    Kind kind = Kind::keywords;
    std::vector<std::string> keywords;  // kind == keywords
    std::string regex;                  // kind == regex
    std::string entity;                 // kind == entity: matches iff the entity extracts
    double weight = 1.0;
};

struct IntentSpec {
    std::string name;
    std::vector<PatternSpec> patterns;
    std::vector<std::string> entities;
};

class CatalogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable intent + entity catalog.
class Catalog {
public:
    Catalog(std::string language, double threshold, std::vector<EntitySpec> entities,
            std::vector<IntentSpec> intents, EmojiLexicon lexicon = {});

    /// Relative paths inside the JSON (the emoji lexicon) resolve against `base_dir`.
    static Catalog from_json(const Json& j, const std::filesystem::path& base_dir = {});
    static Catalog load(const std::filesystem::path& path);

    const std::string& language() const noexcept { return language_; }
    double threshold() const noexcept { return threshold_; }
    const EmojiLexicon& lexicon() const noexcept { return lexicon_; }
    const std::vector<IntentSpec>& intents() const noexcept { return intents_; }
    const std::map<std::string, EntitySpec>& entities() const noexcept { return entities_; }
    const IntentSpec* find_intent(std::string_view name) const;
    const EntitySpec* find_entity(std::string_view name) const;

    /// Every intent the engine can emit: catalog intents plus the built-ins.
    std::vector<std::string> all_intent_names() const;

    /// Runs one entity extractor over the text.
    std::optional<std::string> extract(const EntitySpec& entity, std::string_view text, Date reference) const;

    MessageUnderstanding understand(std::string_view text, Date reference) const;

private:
    struct CompiledPattern {
        PatternSpec::Kind kind;
        std::regex regex;
        std::string entity;
        double weight;
    };
    struct CompiledIntent {
        std::vector<CompiledPattern> patterns;
        double total_weight = 0.0;
    };
    struct CompiledSynonym {
        std::regex regex;
        std::string canonical;
        std::size_t length;
    };

    std::string language_;
    double threshold_;
    std::map<std::string, EntitySpec> entities_;
    std::vector<IntentSpec> intents_;
    std::vector<CompiledIntent> compiled_;
    std::map<std::string, std::vector<CompiledSynonym>> synonyms_;
    std::map<std::string, std::regex> captures_;
    EmojiLexicon lexicon_;
};

/// Pluggable understanding back end. A remote NLU client would implement this.
class Understander {
public:
    virtual ~Understander() = default;
    virtual MessageUnderstanding understand(std::string_view text, Date reference) const = 0;
};

class CatalogUnderstander final : public Understander {
public:
    explicit CatalogUnderstander(std::shared_ptr<const Catalog> catalog) : catalog_(std::move(catalog)) {}
    MessageUnderstanding understand(std::string_view text, Date reference) const override {
        return catalog_->understand(text, reference);
    }
    const Catalog& catalog() const noexcept { return *catalog_; }

private:
    std::shared_ptr<const Catalog> catalog_;
};

MessageUnderstanding understand(std::string_view text, const Catalog& catalog, Date reference);

/// Understanding for a quick-reply selection.
MessageUnderstanding understand_option(std::string_view option_id, Date reference);

/// Understanding for a media message.
MessageUnderstanding understand_media(MediaKind kind, Date reference);

}  // namespace convo
