#pragma once

// Template-based response realization with T-V (du/Sie) formality.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "convo/msgmodel.hpp"
#include "convo/sentiment.hpp"

namespace convo {

enum class FormalityLevel { formal, informal };
enum class FormalitySource { by_default, detected, explicit_choice };

struct Formality {
    FormalityLevel level = FormalityLevel::formal;
    FormalitySource source = FormalitySource::by_default;

    bool operator==(const Formality&) const = default;
};

std::string_view to_string(FormalityLevel level);
std::string_view to_string(FormalitySource source);
std::optional<FormalityLevel> formality_level_from_string(std::string_view s);
std::optional<FormalitySource> formality_source_from_string(std::string_view s);

/// Informal when only informal pronouns (du, dich, dein...) occur, formal when
/// only formal address (mid-sentence "Sie", "Ihnen", mid-sentence "Ihr...")
/// occurs. Mixed or pronoun-free text yields nullopt.
std::optional<Formality> detect_formality(std::string_view text);

struct ResponseTemplate {
    std::string id;
    std::map<FormalityLevel, std::vector<std::string>> variants;
    std::set<std::string> placeholders;
    // Repair messages get an empathy prefix when the user's mood is negative.
    bool repair = false;
};

class TemplateError : public std::runtime_error {
public:
    TemplateError(std::string template_id, const std::string& what)
        : std::runtime_error(what), template_id_(std::move(template_id)) {}
    const std::string& template_id() const noexcept { return template_id_; }

private:
    std::string template_id_;
};

/// Placeholder names (`{name}`) appearing in a template string.
std::set<std::string> placeholders_in(std::string_view text);

/// Immutable table of response templates.
///
/// File schema:
///   {"language": "de", "templates": [
///      {"id": "greet", "placeholders": ["name"],
///       "formal": ["Guten Tag {name}!"], "informal": ["Hallo {name}!"]},
///      {"id": "thanks", "text": ["Thanks!"]}]}   // "text" only for language "en"
class TemplateTable {
public:
    TemplateTable() = default;
    TemplateTable(std::string language, std::vector<ResponseTemplate> templates);

    static TemplateTable from_json(const Json& j);
    static TemplateTable load(const std::filesystem::path& path);

    const std::string& language() const noexcept { return language_; }
    const ResponseTemplate* find(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != nullptr; }
    std::vector<std::string> ids() const;
    const std::map<std::string, ResponseTemplate>& all() const noexcept { return templates_; }

    std::string render(std::string_view id, FormalityLevel level, const std::map<std::string, std::string>& fills,
                       std::uint64_t seed) const;

private:
    std::string language_;
    std::map<std::string, ResponseTemplate> templates_;
};

std::string render(const TemplateTable& table, std::string_view template_id, Formality formality,
                   const std::map<std::string, std::string>& fills, std::uint64_t variant_seed);

/// Renders every template under both formalities with dummy fills and
/// returns one diagnostic per failure.
std::vector<std::string> lint_templates(const TemplateTable& table);

/// Holds the current template table; with a source path it can reload the
/// file when it changes on disk.
class TemplateSource {
public:
    explicit TemplateSource(std::shared_ptr<const TemplateTable> table) : table_(std::move(table)) {}
    TemplateSource(std::filesystem::path path, bool hot_reload);

    std::shared_ptr<const TemplateTable> current() const;

private:
    mutable std::mutex mu_;
    mutable std::shared_ptr<const TemplateTable> table_;
    std::filesystem::path path_;
    bool hot_reload_ = false;
    mutable std::filesystem::file_time_type loaded_at_{};
};

}  // namespace convo
