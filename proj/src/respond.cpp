#include "convo/respond.hpp"

#include <fstream>
#include <regex>

namespace convo {
namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& fills,
                       const std::string& template_id) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            auto close = text.find('}', i);
            if (close != std::string_view::npos) {
                const std::string name(text.substr(i + 1, close - i - 1));
                auto it = fills.find(name);
                if (it == fills.end()) {
                    throw TemplateError(template_id, "template '" + template_id + "': missing placeholder '" + name + "'");
                }
                out += it->second;
                i = close + 1;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

}  // namespace

std::string_view to_string(FormalityLevel level) {
    return level == FormalityLevel::formal ? "formal" : "informal";
}

std::string_view to_string(FormalitySource source) {
    switch (source) {
        case FormalitySource::by_default: return "default";
        case FormalitySource::detected: return "detected";
        case FormalitySource::explicit_choice: return "explicit";
    }
    return "default";
}

std::optional<FormalityLevel> formality_level_from_string(std::string_view s) {
    if (s == "formal") return FormalityLevel::formal;
    if (s == "informal") return FormalityLevel::informal;
    return std::nullopt;
}

std::optional<FormalitySource> formality_source_from_string(std::string_view s) {
    if (s == "default") return FormalitySource::by_default;
    if (s == "detected") return FormalitySource::detected;
    if (s == "explicit") return FormalitySource::explicit_choice;
    return std::nullopt;
}

std::optional<Formality> detect_formality(std::string_view text) {
    static const std::set<std::string> informal = {"du", "dich", "dir", "dein", "deine", "deinen",
                                                   "deinem", "deiner", "deines"};
    static const std::set<std::string> formal_mid = {"Sie", "Ihr", "Ihre", "Ihren", "Ihrem", "Ihrer", "Ihres"};

    bool saw_informal = false;
    bool saw_formal = false;
    bool sentence_start = true;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (!is_word_byte(c)) {
            if (c == '.' || c == '!' || c == '?') sentence_start = true;
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
        const std::string word(text.substr(i, j - i));
        if (informal.count(to_lower_ascii(word))) saw_informal = true;
        if (word == "Ihnen" || (!sentence_start && formal_mid.count(word))) saw_formal = true;
        sentence_start = false;
        i = j;
    }
    if (saw_informal == saw_formal) return std::nullopt;
    return Formality{saw_informal ? FormalityLevel::informal : FormalityLevel::formal, FormalitySource::detected};
}

std::set<std::string> placeholders_in(std::string_view text) {
    std::set<std::string> out;
    std::size_t i = 0;
    while ((i = text.find('{', i)) != std::string_view::npos) {
        auto close = text.find('}', i);
        if (close == std::string_view::npos) break;
        out.emplace(text.substr(i + 1, close - i - 1));
        i = close + 1;
    }
    return out;
}

TemplateTable::TemplateTable(std::string language, std::vector<ResponseTemplate> templates)
    : language_(std::move(language)) {
    for (auto& t : templates) {
        if (t.id.empty()) throw TemplateError("", "template with empty id");
        for (auto level : {FormalityLevel::formal, FormalityLevel::informal}) {
            auto it = t.variants.find(level);
            if (it == t.variants.end() || it->second.empty()) {
                throw TemplateError(t.id, "template '" + t.id + "': missing " + std::string(to_string(level)) + " variant");
            }
            for (const auto& text : it->second) {
                if (placeholders_in(text) != t.placeholders) {
                    throw TemplateError(t.id, "template '" + t.id + "': variant \"" + text +
                                                  "\" does not use exactly the declared placeholders");
                }
            }
        }
        if (templates_.count(t.id)) throw TemplateError(t.id, "template '" + t.id + "': duplicate id");
        templates_.emplace(t.id, std::move(t));
    }
}

TemplateTable TemplateTable::from_json(const Json& j) {
    if (!j.is_object() || !j.contains("templates") || !j["templates"].is_array()) {
        throw TemplateError("", "template file must be an object with a \"templates\" array");
    }
    const std::string language = j.value("language", std::string("en"));
    std::vector<ResponseTemplate> out;
    for (const auto& t : j["templates"]) {
        ResponseTemplate rt;
        try {
            rt.id = t.at("id").get<std::string>();
            rt.repair = t.value("repair", false);
            if (t.contains("formal")) rt.variants[FormalityLevel::formal] = t["formal"].get<std::vector<std::string>>();
            if (t.contains("informal")) rt.variants[FormalityLevel::informal] = t["informal"].get<std::vector<std::string>>();
            if (t.contains("placeholders")) {
                auto ph = t["placeholders"].get<std::vector<std::string>>();
                rt.placeholders = {ph.begin(), ph.end()};
            }
            if (t.contains("text")) {
                if (language != "en") {
                    throw TemplateError(rt.id, "template '" + rt.id + "': \"text\" shorthand only allowed for English");
                }
                auto texts = t["text"].get<std::vector<std::string>>();
                rt.variants.try_emplace(FormalityLevel::formal, texts);
                rt.variants.try_emplace(FormalityLevel::informal, texts);
            }
        } catch (const Json::exception& e) {
            throw TemplateError(rt.id, "template '" + rt.id + "': " + e.what());
        }
        // Undeclared placeholders are taken from the first variant; the
        // constructor then checks every other variant against them.
        if (!t.contains("placeholders") && !rt.variants.empty() && !rt.variants.begin()->second.empty()) {
            rt.placeholders = placeholders_in(rt.variants.begin()->second.front());
        }
        out.push_back(std::move(rt));
    }
    return TemplateTable(language, std::move(out));
}

TemplateTable TemplateTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TemplateError("", "cannot open template file " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw TemplateError("", "template file " + path.string() + ": malformed JSON");
    return from_json(j);
}

const ResponseTemplate* TemplateTable::find(std::string_view id) const {
    auto it = templates_.find(std::string(id));
    return it == templates_.end() ? nullptr : &it->second;
}

std::vector<std::string> TemplateTable::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

std::string TemplateTable::render(std::string_view id, FormalityLevel level,
                                  const std::map<std::string, std::string>& fills, std::uint64_t seed) const {
    const auto* t = find(id);
    if (!t) throw TemplateError(std::string(id), "unknown template '" + std::string(id) + "'");
    for (const auto& p : t->placeholders) {
        if (!fills.count(p)) throw TemplateError(t->id, "template '" + t->id + "': missing placeholder '" + p + "'");
    }
    const auto& variants = t->variants.at(level);
    const auto index = splitmix(fnv1a(t->id) ^ splitmix(seed)) % variants.size();
    return substitute(variants[index], fills, t->id);
}

std::string render(const TemplateTable& table, std::string_view template_id, Formality formality,
                   const std::map<std::string, std::string>& fills, std::uint64_t variant_seed) {
    return table.render(template_id, formality.level, fills, variant_seed);
}

std::vector<std::string> lint_templates(const TemplateTable& table) {
    std::vector<std::string> problems;
    for (const auto& [id, t] : table.all()) {
        std::map<std::string, std::string> fills;
        for (const auto& p : t.placeholders) fills[p] = "<" + p + ">";
        for (auto level : {FormalityLevel::formal, FormalityLevel::informal}) {
            const auto& variants = t.variants.at(level);
            for (std::uint64_t seed = 0; seed < variants.size() * 8; ++seed) {
                try {
                    auto text = table.render(id, level, fills, seed);
                    if (trim(text).empty()) problems.push_back("template '" + id + "': renders empty text");
                } catch (const std::exception& e) {
                    problems.push_back(e.what());
                }
            }
        }
    }
    return problems;
}

TemplateSource::TemplateSource(std::filesystem::path path, bool hot_reload)
    : table_(std::make_shared<const TemplateTable>(TemplateTable::load(path))),
      path_(std::move(path)),
      hot_reload_(hot_reload) {
    std::error_code ec;
    loaded_at_ = std::filesystem::last_write_time(path_, ec);
}

std::shared_ptr<const TemplateTable> TemplateSource::current() const {
    std::lock_guard lock(mu_);
    if (hot_reload_) {
        std::error_code ec;
        const auto stamp = std::filesystem::last_write_time(path_, ec);
        if (!ec && stamp != loaded_at_) {
            try {
                table_ = std::make_shared<const TemplateTable>(TemplateTable::load(path_));
                loaded_at_ = stamp;
            } catch (const std::exception&) {
                // keep serving the last good table; `validate` reports the error
            }
        }
    }
    return table_;
}

}  // namespace convo
