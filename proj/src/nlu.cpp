#include "convo/nlu.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace convo {
namespace {

// Word boundaries that also hold next to UTF-8 letters, which std::regex's \b
// treats as non-word bytes.
constexpr std::string_view kLeft = "(?:^|[^a-z0-9_])";
constexpr std::string_view kRight = "(?=$|[^a-z0-9_])";

std::string escape_regex(std::string_view s) {
    std::string out;
    bool last_space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            if (!last_space) out += "\\s+";
            last_space = true;
            continue;
        }
        last_space = false;
        if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) out += '\\';
        out += c;
    }
    return out;
}

std::regex compile(const std::string& pattern, const std::string& where) {
    try {
        return std::regex(pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error& e) {
        throw CatalogError(where + ": invalid regex '" + pattern + "': " + e.what());
    }
}

std::string keyword_regex(const std::vector<std::string>& words) {
    std::string alt;
    for (const auto& w : words) {
        if (!alt.empty()) alt += '|';
        alt += escape_regex(to_lower_ascii(trim(w)));
    }
    return std::string(kLeft) + "(?:" + alt + ")" + std::string(kRight);
}

bool is_builtin_intent(std::string_view name) {
    return name == kFallbackIntent || name == kOptionSelectedIntent || name == kMediaReceivedIntent;
}

EntityKind entity_kind_from_string(const std::string& s, const std::string& where) {
    if (s == "enumerated") return EntityKind::enumerated;
    if (s == "date") return EntityKind::date;
    if (s == "digit_string") return EntityKind::digit_string;
    if (s == "free_text") return EntityKind::free_text;
    throw CatalogError(where + ": unknown entity kind '" + s + "'");
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return it->get<T>();
}

}  // namespace

std::string_view to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::enumerated: return "enumerated";
        case EntityKind::date: return "date";
        case EntityKind::digit_string: return "digit_string";
        case EntityKind::free_text: return "free_text";
    }
    return "free_text";
}

Json to_json(const MessageUnderstanding& mu) {
    Json j{{"intent", mu.intent},
           {"confidence", mu.confidence},
           {"parameters", mu.parameters},
           {"raw_text", mu.raw_text},
           {"sentiment", to_string(mu.sentiment)},
           {"reference_date", format_date(mu.reference_date)}};
    if (mu.media_kind) j["media_kind"] = to_string(*mu.media_kind);
    return j;
}

Catalog::Catalog(std::string language, double threshold, std::vector<EntitySpec> entities,
                 std::vector<IntentSpec> intents, EmojiLexicon lexicon)
    : language_(std::move(language)), threshold_(threshold), intents_(std::move(intents)), lexicon_(std::move(lexicon)) {
    if (!(threshold_ > 0.0 && threshold_ <= 1.0)) throw CatalogError("threshold must be in (0, 1]");
    if (intents_.empty()) throw CatalogError("catalog has no intents");

    for (auto& e : entities) {
        const std::string where = "entity '" + e.name + "'";
        if (e.name.empty()) throw CatalogError("entity with empty name");
        if (e.name == kOptionEntity) throw CatalogError(where + ": name is reserved");
        if (entities_.count(e.name)) throw CatalogError(where + ": duplicate entity");
        if (e.kind == EntityKind::enumerated) {
            if (e.values.empty()) throw CatalogError(where + ": enumerated entity needs at least one value");
            std::vector<CompiledSynonym> syns;
            for (auto& [canonical, surface] : e.values) {
                if (canonical.empty()) throw CatalogError(where + ": empty canonical value");
                std::set<std::string> forms(surface.begin(), surface.end());
                if (forms.empty()) forms.insert(canonical);
                for (const auto& s : forms) {
                    const auto t = trim(s);
                    if (t.empty()) continue;
                    syns.push_back({compile(keyword_regex({t}), where), canonical, t.size()});
                }
            }
            synonyms_[e.name] = std::move(syns);
        }
        if (e.kind == EntityKind::digit_string && (e.min_length == 0 || e.min_length > e.max_length)) {
            throw CatalogError(where + ": bad digit length bounds");
        }
        if (e.kind == EntityKind::free_text && e.capture) {
            captures_[e.name] = compile(*e.capture, where);
        }
        entities_.emplace(e.name, std::move(e));
    }

    std::set<std::string> names;
    for (const auto& intent : intents_) {
        const std::string where = "intent '" + intent.name + "'";
        if (intent.name.empty()) throw CatalogError("intent with empty name");
        if (is_builtin_intent(intent.name)) throw CatalogError(where + ": name is reserved");
        if (!names.insert(intent.name).second) throw CatalogError(where + ": duplicate intent");
        if (intent.patterns.empty()) throw CatalogError(where + ": needs at least one pattern");
        for (const auto& ent : intent.entities) {
            if (!entities_.count(ent)) throw CatalogError(where + ": unknown entity '" + ent + "'");
        }
        CompiledIntent ci;
        for (const auto& p : intent.patterns) {
            if (!(p.weight > 0.0)) throw CatalogError(where + ": pattern weight must be positive");
            CompiledPattern cp{p.kind, {}, p.entity, p.weight};
            switch (p.kind) {
                case PatternSpec::Kind::keywords:
                    if (p.keywords.empty()) throw CatalogError(where + ": empty keyword list");
                    cp.regex = compile(keyword_regex(p.keywords), where);
                    break;
                case PatternSpec::Kind::regex:
                    cp.regex = compile(p.regex, where);
                    break;
                case PatternSpec::Kind::entity:
                    if (!entities_.count(p.entity)) throw CatalogError(where + ": pattern names unknown entity '" + p.entity + "'");
                    break;
            }
            ci.total_weight += p.weight;
            ci.patterns.push_back(std::move(cp));
        }
        compiled_.push_back(std::move(ci));
    }
}

Catalog Catalog::from_json(const Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw CatalogError("catalog must be a JSON object");
    try {
        std::vector<EntitySpec> entities;
        for (const auto& e : j.value("entities", Json::array())) {
            EntitySpec spec;
            spec.name = e.at("name").get<std::string>();
            spec.kind = entity_kind_from_string(e.at("kind").get<std::string>(), "entity '" + spec.name + "'");
            if (auto it = e.find("values"); it != e.end()) {
                for (auto v = it->begin(); v != it->end(); ++v) {
                    spec.values[v.key()] = v->get<std::vector<std::string>>();
                }
            }
            spec.min_length = get_or<std::size_t>(e, "min_length", 1);
            spec.max_length = get_or<std::size_t>(e, "max_length", 64);
            if (auto it = e.find("capture"); it != e.end()) spec.capture = it->get<std::string>();
            entities.push_back(std::move(spec));
        }
        std::vector<IntentSpec> intents;
        for (const auto& i : j.at("intents")) {
            IntentSpec spec;
            spec.name = i.at("name").get<std::string>();
            for (const auto& p : i.at("patterns")) {
                PatternSpec ps;
                ps.weight = get_or<double>(p, "weight", 1.0);
                if (p.contains("keywords")) {
                    ps.kind = PatternSpec::Kind::keywords;
                    ps.keywords = p["keywords"].get<std::vector<std::string>>();
                } else if (p.contains("regex")) {
                    ps.kind = PatternSpec::Kind::regex;
                    ps.regex = p["regex"].get<std::string>();
                } else if (p.contains("entity")) {
                    ps.kind = PatternSpec::Kind::entity;
                    ps.entity = p["entity"].get<std::string>();
                } else {
                    throw CatalogError("intent '" + spec.name + "': pattern needs keywords, regex or entity");
                }
                spec.patterns.push_back(std::move(ps));
            }
            spec.entities = i.value("entities", std::vector<std::string>{});
            intents.push_back(std::move(spec));
        }
        EmojiLexicon lexicon;
        if (auto it = j.find("emoji_lexicon"); it != j.end()) {
            if (it->is_string()) {
                std::filesystem::path p = it->get<std::string>();
                if (p.is_relative()) p = base_dir / p;
                lexicon = EmojiLexicon::load(p);
            } else {
                lexicon = EmojiLexicon::from_json(*it);
            }
        }
        return Catalog(j.value("language", std::string("en")), j.value("threshold", 0.5), std::move(entities),
                       std::move(intents), std::move(lexicon));
    } catch (const Json::exception& e) {
        throw CatalogError(std::string("catalog schema: ") + e.what());
    }
}

Catalog Catalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("cannot open catalog " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw CatalogError("catalog " + path.string() + ": malformed JSON");
    return from_json(j, path.parent_path());
}

const IntentSpec* Catalog::find_intent(std::string_view name) const {
    for (const auto& i : intents_) {
        if (i.name == name) return &i;
    }
    return nullptr;
}

const EntitySpec* Catalog::find_entity(std::string_view name) const {
    auto it = entities_.find(std::string(name));
    return it == entities_.end() ? nullptr : &it->second;
}

std::vector<std::string> Catalog::all_intent_names() const {
    std::vector<std::string> out;
    for (const auto& i : intents_) out.push_back(i.name);
    out.emplace_back(kFallbackIntent);
    out.emplace_back(kOptionSelectedIntent);
    out.emplace_back(kMediaReceivedIntent);
    return out;
}

std::optional<std::string> Catalog::extract(const EntitySpec& entity, std::string_view text, Date reference) const {
    const std::string trimmed = trim(text);
    const std::string lowered = to_lower_ascii(trimmed);
    switch (entity.kind) {
        case EntityKind::enumerated: {
            auto it = synonyms_.find(entity.name);
            if (it == synonyms_.end()) return std::nullopt;
            const CompiledSynonym* best = nullptr;
            std::ptrdiff_t best_pos = 0;
            std::smatch m;
            for (const auto& syn : it->second) {
                if (!std::regex_search(lowered, m, syn.regex)) continue;
                const auto pos = m.position(0);
                if (!best || syn.length > best->length ||
                    (syn.length == best->length && (pos < best_pos || (pos == best_pos && syn.canonical < best->canonical)))) {
                    best = &syn;
                    best_pos = pos;
                }
            }
            if (!best) return std::nullopt;
            return best->canonical;
        }
        case EntityKind::date: {
            auto d = scan_date(trimmed, reference);
            if (!d) return std::nullopt;
            return format_date(*d);
        }
        case EntityKind::digit_string: {
            static const std::regex run(R"(\+?\d(?:[\d \-/]*\d)?)");
            std::optional<std::string> best;
            for (auto it = std::sregex_iterator(trimmed.begin(), trimmed.end(), run); it != std::sregex_iterator(); ++it) {
                std::string digits;
                for (char c : it->str()) {
                    if (c >= '0' && c <= '9') digits += c;
                }
                if (digits.size() < entity.min_length || digits.size() > entity.max_length) continue;
                if (!best || digits.size() > best->size()) best = std::move(digits);
            }
            return best;
        }
        case EntityKind::free_text: {
            if (trimmed.empty()) return std::nullopt;
            auto cap = captures_.find(entity.name);
            if (cap == captures_.end()) return trimmed;
            std::smatch m;
            if (!std::regex_search(trimmed, m, cap->second) || m.size() < 2 || !m[1].matched) return std::nullopt;
            auto value = trim(m.str(1));
            if (value.empty()) return std::nullopt;
            return value;
        }
    }
    return std::nullopt;
}

MessageUnderstanding Catalog::understand(std::string_view text, Date reference) const {
    MessageUnderstanding mu;
    mu.raw_text = trim(text);
    mu.reference_date = reference;
    mu.sentiment = emoji_sentiment(mu.raw_text, lexicon_);
    const std::string lowered = to_lower_ascii(mu.raw_text);

    std::map<std::string, std::optional<std::string>> extracted;
    auto entity_value = [&](const std::string& name) -> const std::optional<std::string>& {
        auto it = extracted.find(name);
        if (it == extracted.end()) {
            it = extracted.emplace(name, extract(entities_.at(name), mu.raw_text, reference)).first;
        }
        return it->second;
    };

    const IntentSpec* best = nullptr;
    double best_score = -1.0;
    for (std::size_t i = 0; i < intents_.size(); ++i) {
        const auto& ci = compiled_[i];
        double matched = 0.0;
        for (const auto& p : ci.patterns) {
            bool hit = false;
            if (p.kind == PatternSpec::Kind::entity) {
                hit = entity_value(p.entity).has_value();
            } else {
                hit = std::regex_search(lowered, p.regex);
            }
            if (hit) matched += p.weight;
        }
        const double score = matched / ci.total_weight;
        if (score > best_score || (score == best_score && best && intents_[i].name < best->name)) {
            best = &intents_[i];
            best_score = score;
        }
    }

    if (!best || best_score < threshold_) return mu;

    mu.intent = best->name;
    mu.confidence = std::clamp(best_score, 0.0, 1.0);
    for (const auto& ent : best->entities) {
        if (const auto& v = entity_value(ent)) mu.parameters[ent] = *v;
    }
    return mu;
}

MessageUnderstanding understand(std::string_view text, const Catalog& catalog, Date reference) {
    return catalog.understand(text, reference);
}

MessageUnderstanding understand_option(std::string_view option_id, Date reference) {
    MessageUnderstanding mu;
    mu.intent = kOptionSelectedIntent;
    mu.confidence = 1.0;
    mu.parameters[std::string(kOptionEntity)] = std::string(option_id);
    mu.raw_text = std::string(option_id);
    mu.reference_date = reference;
    return mu;
}

MessageUnderstanding understand_media(MediaKind kind, Date reference) {
    MessageUnderstanding mu;
    mu.intent = kMediaReceivedIntent;
    mu.confidence = 1.0;
    mu.media_kind = kind;
    mu.reference_date = reference;
    return mu;
}

}  // namespace convo
