#include "convo/sentiment.hpp"

#include <fstream>

namespace convo {
namespace {

std::optional<char32_t> parse_code_point(std::string_view s) {
    if (s.size() < 3 || (s[0] != 'U' && s[0] != 'u') || s[1] != '+') return std::nullopt;
    s.remove_prefix(2);
    if (s.empty() || s.size() > 6) return std::nullopt;
    char32_t cp = 0;
    for (char c : s) {
        cp <<= 4;
        if (c >= '0' && c <= '9') cp |= static_cast<char32_t>(c - '0');
        else if (c >= 'a' && c <= 'f') cp |= static_cast<char32_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') cp |= static_cast<char32_t>(c - 'A' + 10);
        else return std::nullopt;
    }
    return cp;
}

}  // namespace

std::string_view to_string(Sentiment s) {
    switch (s) {
        case Sentiment::negative: return "negative";
        case Sentiment::neutral: return "neutral";
        case Sentiment::positive: return "positive";
    }
    return "neutral";
}

std::optional<Sentiment> sentiment_from_string(std::string_view s) {
    if (s == "negative") return Sentiment::negative;
    if (s == "neutral") return Sentiment::neutral;
    if (s == "positive") return Sentiment::positive;
    return std::nullopt;
}

std::vector<char32_t> utf8_code_points(std::string_view text) {
    std::vector<char32_t> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        int len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) { cp = b0; len = 1; }
        else if ((b0 & 0xE0) == 0xC0) { cp = b0 & 0x1F; len = 2; }
        else if ((b0 & 0xF0) == 0xE0) { cp = b0 & 0x0F; len = 3; }
        else if ((b0 & 0xF8) == 0xF0) { cp = b0 & 0x07; len = 4; }
        else { out.push_back(0xFFFD); ++i; continue; }
        if (i + len > text.size()) { out.push_back(0xFFFD); break; }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) { ok = false; break; }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) { out.push_back(0xFFFD); ++i; continue; }
        out.push_back(cp);
        i += len;
    }
    return out;
}

EmojiLexicon::EmojiLexicon(std::map<char32_t, int> entries, std::string version)
    : entries_(std::move(entries)), version_(std::move(version)) {
    for (auto& [cp, p] : entries_) {
        if (p < -1 || p > 1) throw std::invalid_argument("emoji polarity must be -1, 0 or +1");
    }
}

EmojiLexicon EmojiLexicon::from_json(const Json& j) {
    if (!j.is_object() || !j.contains("entries") || !j["entries"].is_object()) {
        throw std::invalid_argument("emoji lexicon: expected object with \"entries\"");
    }
    std::map<char32_t, int> entries;
    for (auto it = j["entries"].begin(); it != j["entries"].end(); ++it) {
        auto cp = parse_code_point(it.key());
        if (!cp) throw std::invalid_argument("emoji lexicon: bad code point '" + it.key() + "'");
        if (!it->is_number_integer()) throw std::invalid_argument("emoji lexicon: polarity for " + it.key() + " must be an integer");
        const int polarity = it->get<int>();
        if (polarity < -1 || polarity > 1) throw std::invalid_argument("emoji lexicon: polarity for " + it.key() + " must be -1, 0 or 1");
        entries[*cp] = polarity;
    }
    return EmojiLexicon(std::move(entries), j.value("version", std::string{}));
}

EmojiLexicon EmojiLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open emoji lexicon " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("emoji lexicon " + path.string() + ": malformed JSON");
    return from_json(j);
}

std::optional<int> EmojiLexicon::polarity(char32_t cp) const {
    auto it = entries_.find(cp);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

Sentiment emoji_sentiment(std::string_view text, const EmojiLexicon& lexicon) {
    int sum = 0;
    for (char32_t cp : utf8_code_points(text)) {
        if (auto p = lexicon.polarity(cp)) sum += *p;
    }
    if (sum > 0) return Sentiment::positive;
    if (sum < 0) return Sentiment::negative;
    return Sentiment::neutral;
}

}  // namespace convo
