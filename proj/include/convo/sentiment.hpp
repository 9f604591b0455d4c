#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convo/msgmodel.hpp"

namespace convo {

enum class Sentiment { negative, neutral, positive };

std::string_view to_string(Sentiment s);
std::optional<Sentiment> sentiment_from_string(std::string_view s);

/// Decodes UTF-8 into code points. Malformed sequences decode to U+FFFD.
std::vector<char32_t> utf8_code_points(std::string_view text);

/// Maps emoji code points to a polarity in {-1, 0, +1}.
class EmojiLexicon {
public:
    EmojiLexicon() = default;
    explicit EmojiLexicon(std::map<char32_t, int> entries, std::string version = "");

    /// {"version": "...", "entries": {"U+1F600": 1, ...}}
    static EmojiLexicon from_json(const Json& j);
    static EmojiLexicon load(const std::filesystem::path& path);

    std::optional<int> polarity(char32_t cp) const;
    const std::string& version() const noexcept { return version_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::map<char32_t, int>& entries() const noexcept { return entries_; }

private:
    std::map<char32_t, int> entries_;
    std::string version_;
};

/// Sums the polarity of every lexicon emoji in `text`; the sign decides.
Sentiment emoji_sentiment(std::string_view text, const EmojiLexicon& lexicon);

}  // namespace convo
