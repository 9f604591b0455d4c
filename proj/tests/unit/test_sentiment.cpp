#include <doctest.h>

#include "convo/sentiment.hpp"
#include "support/helpers.hpp"

using namespace convo;

TEST_CASE("utf8 decoding") {
    CHECK(utf8_code_points("aä€😀") == std::vector<char32_t>{U'a', 0xE4, 0x20AC, 0x1F600});
    CHECK(utf8_code_points("\xff") == std::vector<char32_t>{0xFFFD});
    CHECK(utf8_code_points("a\xe2\x82").back() == 0xFFFD);
}

TEST_CASE("emoji polarity sums decide") {
    EmojiLexicon lex({{0x1F600, 1}, {0x1F622, -1}, {0x1F610, 0}});
    CHECK(emoji_sentiment("great 😀", lex) == Sentiment::positive);
    CHECK(emoji_sentiment("😢", lex) == Sentiment::negative);
    CHECK(emoji_sentiment("😀😢", lex) == Sentiment::neutral);
    CHECK(emoji_sentiment("😢😢😀", lex) == Sentiment::negative);
    CHECK(emoji_sentiment("😐 no idea", lex) == Sentiment::neutral);
    CHECK(emoji_sentiment("plain words", lex) == Sentiment::neutral);
}

TEST_CASE("lexicon json") {
    auto lex = EmojiLexicon::from_json(Json::parse(R"({"version": "t", "entries": {"U+1F600": 1, "U+2639": -1}})"));
    CHECK(lex.version() == "t");
    CHECK(lex.polarity(0x2639) == -1);
    CHECK_FALSE(lex.polarity(0x41));
    CHECK_THROWS(EmojiLexicon::from_json(Json::parse(R"({"entries": {"1F600": 1}})")));
    CHECK_THROWS(EmojiLexicon::from_json(Json::parse(R"({"entries": {"U+1F600": 2}})")));
}

TEST_CASE("shipped lexicon loads") {
    auto lex = EmojiLexicon::load(testing::data_dir() / "emoji_lexicon.json");
    CHECK(lex.size() > 20);
    CHECK(emoji_sentiment("👍", lex) == Sentiment::positive);
    CHECK(emoji_sentiment("😡", lex) == Sentiment::negative);
}

TEST_CASE("sentiment names") {
    for (auto s : {Sentiment::negative, Sentiment::neutral, Sentiment::positive}) {
        CHECK(sentiment_from_string(to_string(s)) == s);
    }
    CHECK_FALSE(sentiment_from_string("angry"));
}
