#include "convo/calendar.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <vector>

namespace convo {
namespace {

using namespace std::chrono;

struct Candidate {
    std::ptrdiff_t position;
    std::optional<Date> date;
};

std::optional<int> count_word(const std::string& w) {
    static const std::array<std::pair<const char*, int>, 26> words = {{
        {"a", 1},     {"an", 1},     {"one", 1},    {"two", 2},    {"three", 3},  {"four", 4},
        {"five", 5},  {"six", 6},    {"seven", 7},  {"eight", 8},  {"nine", 9},   {"ten", 10},
        {"ein", 1},   {"eins", 1},   {"einem", 1},  {"einer", 1},  {"zwei", 2},   {"drei", 3},
        {"vier", 4},  {"fuenf", 5},  {"sechs", 6},  {"sieben", 7}, {"acht", 8},   {"neun", 9},
        {"zehn", 10}, {"fünf", 5},
    }};
    for (const auto& [name, value] : words) {
        if (w == name) return value;
    }
    if (!w.empty() && w.size() <= 4 && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return std::stoi(w);
    }
    return std::nullopt;
}

const std::string kCount = R"((\d{1,4}|a|an|one|two|three|four|five|six|seven|eight|nine|ten|ein|eins|einem|einer|zwei|drei|vier|fuenf|fünf|sechs|sieben|acht|neun|zehn))";

}  // namespace

Date date_of(Timestamp t) {
    return Date{floor<days>(t)};
}

Date add_days(Date d, int delta) {
    return Date{sys_days{d} + days{delta}};
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::optional<Date> parse_date(std::string_view s) {
    static const std::regex iso(R"((\d{4})-(\d{2})-(\d{2}))");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(s.begin(), s.end(), m, iso)) return std::nullopt;
    Date d{year{std::stoi(m.str(1))}, month{static_cast<unsigned>(std::stoi(m.str(2)))},
           day{static_cast<unsigned>(std::stoi(m.str(3)))}};
    if (!d.ok()) return std::nullopt;
    return d;
}

std::optional<Date> scan_date(std::string_view text, Date reference) {
    static const std::regex today(R"(\b(today|heute)\b)");
    static const std::regex day_before(R"(\b(the\s+day\s+before\s+yesterday|day\s+before\s+yesterday|vorgestern)\b)");
    static const std::regex yesterday(R"(\b(yesterday|gestern)\b)");
    static const std::regex ago_en("\\b" + kCount + R"(\s+(days?|weeks?)\s+ago\b)");
    static const std::regex ago_de("\\bvor\\s+" + kCount + R"(\s+(tag|tagen|woche|wochen)\b)");
    static const std::regex dotted(R"(\b(\d{1,2})\.(\d{1,2})\.(\d{4}|\d{2})\b)");
    static const std::regex iso(R"(\b(\d{4})-(\d{1,2})-(\d{1,2})\b)");

    const std::string lowered = to_lower_ascii(text);
    std::vector<Candidate> found;
    std::smatch m;

    if (std::regex_search(lowered, m, today)) found.push_back({m.position(0), reference});
    if (std::regex_search(lowered, m, day_before)) found.push_back({m.position(0), add_days(reference, -2)});
    if (std::regex_search(lowered, m, yesterday)) {
        // "day before yesterday" also contains "yesterday"; the longer match sits earlier.
        found.push_back({m.position(0), add_days(reference, -1)});
    }
    if (std::regex_search(lowered, m, ago_en)) {
        if (auto n = count_word(m.str(1))) {
            const int unit = m.str(2).rfind("week", 0) == 0 ? 7 : 1;
            found.push_back({m.position(0), add_days(reference, -*n * unit)});
        }
    }
    if (std::regex_search(lowered, m, ago_de)) {
        if (auto n = count_word(m.str(1))) {
            const int unit = m.str(2).rfind("woche", 0) == 0 ? 7 : 1;
            found.push_back({m.position(0), add_days(reference, -*n * unit)});
        }
    }
    if (std::regex_search(lowered, m, dotted)) {
        int y = std::stoi(m.str(3));
        if (m.str(3).size() == 2) y += 2000;
        Date d{year{y}, month{static_cast<unsigned>(std::stoi(m.str(2)))},
               day{static_cast<unsigned>(std::stoi(m.str(1)))}};
        found.push_back({m.position(0), d.ok() ? std::optional<Date>(d) : std::nullopt});
    }
    if (std::regex_search(lowered, m, iso)) {
        Date d{year{std::stoi(m.str(1))}, month{static_cast<unsigned>(std::stoi(m.str(2)))},
               day{static_cast<unsigned>(std::stoi(m.str(3)))}};
        found.push_back({m.position(0), d.ok() ? std::optional<Date>(d) : std::nullopt});
    }

    std::optional<Date> best;
    std::ptrdiff_t best_pos = -1;
    for (const auto& c : found) {
        if (!c.date) continue;
        if (best_pos < 0 || c.position < best_pos) {
            best = c.date;
            best_pos = c.position;
        }
    }
    return best;
}

std::optional<Date> extract_date(std::string_view text, Date reference) {
    auto d = scan_date(text, reference);
    if (d && sys_days{*d} > sys_days{reference}) throw DateInFuture(*d);
    return d;
}

}  // namespace convo
