#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "convo/msgmodel.hpp"

namespace convo {

using Date = std::chrono::year_month_day;

class DateInFuture : public std::runtime_error {
public:
    explicit DateInFuture(Date resolved)
        : std::runtime_error("damage date in future"), resolved_(resolved) {}
    Date resolved() const noexcept { return resolved_; }

private:
    Date resolved_;
};

Date date_of(Timestamp t);
Date add_days(Date d, int delta);

/// ISO `YYYY-MM-DD`.
std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view s);

/// Finds the first date expression in `text` and resolves it against
/// `reference`. Understands "today", "yesterday", "day before yesterday",
/// "N days/weeks ago" (English and German forms), `D.M.YYYY`, `D.M.YY` and
/// `YYYY-MM-DD`. Impossible calendar dates are ignored. No future check.
std::optional<Date> scan_date(std::string_view text, Date reference);

/// As scan_date, but a date after `reference` throws DateInFuture.
std::optional<Date> extract_date(std::string_view text, Date reference);

}  // namespace convo
