#pragma once

#include <string_view>

namespace convo {

/// Luhn mod-10 check over a string of ASCII digits. Non-digit input or an
/// empty string fails.
bool luhn_valid(std::string_view digits) noexcept;

/// True iff `digits` is exactly 15 ASCII digits and passes the Luhn check.
bool validate_imei(std::string_view digits) noexcept;

}  // namespace convo
