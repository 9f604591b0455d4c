#include "convo/imei.hpp"

#include <array>

namespace convo {

bool luhn_valid(std::string_view digits) noexcept {
    if (digits.empty()) return false;
    // 2*d with the tens digit folded back in
    static constexpr std::array<int, 10> doubled = {0, 2, 4, 6, 8, 1, 3, 5, 7, 9};
    int sum = 0;
    bool twice = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        const char c = *it;
        if (c < '0' || c > '9') return false;
        const int d = c - '0';
        sum += twice ? doubled[d] : d;
        twice = !twice;
    }
    return sum % 10 == 0;
}

bool validate_imei(std::string_view digits) noexcept {
    return digits.size() == 15 && luhn_valid(digits);
}

}  // namespace convo
