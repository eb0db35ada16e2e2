/*
 Copyright 2026 The fracstab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef FRACSTAB_RATIONAL_ORDER_HPP
#define FRACSTAB_RATIONAL_ORDER_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracstab/error.hpp"

namespace fracstab {

/**
 * @brief Exact rational derivative order in the open interval (0, 2).
 *
 * Orders are kept as reduced fractions so that the common base order of a
 * multi-order system can be computed with integer gcd arithmetic. Floating
 * point orders are never accepted.
 */
class RationalOrder {
public:
    RationalOrder(std::int64_t numerator, std::int64_t denominator) {
        if (numerator <= 0 || denominator <= 0) {
            throw RangeError("order numerator and denominator must be positive");
        }
        const std::int64_t g = std::gcd(numerator, denominator);
        num_ = numerator / g;
        den_ = denominator / g;
        if (num_ >= 2 * den_) {
            throw RangeError("order must lie in (0, 2), got " + to_string());
        }
    }

    [[nodiscard]] std::int64_t numerator() const noexcept { return num_; }
    [[nodiscard]] std::int64_t denominator() const noexcept { return den_; }
    [[nodiscard]] double value() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// Shortest exact decimal when the denominator divides a power of ten,
    /// otherwise "num/den".
    [[nodiscard]] std::string to_string() const {
        std::int64_t d = den_;
        int twos = 0, fives = 0;
        while (d % 2 == 0) { d /= 2; ++twos; }
        while (d % 5 == 0) { d /= 5; ++fives; }
        if (d != 1) {
            return std::to_string(num_) + "/" + std::to_string(den_);
        }
        const int digits = std::max(twos, fives);
        std::int64_t scale = 1;
        for (int i = 0; i < digits; ++i) scale *= 10;
        const std::int64_t scaled = num_ * (scale / den_);
        std::string frac = std::to_string(scaled % scale);
        if (digits == 0) return std::to_string(scaled);
        frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
        return std::to_string(scaled / scale) + "." + frac;
    }

    friend bool operator==(const RationalOrder&, const RationalOrder&) = default;

private:
    std::int64_t num_ = 1;
    std::int64_t den_ = 1;
};

/// Parses a plain decimal ("0.93", "1.5", "1") into an exact order.
/// At most six fractional digits are accepted.
inline RationalOrder parse_order(std::string_view text) {
    constexpr int kMaxFractionDigits = 6;
    if (text.empty()) throw ParseError("empty order string");

    std::int64_t whole = 0;
    std::int64_t frac = 0;
    std::int64_t scale = 1;
    std::size_t i = 0;
    bool any_digit = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
        whole = whole * 10 + (text[i] - '0');
        any_digit = true;
        if (whole > 2) throw RangeError("order must lie in (0, 2), got \"" + std::string(text) + "\"");
    }
    if (i < text.size() && text[i] == '.') {
        ++i;
        int count = 0;
        for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++count) {
            if (count == kMaxFractionDigits) {
                throw ParseError("order \"" + std::string(text) + "\" has more than 6 fractional digits");
            }
            frac = frac * 10 + (text[i] - '0');
            scale *= 10;
            any_digit = true;
        }
    }
    if (!any_digit || i != text.size()) {
        throw ParseError("malformed order \"" + std::string(text) + "\"");
    }
    const std::int64_t numerator = whole * scale + frac;
    if (numerator <= 0 || numerator >= 2 * scale) {
        throw RangeError("order must lie in (0, 2), got \"" + std::string(text) + "\"");
    }
    return {numerator, scale};
}

/// Common base order and per-state multiplicities of a set of orders.
struct CommensurateBase {
    RationalOrder alpha_c;
    std::vector<int> multiplicity; ///< p_i with alpha_i = p_i * alpha_c
};

/// Greatest common divisor of the orders in rational arithmetic.
inline CommensurateBase commensurate_base(std::span<const RationalOrder> orders) {
    if (orders.empty()) throw DimensionError("commensurate_base needs at least one order");

    std::int64_t common_den = 1;
    for (const auto& o : orders) {
        common_den = std::lcm(common_den, o.denominator());
    }
    std::vector<std::int64_t> scaled;
    scaled.reserve(orders.size());
    std::int64_t g = 0;
    for (const auto& o : orders) {
        scaled.push_back(o.numerator() * (common_den / o.denominator()));
        g = std::gcd(g, scaled.back());
    }
    CommensurateBase base{RationalOrder(g, common_den), {}};
    base.multiplicity.reserve(orders.size());
    for (auto s : scaled) base.multiplicity.push_back(static_cast<int>(s / g));
    return base;
}

} // namespace fracstab

#endif // FRACSTAB_RATIONAL_ORDER_HPP
