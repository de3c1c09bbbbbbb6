#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace xaieval {

// Exact rational number over 128-bit integers, always in lowest terms with a
// positive denominator. Metrics are kept exact so that 2-decimal rendering is
// the true round-half-away-from-zero of the underlying ratio.
class Exact {
public:
    __extension__ typedef __int128 Int;

    Exact() : num_(0), den_(1) {}
    Exact(Int num, Int den);

    static Exact ratio(std::uint64_t num, std::uint64_t den) {
        return Exact(static_cast<Int>(num), static_cast<Int>(den));
    }
    // value / 10^decimals, e.g. from_decimal(9358, 2) == 93.58
    static Exact from_decimal(std::int64_t value, int decimals);

    Int num() const noexcept { return num_; }
    Int den() const noexcept { return den_; }

    double to_double() const noexcept;

    // value * 10^decimals rounded half away from zero.
    Int round_scaled(int decimals) const;
    // Fixed-point rendering of round_scaled, e.g. "-0.04". Never prints "-0.00".
    std::string to_fixed(int decimals) const;

    Exact operator-() const { return Exact(-num_, den_); }
    friend Exact operator+(const Exact& a, const Exact& b);
    friend Exact operator-(const Exact& a, const Exact& b) { return a + (-b); }
    friend Exact operator*(const Exact& a, std::int64_t k);

    friend bool operator==(const Exact& a, const Exact& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    // Overflow-free ordering (continued-fraction comparison).
    friend std::strong_ordering operator<=>(const Exact& a, const Exact& b);

private:
    Int num_;
    Int den_;
};

std::string int128_to_string(Exact::Int v);

}  // namespace xaieval
