#include "xaieval/exact.hpp"

#include <algorithm>
#include <stdexcept>

namespace xaieval {
namespace {

using Int = Exact::Int;

Int abs128(Int v) { return v < 0 ? -v : v; }

Int gcd128(Int a, Int b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        const Int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Int pow10(int n) {
    Int p = 1;
    for (int i = 0; i < n; ++i) {
        p *= 10;
    }
    return p;
}

// floor division for positive divisor
Int floor_div(Int a, Int b) {
    Int q = a / b;
    if ((a % b != 0) && (a < 0)) {
        --q;
    }
    return q;
}

}  // namespace

Exact::Exact(Int num, Int den) {
    if (den == 0) {
        throw std::domain_error("Exact: zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const Int g = gcd128(num, den);
    num_ = g > 1 ? num / g : num;
    den_ = g > 1 ? den / g : den;
}

Exact Exact::from_decimal(std::int64_t value, int decimals) {
    return Exact(static_cast<Int>(value), pow10(decimals));
}

double Exact::to_double() const noexcept {
    return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
}

Int Exact::round_scaled(int decimals) const {
    const Int scaled = abs128(num_) * pow10(decimals);
    Int q = scaled / den_;
    const Int r = scaled % den_;
    if (2 * r >= den_) {
        ++q;
    }
    return num_ < 0 ? -q : q;
}

std::string Exact::to_fixed(int decimals) const {
    const Int scaled = round_scaled(decimals);
    std::string digits = int128_to_string(abs128(scaled));
    if (decimals > 0) {
        if (digits.size() <= static_cast<std::size_t>(decimals)) {
            digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
        }
        digits.insert(digits.size() - static_cast<std::size_t>(decimals), 1, '.');
    }
    return scaled < 0 ? "-" + digits : digits;
}

Exact operator+(const Exact& a, const Exact& b) {
    const Int g = gcd128(a.den_, b.den_);
    const Int da = a.den_ / g;
    const Int db = b.den_ / g;
    return Exact(a.num_ * db + b.num_ * da, a.den_ * db);
}

Exact operator*(const Exact& a, std::int64_t k) {
    const Int g = gcd128(static_cast<Int>(k), a.den_);
    return Exact(a.num_ * (static_cast<Int>(k) / g), a.den_ / g);
}

std::strong_ordering operator<=>(const Exact& a, const Exact& b) {
    Int an = a.num_, ad = a.den_, bn = b.num_, bd = b.den_;
    bool flipped = false;
    while (true) {
        const Int qa = floor_div(an, ad);
        const Int qb = floor_div(bn, bd);
        if (qa != qb) {
            const auto r = qa <=> qb;
            return flipped ? 0 <=> r : r;
        }
        const Int ra = an - qa * ad;
        const Int rb = bn - qb * bd;
        if (ra == 0 || rb == 0) {
            const auto r = ra == rb ? std::strong_ordering::equal
                           : ra == 0 ? std::strong_ordering::less
                                     : std::strong_ordering::greater;
            return flipped ? 0 <=> r : r;
        }
        // a' = ad/ra, b' = bd/rb; comparing reciprocals flips the order.
        an = ad;
        ad = ra;
        bn = bd;
        bd = rb;
        flipped = !flipped;
    }
}

std::string int128_to_string(Int v) {
    if (v == 0) {
        return "0";
    }
    const bool negative = v < 0;
    std::string out;
    while (v != 0) {
        const int digit = static_cast<int>(v % 10);
        out.push_back(static_cast<char>('0' + (digit < 0 ? -digit : digit)));
        v /= 10;
    }
    if (negative) {
        out.push_back('-');
    }
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace xaieval
