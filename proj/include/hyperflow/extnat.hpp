// Natural numbers extended with infinity. Addition saturates and
// multiplication is infinity-absorbing on either side, including inf * 0.
#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace hyperflow {

class ExtNat {
public:
    constexpr ExtNat() : v_(0) {}
    constexpr explicit ExtNat(std::uint64_t n) : v_(n == kInf ? kInf - 1 : n) {}

    static constexpr ExtNat inf() {
        ExtNat e;
        e.v_ = kInf;
        return e;
    }
    static constexpr ExtNat fin(std::uint64_t n) { return ExtNat(n); }

    constexpr bool is_inf() const { return v_ == kInf; }
    constexpr std::uint64_t finite_value() const { return v_; }

    friend constexpr bool operator==(ExtNat a, ExtNat b) { return a.v_ == b.v_; }
    friend constexpr bool operator!=(ExtNat a, ExtNat b) { return a.v_ != b.v_; }
    friend constexpr bool operator<(ExtNat a, ExtNat b) { return a.v_ < b.v_; }
    friend constexpr bool operator<=(ExtNat a, ExtNat b) { return a.v_ <= b.v_; }
    friend constexpr bool operator>(ExtNat a, ExtNat b) { return a.v_ > b.v_; }
    friend constexpr bool operator>=(ExtNat a, ExtNat b) { return a.v_ >= b.v_; }

    friend constexpr ExtNat operator+(ExtNat a, ExtNat b) {
        if (a.is_inf() || b.is_inf()) return inf();
        std::uint64_t s = a.v_ + b.v_;
        if (s < a.v_ || s >= kInf) return inf();
        return fin(s);
    }

    // inf absorbs even a zero factor.
    friend constexpr ExtNat operator*(ExtNat a, ExtNat b) {
        if (a.is_inf() || b.is_inf()) return inf();
        if (a.v_ == 0 || b.v_ == 0) return fin(0);
        if (a.v_ > (kInf - 1) / b.v_) return inf();
        return fin(a.v_ * b.v_);
    }

    friend constexpr ExtNat min(ExtNat a, ExtNat b) { return a < b ? a : b; }
    friend constexpr ExtNat max(ExtNat a, ExtNat b) { return a < b ? b : a; }

private:
    static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t v_;
};

inline std::string to_string(ExtNat n) {
    return n.is_inf() ? std::string("inf") : std::to_string(n.finite_value());
}

}  // namespace hyperflow
