#include "pvcagg/extnat.hpp"

#include <charconv>
#include <limits>

#include "pvcagg/error.hpp"

namespace pvcagg {

std::string ExtNat::to_string() const {
    switch (tag_) {
    case Tag::NegInf: return "-inf";
    case Tag::PosInf: return "+inf";
    case Tag::Finite: break;
    }
    return std::to_string(value_);
}

std::optional<ExtNat> ExtNat::parse(std::string_view text) {
    if (text == "inf" || text == "+inf") return pos_inf();
    if (text == "-inf") return neg_inf();
    if (text.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return ExtNat(v);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        throw Error(ErrorCode::ArithmeticOverflow, std::to_string(a) + " + " + std::to_string(b));
    return r;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r))
        throw Error(ErrorCode::ArithmeticOverflow, std::to_string(a) + " * " + std::to_string(b));
    return r;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t result = 1;
    while (exp > 0) {
        if (exp & 1U) result = checked_mul(result, base);
        exp >>= 1U;
        if (exp > 0) {
            if (base > std::numeric_limits<std::uint32_t>::max() && exp > 0)
                throw Error(ErrorCode::ArithmeticOverflow, "power overflows 64 bits");
            base *= base;
        }
    }
    return result;
}

ExtNat checked_add(ExtNat a, ExtNat b) {
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
        throw Error(ErrorCode::ArithmeticOverflow, "+inf + -inf is undefined");
    if (!a.is_finite()) return a;
    if (!b.is_finite()) return b;
    return ExtNat(checked_add(a.value(), b.value()));
}

ExtNat checked_mul(ExtNat a, ExtNat b) {
    if (a.is_finite() && b.is_finite()) return ExtNat(checked_mul(a.value(), b.value()));
    if ((a.is_finite() && a.value() == 0) || (b.is_finite() && b.value() == 0))
        throw Error(ErrorCode::ArithmeticOverflow, "0 * inf is undefined");
    if (a.is_neg_inf() != b.is_neg_inf()) return ExtNat::neg_inf();
    return ExtNat::pos_inf();
}

}  // namespace pvcagg
