#ifndef PVCAGG_EXTNAT_HPP
#define PVCAGG_EXTNAT_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pvcagg {

/// Natural numbers extended with the two sentinels -inf and +inf.
///
/// This is the single scalar carrier of the library: semiring values are
/// finite ExtNats (Boolean semiring uses 0 and 1), monoid values may also be
/// infinite (the neutral elements of MIN and MAX).
class ExtNat {
public:
    enum class Tag : std::uint8_t { NegInf = 0, Finite = 1, PosInf = 2 };

    constexpr ExtNat() noexcept = default;
    constexpr ExtNat(std::uint64_t v) noexcept : tag_(Tag::Finite), value_(v) {}  // NOLINT: implicit by intent

    static constexpr ExtNat pos_inf() noexcept { return ExtNat(Tag::PosInf); }
    static constexpr ExtNat neg_inf() noexcept { return ExtNat(Tag::NegInf); }

    constexpr bool is_finite() const noexcept { return tag_ == Tag::Finite; }
    constexpr bool is_pos_inf() const noexcept { return tag_ == Tag::PosInf; }
    constexpr bool is_neg_inf() const noexcept { return tag_ == Tag::NegInf; }
    constexpr Tag tag() const noexcept { return tag_; }

    /// Finite payload; callers must check is_finite() first.
    constexpr std::uint64_t value() const noexcept { return value_; }

    constexpr bool operator==(const ExtNat& o) const noexcept {
        return tag_ == o.tag_ && (tag_ != Tag::Finite || value_ == o.value_);
    }
    constexpr std::strong_ordering operator<=>(const ExtNat& o) const noexcept {
        if (tag_ != o.tag_) return tag_ <=> o.tag_;
        if (tag_ != Tag::Finite) return std::strong_ordering::equal;
        return value_ <=> o.value_;
    }

    std::string to_string() const;

    /// Accepts decimal naturals, "inf", "+inf" and "-inf".
    static std::optional<ExtNat> parse(std::string_view text);

private:
    constexpr explicit ExtNat(Tag t) noexcept : tag_(t) {}

    Tag tag_ = Tag::Finite;
    std::uint64_t value_ = 0;
};

// Checked arithmetic. Overflow raises Error(ArithmeticOverflow); mixing
// +inf with -inf is likewise an error. Infinite operands otherwise absorb.
std::uint64_t checked_add(std::uint64_t a, std::uint64_t b);
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);
std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp);

ExtNat checked_add(ExtNat a, ExtNat b);
ExtNat checked_mul(ExtNat a, ExtNat b);

}  // namespace pvcagg

#endif  // PVCAGG_EXTNAT_HPP
