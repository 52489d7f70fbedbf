// bigcount.hpp
// Exact term-count arithmetic for superposition batching. Counts are
// unsigned big integers up to 512 bits; products that grow past that switch
// to a (log2-value, exact=false) representation so batching stays exact
// where feasible and bounded elsewhere.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace entsim {

class TermCount {
  public:
    TermCount() : limbs_{1} {}  // value 1

    static TermCount from_u64(std::uint64_t value);

    // C(k, j); exact while it fits in 64 bits (k <= 66), log-gamma beyond.
    static TermCount binomial(std::int64_t k, std::int64_t j);

    TermCount& operator*=(const TermCount& rhs);
    friend TermCount operator*(TermCount lhs, const TermCount& rhs) {
        lhs *= rhs;
        return lhs;
    }

    bool exact() const { return exact_; }
    bool is_one() const { return exact_ && limbs_.size() == 1 && limbs_[0] == 1; }

    double log2() const;
    std::uint64_t floor_log2() const;

    // 2^n / value for n <= floor_log2(); in (1/2, 1] when n == floor_log2().
    double pow2_ratio(std::uint64_t n) const;

    // value - 2^n (requires 2^n < value); the residual left by a trim.
    TermCount minus_pow2(std::uint64_t n) const;

    double to_double() const;

    // Exact value as u64; throws when approximate or too large.
    std::uint64_t to_u64() const;

  private:
    bool exact_ = true;
    std::vector<std::uint64_t> limbs_;  // little-endian base 2^64; exact only
    double approx_log2_ = 0.0;          // approximate only

    static constexpr std::uint64_t kMaxExactBits = 512;

    std::uint64_t bit_length() const;
    void trim_zeros();
    void demote_if_oversized();
};

} // namespace entsim
