#include "entsim/bigcount.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace entsim {

namespace {

double log2_binomial(std::int64_t k, std::int64_t j) {
    return (std::lgamma(static_cast<double>(k) + 1.0) -
            std::lgamma(static_cast<double>(j) + 1.0) -
            std::lgamma(static_cast<double>(k - j) + 1.0)) /
           std::numbers::ln2;
}

} // namespace

TermCount TermCount::from_u64(std::uint64_t value) {
    if (value == 0) throw std::invalid_argument("TermCount: counts must be >= 1");
    TermCount t;
    t.limbs_ = {value};
    return t;
}

TermCount TermCount::binomial(std::int64_t k, std::int64_t j) {
    if (k < 0 || j < 0 || j > k) throw std::invalid_argument("TermCount::binomial: bad (k, j)");
    if (k <= 66) {
        // c walks C(k,0) -> C(k,j); the running product stays integral.
        unsigned __int128 c = 1;
        const std::int64_t jj = std::min(j, k - j);
        for (std::int64_t i = 0; i < jj; ++i) {
            c = c * static_cast<unsigned __int128>(k - i);
            c /= static_cast<unsigned __int128>(i + 1);
        }
        return from_u64(static_cast<std::uint64_t>(c));
    }
    TermCount t;
    t.exact_ = false;
    t.limbs_.clear();
    t.approx_log2_ = log2_binomial(k, j);
    return t;
}

std::uint64_t TermCount::bit_length() const {
    const std::uint64_t top = limbs_.back();
    return 64u * (limbs_.size() - 1) +
           static_cast<std::uint64_t>(64 - std::countl_zero(top));
}

void TermCount::trim_zeros() {
    while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
}

void TermCount::demote_if_oversized() {
    if (!exact_ || bit_length() <= kMaxExactBits) return;
    approx_log2_ = log2();
    exact_ = false;
    limbs_.clear();
}

TermCount& TermCount::operator*=(const TermCount& rhs) {
    if (!exact_ || !rhs.exact_) {
        const double sum = log2() + rhs.log2();
        exact_ = false;
        limbs_.clear();
        approx_log2_ = sum;
        return *this;
    }
    std::vector<std::uint64_t> out(limbs_.size() + rhs.limbs_.size(), 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < rhs.limbs_.size(); ++j) {
            const unsigned __int128 cur =
                static_cast<unsigned __int128>(limbs_[i]) * rhs.limbs_[j] +
                out[i + j] + carry;
            out[i + j] = static_cast<std::uint64_t>(cur);
            carry = static_cast<std::uint64_t>(cur >> 64);
        }
        out[i + rhs.limbs_.size()] += carry;
    }
    limbs_ = std::move(out);
    trim_zeros();
    demote_if_oversized();
    return *this;
}

double TermCount::to_double() const {
    if (!exact_) throw std::logic_error("TermCount: to_double on approximate count");
    if (limbs_.size() == 1) return static_cast<double>(limbs_[0]);
    const std::size_t n = limbs_.size();
    const double top = static_cast<double>(limbs_[n - 1]) * 0x1.0p64 +
                       static_cast<double>(limbs_[n - 2]);
    return std::ldexp(top, 64 * static_cast<int>(n - 2));
}

double TermCount::log2() const {
    if (!exact_) return approx_log2_;
    if (limbs_.size() == 1) return std::log2(static_cast<double>(limbs_[0]));
    const std::size_t n = limbs_.size();
    const double top = static_cast<double>(limbs_[n - 1]) * 0x1.0p64 +
                       static_cast<double>(limbs_[n - 2]);
    return std::log2(top) + 64.0 * static_cast<double>(n - 2);
}

std::uint64_t TermCount::floor_log2() const {
    if (exact_) return bit_length() - 1;
    return static_cast<std::uint64_t>(std::floor(approx_log2_));
}

double TermCount::pow2_ratio(std::uint64_t n) const {
    double ratio;
    if (exact_) {
        ratio = std::ldexp(1.0, static_cast<int>(n)) / to_double();
    } else {
        ratio = std::exp2(static_cast<double>(n) - approx_log2_);
    }
    return std::min(ratio, 1.0);
}

TermCount TermCount::minus_pow2(std::uint64_t n) const {
    if (exact_) {
        if (n >= bit_length())
            throw std::invalid_argument("TermCount: 2^n is not below the count");
        TermCount out = *this;
        // subtract the single set bit with borrow propagation
        std::size_t limb = n / 64;
        std::uint64_t sub = std::uint64_t{1} << (n % 64);
        while (sub != 0) {
            const std::uint64_t before = out.limbs_[limb];
            out.limbs_[limb] = before - sub;
            sub = (before < sub) ? 1 : 0;
            ++limb;
        }
        out.trim_zeros();
        if (out.limbs_.size() == 1 && out.limbs_[0] == 0)
            throw std::invalid_argument("TermCount: residual would be zero");
        return out;
    }
    const double excess = approx_log2_ - static_cast<double>(n);
    if (!(excess > 0.0))
        throw std::invalid_argument("TermCount: 2^n is not below the count");
    TermCount out;
    out.exact_ = false;
    out.limbs_.clear();
    // past ~64 bits of excess the subtraction is below double resolution
    out.approx_log2_ = excess > 64.0
                           ? approx_log2_
                           : static_cast<double>(n) + std::log2(std::exp2(excess) - 1.0);
    return out;
}

std::uint64_t TermCount::to_u64() const {
    if (!exact_) throw std::logic_error("TermCount: to_u64 on approximate count");
    if (limbs_.size() > 1) throw std::overflow_error("TermCount: value exceeds 64 bits");
    return limbs_[0];
}

} // namespace entsim
