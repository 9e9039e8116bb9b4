#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vvo {

using Complex = std::complex<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Phase : int { a = 0, b = 1, c = 2 };

inline char phase_char(Phase p) { return "abc"[static_cast<int>(p)]; }

inline Phase phase_from_char(char ch) {
    switch (ch) {
        case 'a': case 'A': return Phase::a;
        case 'b': case 'B': return Phase::b;
        case 'c': case 'C': return Phase::c;
    }
    throw Error(std::string("invalid phase character '") + ch + "'");
}

// Set of present phases; absent phases correspond to masked-out matrix
// rows/columns, never zero-padded entries.
class PhaseMask {
public:
    PhaseMask() = default;
    explicit PhaseMask(std::uint8_t bits) : bits_(bits & 0x7u) {}

    static PhaseMask parse(const std::string& s) {
        std::uint8_t b = 0;
        for (char ch : s) {
            if (ch == ' ' || ch == ',') continue;
            b |= std::uint8_t(1u << static_cast<int>(phase_from_char(ch)));
        }
        return PhaseMask(b);
    }

    static PhaseMask all() { return PhaseMask(0x7); }
    static PhaseMask single(Phase p) { return PhaseMask(std::uint8_t(1u << static_cast<int>(p))); }

    bool has(Phase p) const { return (bits_ >> static_cast<int>(p)) & 1u; }
    bool empty() const { return bits_ == 0; }
    int count() const { return (bits_ & 1) + ((bits_ >> 1) & 1) + ((bits_ >> 2) & 1); }
    std::uint8_t bits() const { return bits_; }

    bool contains(PhaseMask other) const { return (other.bits_ & ~bits_) == 0; }

    PhaseMask operator|(PhaseMask o) const { return PhaseMask(std::uint8_t(bits_ | o.bits_)); }
    PhaseMask operator&(PhaseMask o) const { return PhaseMask(std::uint8_t(bits_ & o.bits_)); }
    bool operator==(const PhaseMask&) const = default;

    std::string str() const {
        std::string s;
        for (int i = 0; i < 3; ++i)
            if ((bits_ >> i) & 1u) s += "abc"[i];
        return s;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (int i = 0; i < 3; ++i)
            if ((bits_ >> i) & 1u) f(static_cast<Phase>(i));
    }

private:
    std::uint8_t bits_ = 0;
};

constexpr std::array<Phase, 3> kPhases = {Phase::a, Phase::b, Phase::c};

}  // namespace vvo
