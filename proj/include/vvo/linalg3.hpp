#pragma once

#include <cmath>

#include "vvo/phase.hpp"

namespace vvo {

// Three-phase complex vector. Entries off the active mask are kept at zero;
// all arithmetic is restricted to the mask passed by the caller.
struct PhaseVec {
    std::array<Complex, 3> v{};

    Complex& operator[](Phase p) { return v[static_cast<int>(p)]; }
    const Complex& operator[](Phase p) const { return v[static_cast<int>(p)]; }

    PhaseVec& operator+=(const PhaseVec& o) {
        for (int i = 0; i < 3; ++i) v[i] += o.v[i];
        return *this;
    }
    PhaseVec& operator-=(const PhaseVec& o) {
        for (int i = 0; i < 3; ++i) v[i] -= o.v[i];
        return *this;
    }
    friend PhaseVec operator+(PhaseVec a, const PhaseVec& b) { return a += b; }
    friend PhaseVec operator-(PhaseVec a, const PhaseVec& b) { return a -= b; }

    double inf_norm() const {
        double m = 0.0;
        for (const auto& x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

// Three-phase complex matrix, row-major, masked the same way.
struct PhaseMat {
    std::array<Complex, 9> m{};

    Complex& at(Phase r, Phase c) { return m[3 * static_cast<int>(r) + static_cast<int>(c)]; }
    const Complex& at(Phase r, Phase c) const {
        return m[3 * static_cast<int>(r) + static_cast<int>(c)];
    }
    Complex& at(int r, int c) { return m[3 * r + c]; }
    const Complex& at(int r, int c) const { return m[3 * r + c]; }

    static PhaseMat identity_on(PhaseMask mask) {
        PhaseMat out;
        mask.for_each([&](Phase p) { out.at(p, p) = 1.0; });
        return out;
    }

    static PhaseMat diagonal_on(PhaseMask mask, const std::array<double, 3>& d) {
        PhaseMat out;
        mask.for_each([&](Phase p) { out.at(p, p) = d[static_cast<int>(p)]; });
        return out;
    }

    bool is_zero_on(PhaseMask mask, double tol = 0.0) const {
        bool zero = true;
        mask.for_each([&](Phase r) {
            mask.for_each([&](Phase c) {
                if (std::abs(at(r, c)) > tol) zero = false;
            });
        });
        return zero;
    }

    PhaseMat& operator+=(const PhaseMat& o) {
        for (int i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }
    friend PhaseMat operator+(PhaseMat a, const PhaseMat& b) { return a += b; }

    friend PhaseMat operator*(const Complex& s, PhaseMat a) {
        for (auto& x : a.m) x *= s;
        return a;
    }
};

inline PhaseVec mul(const PhaseMat& a, const PhaseVec& x, PhaseMask mask) {
    PhaseVec out;
    mask.for_each([&](Phase r) {
        Complex acc = 0.0;
        mask.for_each([&](Phase c) { acc += a.at(r, c) * x[c]; });
        out[r] = acc;
    });
    return out;
}

inline PhaseMat mul(const PhaseMat& a, const PhaseMat& b, PhaseMask mask) {
    PhaseMat out;
    mask.for_each([&](Phase r) {
        mask.for_each([&](Phase c) {
            Complex acc = 0.0;
            mask.for_each([&](Phase k) { acc += a.at(r, k) * b.at(k, c); });
            out.at(r, c) = acc;
        });
    });
    return out;
}

// Inverse of the sub-matrix restricted to the present phases. The absent
// rows/columns stay zero, which is exactly why masking (rather than
// zero-padding) is used throughout.
inline PhaseMat inverse_on(const PhaseMat& a, PhaseMask mask) {
    const int n = mask.count();
    if (n == 0) throw Error("inverse_on: empty phase mask");

    std::array<Phase, 3> idx{};
    int k = 0;
    mask.for_each([&](Phase p) { idx[k++] = p; });

    PhaseMat out;
    if (n == 1) {
        const Complex d = a.at(idx[0], idx[0]);
        if (d == Complex{0.0, 0.0}) throw Error("inverse_on: singular 1x1 block");
        out.at(idx[0], idx[0]) = 1.0 / d;
        return out;
    }
    if (n == 2) {
        const Complex a00 = a.at(idx[0], idx[0]), a01 = a.at(idx[0], idx[1]);
        const Complex a10 = a.at(idx[1], idx[0]), a11 = a.at(idx[1], idx[1]);
        const Complex det = a00 * a11 - a01 * a10;
        if (det == Complex{0.0, 0.0}) throw Error("inverse_on: singular 2x2 block");
        out.at(idx[0], idx[0]) = a11 / det;
        out.at(idx[0], idx[1]) = -a01 / det;
        out.at(idx[1], idx[0]) = -a10 / det;
        out.at(idx[1], idx[1]) = a00 / det;
        return out;
    }

    // 3x3 adjugate
    const Complex m00 = a.at(0, 0), m01 = a.at(0, 1), m02 = a.at(0, 2);
    const Complex m10 = a.at(1, 0), m11 = a.at(1, 1), m12 = a.at(1, 2);
    const Complex m20 = a.at(2, 0), m21 = a.at(2, 1), m22 = a.at(2, 2);
    const Complex c00 = m11 * m22 - m12 * m21;
    const Complex c01 = m12 * m20 - m10 * m22;
    const Complex c02 = m10 * m21 - m11 * m20;
    const Complex det = m00 * c00 + m01 * c01 + m02 * c02;
    if (det == Complex{0.0, 0.0}) throw Error("inverse_on: singular 3x3 block");
    out.at(0, 0) = c00 / det;
    out.at(0, 1) = (m02 * m21 - m01 * m22) / det;
    out.at(0, 2) = (m01 * m12 - m02 * m11) / det;
    out.at(1, 0) = c01 / det;
    out.at(1, 1) = (m00 * m22 - m02 * m20) / det;
    out.at(1, 2) = (m02 * m10 - m00 * m12) / det;
    out.at(2, 0) = c02 / det;
    out.at(2, 1) = (m01 * m20 - m00 * m21) / det;
    out.at(2, 2) = (m00 * m11 - m01 * m10) / det;
    return out;
}

}  // namespace vvo
