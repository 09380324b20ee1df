#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo::testing {

inline constexpr double kPi = std::numbers::pi;

inline CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

inline PureState random_pure(Eigen::Index dim, std::mt19937_64& rng) {
    return PureState::normalized(random_complex(dim, 1, rng).col(0));
}

// Haar-ish unitary from the QR factor of a Gaussian matrix.
inline CMatrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
    Eigen::HouseholderQR<CMatrix> qr(random_complex(dim, dim, rng));
    return qr.householderQ() * CMatrix::Identity(dim, dim);
}

inline CMatrix pauli(int axis) {
    const Complex i(0.0, 1.0);
    CMatrix s(2, 2);
    switch (axis) {
        case 0: s << 0, 1, 1, 0; break;
        case 1: s << 0, -i, i, 0; break;
        default: s << 1, 0, 0, -1; break;
    }
    return s;
}

inline PureState ket(Complex a, Complex b) {
    CVector v(2);
    v << a, b;
    return PureState::normalized(v);
}

}  // namespace fuzzytomo::testing
