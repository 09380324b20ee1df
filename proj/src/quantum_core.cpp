#include "fuzzytomo/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "fuzzytomo/errors.hpp"

namespace fuzzytomo {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_two_pi(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

// Rotates v so that its largest-magnitude entry is real and positive.
CVector fix_phase(const CVector& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best]) + 1e-14) best = i;
    }
    if (std::abs(v[best]) == 0.0) return v;
    return v * (std::abs(v[best]) / v[best]);
}

bool lexicographic_less(const CVector& a, const CVector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return false;
}

}  // namespace

BlochAngles BlochAngles::normalized() const {
    // Every full turn of theta flips the sign of both amplitudes.
    double t = wrap_two_pi(theta);
    const double turns = std::round((theta - t) / kTwoPi);
    double p = phi;
    double c = chi + (std::fmod(std::abs(turns), 2.0) == 1.0 ? std::numbers::pi : 0.0);
    if (t > std::numbers::pi) {
        // (cos(t/2), sin(t/2)e^{ip}) with t in (pi, 2pi) equals
        // -(cos(t'/2), sin(t'/2)e^{i(p+pi)}) for t' = 2pi - t.
        t = kTwoPi - t;
        p += std::numbers::pi;
        c += std::numbers::pi;
    }
    return {t, wrap_two_pi(p), wrap_two_pi(c)};
}

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) throw InvalidArgument("PureState: empty amplitude vector");
    const double n2 = amplitudes_.squaredNorm();
    if (std::abs(n2 - 1.0) > kStateTolerance) {
        throw InvalidArgument("PureState: squared norm " + std::to_string(n2) + " != 1");
    }
}

PureState PureState::normalized(const CVector& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("PureState: cannot normalize a zero vector");
    return PureState(v / n);
}

DensityMatrix::DensityMatrix(CMatrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) {
        throw InvalidArgument("DensityMatrix: matrix must be square and nonempty");
    }
    if (max_abs_diff(matrix_, matrix_.adjoint()) > kStateTolerance) {
        throw InvalidArgument("DensityMatrix: matrix is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex(1.0, 0.0)) > kStateTolerance) {
        throw InvalidArgument("DensityMatrix: trace != 1");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(matrix_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kStateTolerance) {
        throw InvalidArgument("DensityMatrix: negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::from_pure(const PureState& state) {
    return DensityMatrix(state.projector());
}

PurifiedState::PurifiedState(CMatrix psi) : psi_(std::move(psi)) {
    if (psi_.rows() == 0 || psi_.cols() == 0) throw InvalidArgument("PurifiedState: empty block matrix");
    const double tr = psi_.squaredNorm();
    if (std::abs(tr - 1.0) > kStateTolerance) {
        throw InvalidArgument("PurifiedState: Tr(psi psi^dagger) = " + std::to_string(tr) + " != 1");
    }
}

PurifiedState PurifiedState::from_pure(const PureState& state) {
    return PurifiedState(CMatrix(state.amplitudes()));
}

PurifiedState PurifiedState::from_column_stacked(const CVector& c, Eigen::Index dim, Eigen::Index rank) {
    if (dim <= 0 || rank <= 0 || c.size() != dim * rank) {
        throw InvalidArgument("PurifiedState: column-stacked length does not match dim*rank");
    }
    // Eigen's default storage is column-major, so this is exactly the
    // "second column under the first" reshaping.
    return PurifiedState(Eigen::Map<const CMatrix>(c.data(), dim, rank));
}

CVector PurifiedState::column_stacked() const {
    return Eigen::Map<const CVector>(psi_.data(), psi_.size());
}

PureState bloch_to_state(const BlochAngles& angles) {
    CVector v(2);
    const Complex global = std::polar(1.0, angles.chi);
    v[0] = global * std::cos(angles.theta / 2.0);
    v[1] = global * std::sin(angles.theta / 2.0) * std::polar(1.0, angles.phi);
    return PureState::normalized(v);
}

double fidelity_pure(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) throw InvalidArgument("fidelity_pure: dimension mismatch");
    return std::norm(a.amplitudes().dot(b.amplitudes()));
}

PurifiedState purify(const DensityMatrix& rho, Eigen::Index rank) {
    const Eigen::Index s = rho.dim();
    if (rank < 1 || rank > s) throw InvalidArgument("purify: rank must lie in [1, dim]");

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho.matrix());
    if (eig.info() != Eigen::Success) throw NumericalError("purify: eigendecomposition failed");

    struct Pair {
        double value;
        CVector vector;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(s));
    for (Eigen::Index i = 0; i < s; ++i) {
        double lam = eig.eigenvalues()[i];
        if (lam < 0.0 && lam >= -kStateTolerance) lam = 0.0;
        pairs.push_back({lam, fix_phase(eig.eigenvectors().col(i))});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (std::abs(a.value - b.value) > kStateTolerance) return a.value > b.value;
        return lexicographic_less(a.vector, b.vector);
    });

    const auto numerical_rank = std::count_if(pairs.begin(), pairs.end(),
                                              [](const Pair& p) { return p.value > kStateTolerance; });
    if (rank < numerical_rank) {
        throw InvalidArgument("purify: rank " + std::to_string(rank) + " below numerical rank " +
                              std::to_string(numerical_rank));
    }

    CMatrix psi(s, rank);
    for (Eigen::Index j = 0; j < rank; ++j) {
        psi.col(j) = std::sqrt(pairs[static_cast<std::size_t>(j)].value) * pairs[static_cast<std::size_t>(j)].vector;
    }
    // Clipped eigenvalues and dropped tails leave the trace off by roundoff.
    psi /= psi.norm();
    return PurifiedState(std::move(psi));
}

DensityMatrix density_of(const PurifiedState& state) {
    CMatrix rho = state.psi() * state.psi().adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(std::move(rho));
}

PureState dominant_state(const PurifiedState& state) {
    if (state.rank() == 1) return PureState::normalized(state.psi().col(0));
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(state.psi() * state.psi().adjoint());
    return PureState::normalized(eig.eigenvectors().col(eig.eigenvalues().size() - 1));
}

Eigen::Vector3d bloch_vector(const CMatrix& op) {
    if (op.rows() != 2 || op.cols() != 2) throw InvalidArgument("bloch_vector: operator must be 2x2");
    // Tr(sigma_x A) = A01 + A10, Tr(sigma_y A) = i(A01 - A10), Tr(sigma_z A) = A00 - A11.
    const Complex x = op(0, 1) + op(1, 0);
    const Complex y = Complex(0.0, 1.0) * (op(0, 1) - op(1, 0));
    const Complex z = op(0, 0) - op(1, 1);
    return {x.real(), y.real(), z.real()};
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("max_abs_diff: shape mismatch");
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace fuzzytomo
