#include "fuzzytomo/protocol.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "fuzzytomo/errors.hpp"

namespace fuzzytomo {
namespace {

constexpr double kPi = std::numbers::pi;

// Angle in (-pi, pi] from a (cos, sin) pair. Equal to sign(s) * acos(c), but
// atan2 keeps full precision where acos flattens out near c = +-1.
double angle_from_pair(double c, double s) {
    if (std::abs(c * c + s * s - 1.0) > 1e-9) {
        throw NumericalError("plate_angles_from_bloch: inconsistent (cos, sin) pair");
    }
    return std::atan2(s, c);
}

double wrap_pi(double x) {
    double r = std::fmod(x, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r = 0.0;
    return r;
}

}  // namespace

std::int64_t Protocol::total_trials() const {
    return std::accumulate(trials_per_config.begin(), trials_per_config.end(), std::int64_t{0});
}

Protocol Protocol::with_total_trials(std::int64_t n_tot) const {
    if (configs.empty()) throw InvalidArgument("Protocol: no configurations");
    const auto l = static_cast<std::int64_t>(configs.size());
    if (n_tot < l) throw InvalidArgument("Protocol: n_tot smaller than the number of configurations");
    Protocol out = *this;
    out.trials_per_config.assign(configs.size(), n_tot / l);
    for (std::int64_t i = 0; i < n_tot % l; ++i) ++out.trials_per_config[static_cast<std::size_t>(i)];
    return out;
}

void Protocol::validate() const {
    if (configs.empty()) throw InvalidArgument("Protocol: no configurations");
    if (trials_per_config.size() != configs.size()) {
        throw InvalidArgument("Protocol: trials_per_config size does not match configs");
    }
    for (auto n : trials_per_config) {
        if (n <= 0) throw InvalidArgument("Protocol: trial counts must be positive");
    }
}

double global_phase(double theta, double phi, int k) {
    const double c2 = std::pow(std::cos(theta / 2.0), 2);
    const double s2 = std::pow(std::sin(theta / 2.0), 2);
    const double num = c2 + s2 * std::cos(2.0 * phi);
    const double den = s2 * std::sin(2.0 * phi);
    // atan2 already returns 0 for (0, 0), but roundoff can leave either
    // argument at ~1e-17, so snap the degenerate case explicitly.
    const double base = (std::abs(num) < 1e-15 && std::abs(den) < 1e-15) ? 0.0 : std::atan2(num, den);
    return 0.5 * base + 0.5 * kPi * k;
}

AngleSolution plate_angles_from_bloch(double theta, double phi, int k) {
    if (k < 0 || k > 3) throw InvalidArgument("plate_angles_from_bloch: branch k must be in 0..3");
    const double chi = global_phase(theta, phi, k);
    const double ct = std::cos(theta / 2.0);
    const double st = std::sin(theta / 2.0);
    const double r2 = std::numbers::sqrt2;

    const double gamma = angle_from_pair(r2 * ct * std::cos(chi), -r2 * st * std::cos(phi + chi));
    const double delta = angle_from_pair(-r2 * ct * std::sin(chi), -r2 * st * std::sin(phi + chi));

    AngleSolution sol;
    sol.gamma = gamma;
    sol.delta2 = delta;
    sol.chi = chi;
    sol.alpha = wrap_pi(delta / 2.0);
    sol.beta = wrap_pi((gamma + delta) / 2.0);
    sol.branch_k = k;
    return sol;
}

Protocol cube_protocol(std::int64_t n_tot) {
    Protocol p;
    p.label = "cube";
    p.configs = {{5.0 * kPi / 8.0, kPi / 2.0}, {11.0 * kPi / 16.0, 3.0 * kPi / 4.0}, {kPi / 2.0, kPi / 2.0}};
    return p.with_total_trials(n_tot);
}

Protocol octahedron_protocol(std::int64_t n_tot) {
    // Upper-hemisphere face directions. The branch per direction follows the
    // published angle table (k = 0 for the first and third, k = 3 otherwise);
    // every branch induces the same projector.
    const double theta = std::acos(1.0 / std::sqrt(3.0));
    struct Target {
        double phi;
        int k;
    };
    const Target targets[] = {{kPi / 4.0, 0}, {3.0 * kPi / 4.0, 3}, {5.0 * kPi / 4.0, 0}, {7.0 * kPi / 4.0, 3}};
    Protocol p;
    p.label = "octahedron";
    for (const auto& t : targets) p.configs.push_back(plate_angles_from_bloch(theta, t.phi, t.k).config());
    return p.with_total_trials(n_tot);
}

Protocol protocol_by_name(const std::string& name, std::int64_t n_tot) {
    if (name == "cube") return cube_protocol(n_tot);
    if (name == "octahedron") return octahedron_protocol(n_tot);
    throw InvalidArgument("unknown protocol '" + name + "' (expected cube or octahedron)");
}

}  // namespace fuzzytomo
