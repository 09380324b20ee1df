#pragma once

// Wave-plate angle synthesis from Bloch directions and the shipped
// cube / octahedron tomography protocols.

#include <cstdint>
#include <string>
#include <vector>

#include "fuzzytomo/optics.hpp"

namespace fuzzytomo {

/// One branch of the plate-angle synthesis for a target direction.
/// gamma = 2(beta - alpha) and delta2 = 2 alpha are the auxiliary angles of
/// the combined HWP+QWP matrix (delta2 is unrelated to retardance).
struct AngleSolution {
    double gamma = 0.0;
    double delta2 = 0.0;
    double chi = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    int branch_k = 0;

    [[nodiscard]] PlateConfig config() const { return {alpha, beta}; }
};

struct Protocol {
    std::string label;
    std::vector<PlateConfig> configs;
    std::vector<std::int64_t> trials_per_config;

    [[nodiscard]] std::size_t size() const noexcept { return configs.size(); }
    [[nodiscard]] std::int64_t total_trials() const;

    /// Copy with n_tot split equally; the remainder goes to the first configs.
    [[nodiscard]] Protocol with_total_trials(std::int64_t n_tot) const;

    /// Throws InvalidArgument on empty protocols, size mismatch or
    /// non-positive trial counts.
    void validate() const;
};

/// chi = atan2(cos^2(t/2) + sin^2(t/2) cos 2p, sin^2(t/2) sin 2p) / 2 + k pi/2,
/// with atan2(0, 0) taken as 0.
[[nodiscard]] double global_phase(double theta, double phi, int k);

/// Plate angles whose monochromatic V-port projector at the design
/// wavelength is |psi(theta, phi)><psi(theta, phi)|. k in 0..3.
[[nodiscard]] AngleSolution plate_angles_from_bloch(double theta, double phi, int k);

/// Three configurations measuring the Pauli eigenbases (x, y, z).
[[nodiscard]] Protocol cube_protocol(std::int64_t n_tot = 3000);

/// Four configurations whose eight projectors sit on the octahedron-face
/// directions (+-1, +-1, +-1)/sqrt(3).
[[nodiscard]] Protocol octahedron_protocol(std::int64_t n_tot = 4000);

/// "cube" | "octahedron"; throws InvalidArgument otherwise.
[[nodiscard]] Protocol protocol_by_name(const std::string& name, std::int64_t n_tot);

}  // namespace fuzzytomo
