#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "evolvid/network.hpp"

namespace evolvid {

// One time-stamped sample of the 8 inputs and 6 measured coefficients.
struct FlightRecord {
    double t = 0.0;
    double alpha = 0.0, beta = 0.0;          // radians
    double p_n = 0.0, q_n = 0.0, r_n = 0.0;  // normalized rates
    double delta_e = 0.0, delta_a = 0.0, delta_r = 0.0;  // radians
    double c_d = 0.0, c_l = 0.0, c_m = 0.0, c_y = 0.0, c_r = 0.0, c_n = 0.0;
    bool has_targets = true;

    double input(int idx) const;      // 0..7 in schema order
    void set_input(int idx, double);  // used by the delta method
    double target(int idx) const;     // 0..5: c_d c_l c_m c_y c_r c_n
};

inline constexpr std::array<const char*, 8> kInputNames = {
    "alpha", "beta", "p_n", "q_n", "r_n", "delta_e", "delta_a", "delta_r"};
inline constexpr std::array<const char*, 6> kTargetNames = {"c_d", "c_l", "c_m",
                                                            "c_y", "c_r", "c_n"};

using Dataset = std::vector<FlightRecord>;

enum class SplitSetting { Setting1, Setting2 };  // 80/20 and 50/50 chronological

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Dataset load_flight_csv(const std::string& path);
void save_flight_csv(const Dataset& data, const std::string& path);

std::pair<Dataset, Dataset> split(const Dataset& data, SplitSetting setting);

// Per-input population mean/std over the 8 schema inputs, std floored at kStdFloor.
NormStats fit_normalization(const Dataset& train);

struct AeroParams;  // aero.hpp

struct ManeuverConfig {
    double dt = 0.04;
    double alpha_trim = 0.08;
    double alpha_amp = 0.05;
    double beta_amp = 0.04;
    double rate_amp = 0.04;
    double surface_amp = 0.06;
};

// Seeded synthetic flight: multi-sine/doublet excitation of the 8 inputs shaped
// after short-period, bank-to-bank and dutch-roll maneuvers, coefficients from the
// linear models plus zero-mean Gaussian noise of relative scale noise_std.
Dataset synthesize(const std::array<AeroParams, 6>& params, const ManeuverConfig& cfg,
                   int n, double noise_std, std::uint64_t seed);

}  // namespace evolvid
