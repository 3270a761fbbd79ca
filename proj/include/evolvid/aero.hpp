#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "evolvid/flight_data.hpp"

namespace evolvid {

// The six aerodynamic coefficients with their fixed linear regressor structure.
enum class CoeffKind { CD, CL, CM, CY, CR, CN };

inline constexpr std::array<CoeffKind, 6> kAllCoeffs = {CoeffKind::CD, CoeffKind::CL,
                                                        CoeffKind::CM, CoeffKind::CY,
                                                        CoeffKind::CR, CoeffKind::CN};

const char* coeff_name(CoeffKind k);          // "CD".."CN"
CoeffKind coeff_from_name(const std::string&);
int coeff_target_index(CoeffKind k);          // column in FlightRecord targets

// Indices into the 8 schema inputs used by this coefficient, in model order
// (CD/CL/CM: alpha, q_n, delta_e; CY/CN: beta, p_n, r_n, delta_r; CR: beta, p_n, r_n, delta_a).
const std::vector<int>& coeff_regressors(CoeffKind k);

struct AeroParams {
    CoeffKind kind = CoeffKind::CL;
    double bias = 0.0;
    std::vector<double> slopes;  // one per regressor, model order

    void validate() const;
};

// Built-in OLS parameter table ("table-v-defaults" in the CLI), used as
// generator ground truth for synthetic data.
std::array<AeroParams, 6> table_v_ols_params();

double eval_coefficient_model(const AeroParams& params, const FlightRecord& rec);

struct RankDeficientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least squares via normal equations with a pivoted-QR rank check that names
// the collinear columns on failure.
AeroParams ols_fit(const Dataset& records, CoeffKind kind);

struct DerivativeSeries {
    CoeffKind kind = CoeffKind::CL;
    std::string input_name;
    std::vector<double> values;
    double mean = 0.0, median = 0.0, stddev = 0.0;
    std::vector<double> bin_edges;  // size bins+1
    std::vector<long> bin_counts;   // size bins
};

// Central-difference delta method: h = scale * per-feature training std.
// `predict` maps a record to the model's coefficient value.
DerivativeSeries delta_derivatives(const std::function<double(const FlightRecord&)>& predict,
                                   const Dataset& records, CoeffKind kind,
                                   const std::string& input_name, double train_std,
                                   double scale = 0.01, int bins = 30);

// Convenience wrappers for the two model families.
DerivativeSeries delta_derivatives(const AeroParams& model, const Dataset& records,
                                   const std::string& input_name, double train_std,
                                   double scale = 0.01, int bins = 30);
DerivativeSeries delta_derivatives(const Network& model, CoeffKind kind,
                                   const Dataset& records, const std::string& input_name,
                                   double train_std, double scale = 0.01, int bins = 30);

struct ParameterSummary {
    std::string parameter;  // e.g. "CL_alpha"
    double mean = 0.0;
    double median = 0.0;
};

// Collapses the per-sample series into a Table-V style parameter table.
// Requires one series per (kind, regressor) pair; throws naming absent pairs.
std::vector<ParameterSummary> summarize_derivatives(
    const std::map<std::pair<CoeffKind, std::string>, DerivativeSeries>& series);

void write_parameter_table(const std::vector<ParameterSummary>& table, const std::string& path);
void write_histogram_csv(const DerivativeSeries& s, const std::string& path);

}  // namespace evolvid
