#include "evolvid/aero.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace evolvid {

const char* coeff_name(CoeffKind k) {
    switch (k) {
        case CoeffKind::CD: return "CD";
        case CoeffKind::CL: return "CL";
        case CoeffKind::CM: return "CM";
        case CoeffKind::CY: return "CY";
        case CoeffKind::CR: return "CR";
        case CoeffKind::CN: return "CN";
    }
    throw std::invalid_argument("coeff_name: bad kind");
}

CoeffKind coeff_from_name(const std::string& s) {
    for (CoeffKind k : kAllCoeffs)
        if (s == coeff_name(k)) return k;
    throw std::invalid_argument("unknown coefficient name: " + s);
}

int coeff_target_index(CoeffKind k) {
    switch (k) {
        case CoeffKind::CD: return 0;
        case CoeffKind::CL: return 1;
        case CoeffKind::CM: return 2;
        case CoeffKind::CY: return 3;
        case CoeffKind::CR: return 4;
        case CoeffKind::CN: return 5;
    }
    throw std::invalid_argument("coeff_target_index: bad kind");
}

const std::vector<int>& coeff_regressors(CoeffKind k) {
    // indices into the 8 schema inputs: alpha beta p_n q_n r_n delta_e delta_a delta_r
    static const std::vector<int> longitudinal = {0, 3, 5};       // alpha, q_n, delta_e
    static const std::vector<int> lateral_r = {1, 2, 4, 7};       // beta, p_n, r_n, delta_r
    static const std::vector<int> lateral_a = {1, 2, 4, 6};       // beta, p_n, r_n, delta_a
    switch (k) {
        case CoeffKind::CD:
        case CoeffKind::CL:
        case CoeffKind::CM: return longitudinal;
        case CoeffKind::CY:
        case CoeffKind::CN: return lateral_r;
        case CoeffKind::CR: return lateral_a;
    }
    throw std::invalid_argument("coeff_regressors: bad kind");
}

void AeroParams::validate() const {
    if (slopes.size() != coeff_regressors(kind).size())
        throw std::invalid_argument("AeroParams: slope count does not match regressor list");
}

std::array<AeroParams, 6> table_v_ols_params() {
    std::array<AeroParams, 6> p;
    p[0] = {CoeffKind::CD, 0.0, {0.2671, 1.9731, 0.1129}};
    p[1] = {CoeffKind::CL, 0.0, {5.3137, 1.5413, 0.2878}};
    p[2] = {CoeffKind::CM, 0.0, {-0.8832, -7.1838, -1.0895}};
    p[3] = {CoeffKind::CY, 0.0, {-1.0470, 0.1723, 0.6104, 0.1909}};
    p[4] = {CoeffKind::CR, 0.0, {-0.1027, -0.7606, 0.2336, -0.1925}};
    p[5] = {CoeffKind::CN, 0.0, {0.2539, -0.0444, -0.1357, -0.1438}};
    return p;
}

double eval_coefficient_model(const AeroParams& params, const FlightRecord& rec) {
    params.validate();
    const auto& regs = coeff_regressors(params.kind);
    double y = params.bias;
    for (std::size_t i = 0; i < regs.size(); ++i) y += params.slopes[i] * rec.input(regs[i]);
    return y;
}

AeroParams ols_fit(const Dataset& records, CoeffKind kind) {
    const auto& regs = coeff_regressors(kind);
    const int p = static_cast<int>(regs.size()) + 1;
    if (static_cast<int>(records.size()) < p)
        throw std::invalid_argument("ols_fit: fewer rows than regressors");
    Eigen::MatrixXd x(records.size(), p);
    Eigen::VectorXd y(records.size());
    const int ti = coeff_target_index(kind);
    for (std::size_t n = 0; n < records.size(); ++n) {
        x(n, 0) = 1.0;
        for (std::size_t i = 0; i < regs.size(); ++i) x(n, i + 1) = records[n].input(regs[i]);
        y[n] = records[n].target(ti);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        const auto perm = qr.colsPermutation().indices();
        std::ostringstream os;
        os << "ols_fit(" << coeff_name(kind) << "): rank-deficient regressor matrix;"
           << " collinear columns:";
        for (int c = qr.rank(); c < p; ++c) {
            const int col = perm[c];
            os << ' ' << (col == 0 ? "bias" : kInputNames[regs[col - 1]]);
        }
        throw RankDeficientError(os.str());
    }
    // normal equations
    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::VectorXd xty = x.transpose() * y;
    const Eigen::VectorXd beta = xtx.ldlt().solve(xty);
    AeroParams out;
    out.kind = kind;
    out.bias = beta[0];
    out.slopes.assign(beta.data() + 1, beta.data() + p);
    return out;
}

DerivativeSeries delta_derivatives(const std::function<double(const FlightRecord&)>& predict,
                                   const Dataset& records, CoeffKind kind,
                                   const std::string& input_name, double train_std,
                                   double scale, int bins) {
    if (!(scale > 0.0)) throw std::invalid_argument("delta_derivatives: scale > 0");
    const auto it = std::find(kInputNames.begin(), kInputNames.end(), input_name);
    if (it == kInputNames.end())
        throw std::invalid_argument("delta_derivatives: unknown input " + input_name);
    const int idx = static_cast<int>(it - kInputNames.begin());
    if (train_std <= kStdFloor)
        throw std::invalid_argument("delta_derivatives: cannot perturb constant input " +
                                    input_name);
    const double h = scale * train_std;
    DerivativeSeries s;
    s.kind = kind;
    s.input_name = input_name;
    s.values.reserve(records.size());
    for (const auto& rec : records) {
        FlightRecord plus = rec, minus = rec;
        plus.set_input(idx, rec.input(idx) + h);
        minus.set_input(idx, rec.input(idx) - h);
        s.values.push_back((predict(plus) - predict(minus)) / (2.0 * h));
    }
    // summary
    const double n = static_cast<double>(s.values.size());
    for (double v : s.values) s.mean += v;
    s.mean /= n;
    for (double v : s.values) s.stddev += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(s.stddev / n);
    std::vector<double> sorted = s.values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    // histogram over the observed range
    const double lo = sorted.front(), hi = sorted.back();
    if (hi <= lo) {
        s.bin_edges = {lo - 0.5, lo + 0.5};
        s.bin_counts = {static_cast<long>(s.values.size())};
    } else {
        const double width = (hi - lo) / bins;
        s.bin_edges.resize(bins + 1);
        for (int b = 0; b <= bins; ++b) s.bin_edges[b] = lo + b * width;
        s.bin_counts.assign(bins, 0);
        for (double v : s.values) {
            int b = static_cast<int>((v - lo) / width);
            b = std::clamp(b, 0, bins - 1);
            ++s.bin_counts[b];
        }
    }
    return s;
}

DerivativeSeries delta_derivatives(const AeroParams& model, const Dataset& records,
                                   const std::string& input_name, double train_std,
                                   double scale, int bins) {
    return delta_derivatives(
        [&model](const FlightRecord& r) { return eval_coefficient_model(model, r); }, records,
        model.kind, input_name, train_std, scale, bins);
}

DerivativeSeries delta_derivatives(const Network& model, CoeffKind kind, const Dataset& records,
                                   const std::string& input_name, double train_std,
                                   double scale, int bins) {
    const auto& regs = coeff_regressors(kind);
    auto predict = [&model, &regs](const FlightRecord& r) {
        Eigen::VectorXd x(regs.size());
        for (std::size_t i = 0; i < regs.size(); ++i) x[i] = r.input(regs[i]);
        return forward(x, model).y_out[0];
    };
    return delta_derivatives(predict, records, kind, input_name, train_std, scale, bins);
}

std::vector<ParameterSummary> summarize_derivatives(
    const std::map<std::pair<CoeffKind, std::string>, DerivativeSeries>& series) {
    // fixed report row order
    static const std::array<CoeffKind, 6> order = {CoeffKind::CL, CoeffKind::CD, CoeffKind::CM,
                                                   CoeffKind::CY, CoeffKind::CR, CoeffKind::CN};
    std::vector<std::string> missing;
    std::vector<ParameterSummary> table;
    for (CoeffKind k : order) {
        for (int reg : coeff_regressors(k)) {
            const std::string input = kInputNames[reg];
            auto it = series.find({k, input});
            if (it == series.end()) {
                missing.push_back(std::string(coeff_name(k)) + "_" + input);
                continue;
            }
            table.push_back({std::string(coeff_name(k)) + "_" + input, it->second.mean,
                             it->second.median});
        }
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "summarize_derivatives: missing series:";
        for (const auto& m : missing) os << ' ' << m;
        throw std::invalid_argument(os.str());
    }
    return table;
}

namespace {
std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}
}  // namespace

void write_parameter_table(const std::vector<ParameterSummary>& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "parameter,mean,median\n";
    for (const auto& row : table)
        out << row.parameter << ',' << fmt(row.mean) << ',' << fmt(row.median) << '\n';
}

void write_histogram_csv(const DerivativeSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "bin_left,bin_right,count\n";
    for (std::size_t b = 0; b < s.bin_counts.size(); ++b)
        out << fmt(s.bin_edges[b]) << ',' << fmt(s.bin_edges[b + 1]) << ',' << s.bin_counts[b]
            << '\n';
}

}  // namespace evolvid
