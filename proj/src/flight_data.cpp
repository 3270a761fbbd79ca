#include "evolvid/flight_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "evolvid/aero.hpp"

namespace evolvid {

double FlightRecord::input(int idx) const {
    switch (idx) {
        case 0: return alpha;
        case 1: return beta;
        case 2: return p_n;
        case 3: return q_n;
        case 4: return r_n;
        case 5: return delta_e;
        case 6: return delta_a;
        case 7: return delta_r;
        default: throw std::out_of_range("FlightRecord::input");
    }
}

void FlightRecord::set_input(int idx, double v) {
    switch (idx) {
        case 0: alpha = v; break;
        case 1: beta = v; break;
        case 2: p_n = v; break;
        case 3: q_n = v; break;
        case 4: r_n = v; break;
        case 5: delta_e = v; break;
        case 6: delta_a = v; break;
        case 7: delta_r = v; break;
        default: throw std::out_of_range("FlightRecord::set_input");
    }
}

double FlightRecord::target(int idx) const {
    switch (idx) {
        case 0: return c_d;
        case 1: return c_l;
        case 2: return c_m;
        case 3: return c_y;
        case 4: return c_r;
        case 5: return c_n;
        default: throw std::out_of_range("FlightRecord::target");
    }
}

namespace {

const std::vector<std::string> kSchema = {"t",       "alpha",   "beta",    "p_n",
                                          "q_n",     "r_n",     "delta_e", "delta_a",
                                          "delta_r", "c_d",     "c_l",     "c_m",
                                          "c_y",     "c_r",     "c_n"};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, long row, const std::string& col) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    double v = 0.0;
    auto [p, ec] = std::from_chars(begin, end, v);
    bool trailing_ok = true;
    for (const char* c = p; c < end; ++c)
        if (*c != ' ' && *c != '\t' && *c != '\r') trailing_ok = false;
    if (ec != std::errc{} || !trailing_ok || !std::isfinite(v)) {
        std::ostringstream os;
        os << "non-numeric value '" << cell << "' at row " << row << ", column " << col;
        throw CsvError(os.str());
    }
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

}  // namespace

Dataset load_flight_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    std::vector<int> col_of(kSchema.size(), -1);
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto it = std::find(kSchema.begin(), kSchema.end(), header[c]);
        if (it != kSchema.end()) col_of[it - kSchema.begin()] = static_cast<int>(c);
    }
    // t plus the 8 inputs are mandatory; coefficient columns are optional as a block
    for (int k = 0; k < 9; ++k)
        if (col_of[k] < 0) throw CsvError("missing column \"" + kSchema[k] + "\"");
    bool any_target = false, all_targets = true;
    for (int k = 9; k < 15; ++k) {
        if (col_of[k] >= 0) any_target = true;
        else all_targets = false;
    }
    if (any_target && !all_targets)
        for (int k = 9; k < 15; ++k)
            if (col_of[k] < 0) throw CsvError("missing column \"" + kSchema[k] + "\"");

    Dataset data;
    long row = 0;
    double prev_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        auto get = [&](int k) {
            if (col_of[k] >= static_cast<int>(cells.size()))
                throw CsvError("short row at index " + std::to_string(row));
            return parse_cell(cells[col_of[k]], row, kSchema[k]);
        };
        FlightRecord r;
        r.t = get(0);
        r.alpha = get(1);
        r.beta = get(2);
        r.p_n = get(3);
        r.q_n = get(4);
        r.r_n = get(5);
        r.delta_e = get(6);
        r.delta_a = get(7);
        r.delta_r = get(8);
        r.has_targets = all_targets;
        if (all_targets) {
            r.c_d = get(9);
            r.c_l = get(10);
            r.c_m = get(11);
            r.c_y = get(12);
            r.c_r = get(13);
            r.c_n = get(14);
        }
        if (!(r.t > prev_t))
            throw CsvError("timestamps not strictly increasing at row " + std::to_string(row));
        prev_t = r.t;
        data.push_back(r);
        ++row;
    }
    if (data.empty()) throw CsvError("no data rows in " + path);
    return data;
}

void save_flight_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot open file for writing: " + path);
    const bool targets = !data.empty() && data.front().has_targets;
    out << "t,alpha,beta,p_n,q_n,r_n,delta_e,delta_a,delta_r";
    if (targets) out << ",c_d,c_l,c_m,c_y,c_r,c_n";
    out << '\n';
    for (const auto& r : data) {
        out << format_double(r.t);
        for (int i = 0; i < 8; ++i) out << ',' << format_double(r.input(i));
        if (targets)
            for (int k = 0; k < 6; ++k) out << ',' << format_double(r.target(k));
        out << '\n';
    }
}

std::pair<Dataset, Dataset> split(const Dataset& data, SplitSetting setting) {
    if (data.size() < 2) throw std::invalid_argument("split: need at least 2 rows");
    const double frac = setting == SplitSetting::Setting1 ? 0.8 : 0.5;
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(frac * static_cast<double>(data.size())));
    Dataset train(data.begin(), data.begin() + n_train);
    Dataset test(data.begin() + n_train, data.end());
    return {std::move(train), std::move(test)};
}

NormStats fit_normalization(const Dataset& train) {
    if (train.empty()) throw std::invalid_argument("fit_normalization: empty training set");
    NormStats stats;
    stats.mean = Eigen::VectorXd::Zero(8);
    stats.stddev = Eigen::VectorXd::Zero(8);
    const double n = static_cast<double>(train.size());
    for (const auto& r : train)
        for (int i = 0; i < 8; ++i) stats.mean[i] += r.input(i);
    stats.mean /= n;
    for (const auto& r : train)
        for (int i = 0; i < 8; ++i) {
            const double d = r.input(i) - stats.mean[i];
            stats.stddev[i] += d * d;
        }
    stats.stddev = (stats.stddev / n).cwiseSqrt().cwiseMax(kStdFloor);
    return stats;
}

namespace {

// deterministic standard normal: Box-Muller on raw mt19937_64 draws
class NormalGen {
  public:
    explicit NormalGen(std::uint64_t seed) : eng_(seed) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        have_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    double uniform() {
        // in (0,1]
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_ = false;
};

double doublet(double t, double t0, double width) {
    const double a = (t - t0) / width;
    const double b = (t - t0 - 1.5 * width) / width;
    return std::exp(-a * a) - std::exp(-b * b);
}

}  // namespace

Dataset synthesize(const std::array<AeroParams, 6>& params, const ManeuverConfig& cfg,
                   int n, double noise_std, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("synthesize: n >= 1");
    if (noise_std < 0.0) throw std::invalid_argument("synthesize: noise_std >= 0");
    const double two_pi = 2.0 * std::numbers::pi;
    Dataset data(n);
    for (int k = 0; k < n; ++k) {
        const double t = k * cfg.dt;
        FlightRecord& r = data[k];
        r.t = t;
        // short period: elevator doublet exciting alpha / q_n
        r.alpha = cfg.alpha_trim + cfg.alpha_amp * (std::sin(two_pi * 0.18 * t) +
                                                    0.45 * std::sin(two_pi * 0.47 * t + 1.1));
        r.q_n = cfg.rate_amp * (0.8 * std::sin(two_pi * 0.18 * t + 0.9) +
                                0.5 * std::sin(two_pi * 0.62 * t));
        r.delta_e = cfg.surface_amp * (doublet(t, 5.0, 2.0) +
                                       0.4 * std::sin(two_pi * 0.33 * t + 0.4));
        // bank to bank: aileron doublet for beta / p_n
        r.beta = cfg.beta_amp * (std::sin(two_pi * 0.12 * t + 0.3) +
                                 0.6 * std::sin(two_pi * 0.40 * t + 2.1));
        r.p_n = cfg.rate_amp * (0.9 * std::sin(two_pi * 0.25 * t + 1.7) +
                                0.5 * std::sin(two_pi * 0.70 * t + 0.2));
        r.delta_a = cfg.surface_amp * (doublet(t, 25.0, 2.5) +
                                       0.5 * std::sin(two_pi * 0.45 * t + 2.0));
        // dutch roll: rudder doublet for r_n
        r.r_n = cfg.rate_amp * (0.8 * std::sin(two_pi * 0.15 * t + 2.4) +
                                0.6 * std::sin(two_pi * 0.52 * t + 1.1));
        r.delta_r = cfg.surface_amp * (doublet(t, 45.0, 3.0) +
                                       0.5 * std::sin(two_pi * 0.28 * t + 0.8));
        r.has_targets = true;
    }
    std::array<std::vector<double>, 6> clean;
    for (int c = 0; c < 6; ++c) {
        clean[c].resize(n);
        for (int k = 0; k < n; ++k) clean[c][k] = eval_coefficient_model(params[c], data[k]);
    }
    std::array<double, 6> scale{};
    for (int c = 0; c < 6; ++c) {
        double mean = 0.0, var = 0.0;
        for (double v : clean[c]) mean += v;
        mean /= n;
        for (double v : clean[c]) var += (v - mean) * (v - mean);
        scale[c] = std::sqrt(var / n);
    }
    NormalGen rng(seed);
    for (int k = 0; k < n; ++k) {
        std::array<double, 6> noisy{};
        for (int c = 0; c < 6; ++c) {
            const double eps = noise_std > 0.0 ? noise_std * scale[c] * rng() : 0.0;
            noisy[static_cast<std::size_t>(coeff_target_index(params[c].kind))] =
                clean[c][k] + eps;
        }
        data[k].c_d = noisy[0];
        data[k].c_l = noisy[1];
        data[k].c_m = noisy[2];
        data[k].c_y = noisy[3];
        data[k].c_r = noisy[4];
        data[k].c_n = noisy[5];
    }
    return data;
}

}  // namespace evolvid
