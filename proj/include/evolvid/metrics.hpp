#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "evolvid/aero.hpp"

namespace evolvid {

// Theil's inequality coefficient in [0,1].
double tic(const Eigen::VectorXd& measured, const Eigen::VectorXd& predicted);

struct TicTable {
    std::vector<std::string> models;                 // column order
    std::map<CoeffKind, std::vector<double>> cells;  // one TIC per model column
};

// Mean rank per model across coefficients; ascending TIC ranks first,
// ties share the average of the tied positions.
std::map<std::string, double> rank_models(const TicTable& table);

double rule_count_stats(const std::vector<int>& rule_counts);  // mean, 2-decimal rounded

void write_tic_table(const TicTable& table, const std::string& path);
void write_rank_table(const std::map<std::string, double>& ranks, const std::string& path);

}  // namespace evolvid
