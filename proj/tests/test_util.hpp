#pragma once

#include "ocsmm/group.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

namespace testing_util {

inline std::filesystem::path tmp_dir(const std::string& name) {
    const char* env = std::getenv("OCSMM_TEST_TMP");
    std::filesystem::path base = env ? env : std::filesystem::temp_directory_path() / "ocsmm_tests";
    auto dir = base / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline ocsmm::PointSet random_points(std::mt19937_64& gen, Eigen::Index n, Eigen::Index d, double scale = 1.0,
                                     double offset = 0.0) {
    std::normal_distribution<double> nd(0.0, 1.0);
    ocsmm::PointSet p(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) p(i, j) = offset + scale * nd(gen);
    return p;
}

// Gram of random feature vectors: PSD by construction, rank min(n, r).
inline Eigen::MatrixXd random_psd(std::mt19937_64& gen, Eigen::Index n, Eigen::Index r) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd f(n, r);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < r; ++j) f(i, j) = nd(gen);
    Eigen::MatrixXd k = f * f.transpose();
    return 0.5 * (k + k.transpose());
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& gen, Eigen::Index d, double floor = 0.05) {
    Eigen::MatrixXd a = random_psd(gen, d, d) * 0.2;
    a.diagonal().array() += floor;
    return a;
}

inline double naive_rbf(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y, double sigma) {
    return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

// Plain double loop, no blocking, no reordering.
inline double naive_mean_inner(const ocsmm::PointSet& a, const ocsmm::PointSet& b, double sigma) {
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j) acc += naive_rbf(a.row(i), b.row(j), sigma);
    return static_cast<double>(acc / (static_cast<long double>(a.rows()) * static_cast<long double>(b.rows())));
}

inline ocsmm::Group singleton(const std::string& id, const Eigen::RowVectorXd& x) {
    ocsmm::PointSet p(1, x.size());
    p.row(0) = x;
    return ocsmm::Group::from_points(id, p);
}

} // namespace testing_util
