#include "radseg/surrogate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace radseg
{
namespace
{

constexpr double kNugget = 1e-6;
constexpr double kLengthGrid[] = {0.05, 0.1, 0.2, 0.35, 0.6, 1.0, 2.0};

} // namespace

double GaussianProcess::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& ls) const
{
    const double r = std::sqrt(((a - b).array() / ls.array()).square().sum());
    const double s = std::sqrt(5.0) * r;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double GaussianProcess::evaluate_lml(const Eigen::VectorXd& ls) const
{
    const auto m = x_.rows();
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index j = 0; j <= i; ++j)
        {
            const double v = kernel(x_.row(i).transpose(), x_.row(j).transpose(), ls);
            k(i, j) = v;
            k(j, i) = v;
        }
        k(i, i) += kNugget;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success)
        return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd a = llt.solve(y_);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * y_.dot(a) - 0.5 * log_det - 0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);
}

void GaussianProcess::factorize()
{
    const auto m = x_.rows();
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index j = 0; j <= i; ++j)
        {
            const double v = kernel(x_.row(i).transpose(), x_.row(j).transpose(), length_scales_);
            k(i, j) = v;
            k(j, i) = v;
        }
        k(i, i) += kNugget;
    }
    chol_.compute(k);
    if (chol_.info() != Eigen::Success)
    {
        // duplicate points with a tiny nugget; regularize harder
        k.diagonal().array() += 1e-4;
        chol_.compute(k);
    }
    alpha_ = chol_.solve(y_);
}

void GaussianProcess::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
{
    if (x.rows() != y.size() || x.rows() == 0)
        throw std::invalid_argument("GP fit needs matching, non-empty data");
    x_ = x;
    y_mean_ = y.mean();
    const double var = (y.array() - y_mean_).square().mean();
    y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
    y_ = (y.array() - y_mean_) / y_scale_;

    const auto d = x.cols();
    length_scales_ = Eigen::VectorXd::Constant(d, 0.35);
    lml_ = evaluate_lml(length_scales_);
    for (int sweep = 0; sweep < 2; ++sweep)
    {
        bool changed = false;
        for (Eigen::Index dim = 0; dim < d; ++dim)
        {
            for (const double v : kLengthGrid)
            {
                Eigen::VectorXd trial = length_scales_;
                trial[dim] = v;
                const double l = evaluate_lml(trial);
                if (l > lml_ + 1e-12)
                {
                    lml_ = l;
                    length_scales_ = trial;
                    changed = true;
                }
            }
        }
        if (!changed)
            break;
    }
    factorize();
}

GaussianProcess::Prediction GaussianProcess::predict(const Eigen::VectorXd& point) const
{
    const auto m = x_.rows();
    Eigen::VectorXd ks(m);
    for (Eigen::Index i = 0; i < m; ++i)
        ks[i] = kernel(point, x_.row(i).transpose(), length_scales_);
    const double mean = ks.dot(alpha_);
    const Eigen::VectorXd v = chol_.matrixL().solve(ks);
    const double var = std::max(0.0, 1.0 + kNugget - v.squaredNorm());
    return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

double expected_improvement(double mean, double stddev, double best, double xi)
{
    const double gain = mean - best - xi;
    if (stddev <= 1e-12)
        return std::max(0.0, gain);
    const double z = gain / stddev;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return gain * cdf + stddev * pdf;
}

} // namespace radseg
