#pragma once

#include <Eigen/Dense>

#include <vector>

namespace radseg
{

/// Gaussian-process regression on the unit cube with a Matern-5/2 kernel and
/// one length scale per dimension. Targets are standardized internally.
class GaussianProcess
{
public:
    struct Prediction
    {
        double mean{0.0};
        double stddev{0.0};
    };

    /// Fits length scales by coordinate-wise grid search on the log marginal
    /// likelihood. Rows of x are points in [0, 1]^d.
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

    Prediction predict(const Eigen::VectorXd& point) const;

    const Eigen::VectorXd& length_scales() const { return length_scales_; }
    double log_marginal_likelihood() const { return lml_; }

private:
    double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& ls) const;
    /// Returns -inf when the Gram matrix is not positive definite.
    double evaluate_lml(const Eigen::VectorXd& ls) const;
    void factorize();

    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;  // standardized
    double y_mean_{0.0};
    double y_scale_{1.0};
    Eigen::VectorXd length_scales_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
    double lml_{0.0};
};

/// Expected improvement over `best` for a maximization problem.
double expected_improvement(double mean, double stddev, double best, double xi = 0.01);

} // namespace radseg
