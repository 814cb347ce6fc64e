#pragma once

#include <vector>

namespace radseg
{

/// Natural cubic spline through (t_i, y_i), t strictly increasing, n >= 2.
/// With two knots it degenerates to the straight line. Outside the knot
/// range the boundary cubic is continued.
class CubicSpline
{
public:
    CubicSpline(std::vector<double> t, std::vector<double> y);

    double operator()(double t) const;
    double derivative(double t) const;

private:
    std::size_t segment(double t) const;

    std::vector<double> t_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> c_;
    std::vector<double> d_;
};

/// Piecewise-linear interpolant, continued linearly beyond the ends.
class LinearInterpolant
{
public:
    LinearInterpolant(std::vector<double> t, std::vector<double> y);

    double operator()(double t) const;
    double derivative(double t) const;

private:
    std::size_t segment(double t) const;

    std::vector<double> t_;
    std::vector<double> y_;
};

} // namespace radseg
