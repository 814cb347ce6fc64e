#include "radseg/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace radseg
{
namespace
{

void check_knots(const std::vector<double>& t, const std::vector<double>& y)
{
    if (t.size() != y.size() || t.size() < 2)
        throw std::invalid_argument("interpolation needs at least two knots of matching size");
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("interpolation knots must be strictly increasing");
    }
}

std::size_t find_segment(const std::vector<double>& t, double x)
{
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const auto idx = static_cast<std::size_t>(it - t.begin());
    return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, t.size() - 2);
}

} // namespace

CubicSpline::CubicSpline(std::vector<double> t, std::vector<double> y) : t_(std::move(t)), a_(std::move(y))
{
    check_knots(t_, a_);
    const std::size_t n = t_.size();
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        h[i] = t_[i + 1] - t_[i];

    // second-derivative system (Thomas algorithm), natural ends: c_0 = c_{n-1} = 0
    c_.assign(n, 0.0);
    if (n > 2)
    {
        const std::size_t m = n - 2;
        std::vector<double> diag(m), upper(m), rhs(m);
        for (std::size_t k = 0; k < m; ++k)
        {
            const std::size_t i = k + 1;
            diag[k] = 2.0 * (h[i - 1] + h[i]);
            upper[k] = h[i];
            rhs[k] = 3.0 * ((a_[i + 1] - a_[i]) / h[i] - (a_[i] - a_[i - 1]) / h[i - 1]);
        }
        for (std::size_t k = 1; k < m; ++k)
        {
            const double w = h[k] / diag[k - 1];
            diag[k] -= w * upper[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        c_[m] = rhs[m - 1] / diag[m - 1];
        for (std::size_t k = m - 1; k-- > 0;)
            c_[k + 1] = (rhs[k] - upper[k] * c_[k + 2]) / diag[k];
    }

    b_.assign(n - 1, 0.0);
    d_.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        b_[i] = (a_[i + 1] - a_[i]) / h[i] - h[i] * (2.0 * c_[i] + c_[i + 1]) / 3.0;
        d_[i] = (c_[i + 1] - c_[i]) / (3.0 * h[i]);
    }
}

std::size_t CubicSpline::segment(double t) const { return find_segment(t_, t); }

double CubicSpline::operator()(double t) const
{
    const std::size_t i = segment(t);
    const double x = t - t_[i];
    return a_[i] + x * (b_[i] + x * (c_[i] + x * d_[i]));
}

double CubicSpline::derivative(double t) const
{
    const std::size_t i = segment(t);
    const double x = t - t_[i];
    return b_[i] + x * (2.0 * c_[i] + 3.0 * x * d_[i]);
}

LinearInterpolant::LinearInterpolant(std::vector<double> t, std::vector<double> y)
    : t_(std::move(t)), y_(std::move(y))
{
    check_knots(t_, y_);
}

std::size_t LinearInterpolant::segment(double t) const { return find_segment(t_, t); }

double LinearInterpolant::operator()(double t) const
{
    const std::size_t i = segment(t);
    return y_[i] + derivative(t) * (t - t_[i]);
}

double LinearInterpolant::derivative(double t) const
{
    const std::size_t i = segment(t);
    return (y_[i + 1] - y_[i]) / (t_[i + 1] - t_[i]);
}

} // namespace radseg
