#include "nlmodes/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "nlmodes/errors.hpp"

namespace nlmodes {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order) {
    const auto n = nodes.size();
    if (order < 0 || n <= static_cast<std::size_t>(order)) {
        throw InvalidArgument("fd_weights: need more nodes than the derivative order");
    }
    const auto m = static_cast<std::size_t>(order);
    // c[i][k]: weight of node i for the k-th derivative.
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = c[i][m];
    }
    return w;
}

std::vector<double> differentiate_uniform(std::span<const double> values, double spacing) {
    const auto n = values.size();
    if (n < 2 || !(spacing > 0.0)) {
        throw InvalidArgument("differentiate_uniform: need >= 2 samples and positive spacing");
    }
    std::vector<double> out(n);
    const std::size_t width = std::min<std::size_t>(5, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            out[i] = (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * spacing);
            continue;
        }
        // one-sided stencil of `width` nodes containing i
        std::size_t first = (i < width / 2) ? 0 : std::min(i - width / 2, n - width);
        if (i + 2 >= n) {
            first = n - width;
        }
        std::vector<double> nodes(width);
        for (std::size_t k = 0; k < width; ++k) {
            nodes[k] = static_cast<double>(first + k) * spacing;
        }
        const auto w = fd_weights(static_cast<double>(i) * spacing, nodes, 1);
        double d = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
            d += w[k] * values[first + k];
        }
        out[i] = d;
    }
    return out;
}

std::vector<double> cumulative_simpson(std::span<const double> values, double spacing) {
    const auto n = values.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) {
        return out;
    }
    const double h12 = spacing / 12.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double piece = 0.0;
        if (n == 2) {
            piece = 0.5 * spacing * (values[0] + values[1]);
        } else if (i % 2 == 0 && i + 2 < n) {
            piece = h12 * (5.0 * values[i] + 8.0 * values[i + 1] - values[i + 2]);
        } else {
            piece = h12 * (-values[i - 1] + 8.0 * values[i] + 5.0 * values[i + 1]);
        }
        out[i + 1] = out[i] + piece;
    }
    return out;
}

std::vector<double> cumulative_simpson_from(std::span<const double> values, double spacing, std::size_t origin) {
    if (origin >= values.size()) {
        throw InvalidArgument("cumulative_simpson_from: origin outside the samples");
    }
    std::vector<double> out(values.size(), 0.0);
    const auto right = cumulative_simpson(values.subspan(origin), spacing);
    std::copy(right.begin(), right.end(), out.begin() + static_cast<std::ptrdiff_t>(origin));
    std::vector<double> reversed(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(origin) + 1);
    std::reverse(reversed.begin(), reversed.end());
    const auto left = cumulative_simpson(reversed, spacing);
    for (std::size_t k = 1; k < left.size(); ++k) {
        out[origin - k] = -left[k];
    }
    return out;
}

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
    if (panels < 2) {
        panels = 2;
    }
    if (panels % 2 != 0) {
        ++panels;
    }
    const double h = (b - a) / static_cast<double>(panels);
    double sum = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) {
        sum += f(a + static_cast<double>(i) * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                      double x_tolerance) {
    if (!(hi > lo) || !(x_tolerance > 0.0)) {
        throw InvalidArgument("golden_section_maximize: empty bracket or non-positive tolerance");
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    std::size_t evals = 2;
    while (b - a > x_tolerance) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        ++evals;
    }
    ScalarOptimum best;
    best.evaluations = evals;
    if (f1 >= f2) {
        best.x = x1;
        best.value = f1;
    } else {
        best.x = x2;
        best.value = f2;
    }
    return best;
}

Polynomial::Polynomial(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
    while (coefficients_.size() > 1 && coefficients_.back() == 0.0) {
        coefficients_.pop_back();
    }
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (coefficients_.size() <= 1) {
        return Polynomial({0.0});
    }
    std::vector<double> d(coefficients_.size() - 1);
    for (std::size_t i = 1; i < coefficients_.size(); ++i) {
        d[i - 1] = static_cast<double>(i) * coefficients_[i];
    }
    return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
    std::vector<double> a(coefficients_.size() + 1, 0.0);
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        a[i + 1] = coefficients_[i] / static_cast<double>(i + 1);
    }
    return Polynomial(std::move(a));
}

HermiteValue quintic_hermite(const Vector& p0, const Vector& d0, const Vector& a0, const Vector& p1,
                             const Vector& d1, const Vector& a1, double h, double t) {
    const double u = t / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double u4 = u3 * u;
    const double u5 = u4 * u;

    const double h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    const double h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    const double h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
    const double h3 = 0.5 * (u3 - 2.0 * u4 + u5);
    const double h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    const double h5 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;

    const double dh0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
    const double dh1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    const double dh2 = 0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4);
    const double dh3 = 0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4);
    const double dh4 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
    const double dh5 = -dh0;

    const double ddh0 = -60.0 * u + 180.0 * u2 - 120.0 * u3;
    const double ddh1 = -36.0 * u + 96.0 * u2 - 60.0 * u3;
    const double ddh2 = 0.5 * (2.0 - 18.0 * u + 36.0 * u2 - 20.0 * u3);
    const double ddh3 = 0.5 * (6.0 * u - 24.0 * u2 + 20.0 * u3);
    const double ddh4 = -24.0 * u + 84.0 * u2 - 60.0 * u3;
    const double ddh5 = -ddh0;

    const double hh = h * h;
    HermiteValue r;
    r.value = h0 * p0 + h1 * h * d0 + h2 * hh * a0 + h3 * hh * a1 + h4 * h * d1 + h5 * p1;
    r.first = (dh0 * p0 + dh1 * h * d0 + dh2 * hh * a0 + dh3 * hh * a1 + dh4 * h * d1 + dh5 * p1) / h;
    r.second = (ddh0 * p0 + ddh1 * h * d0 + ddh2 * hh * a0 + ddh3 * hh * a1 + ddh4 * h * d1 + ddh5 * p1) / hh;
    return r;
}

}  // namespace nlmodes
