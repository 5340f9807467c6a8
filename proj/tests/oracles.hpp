#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "phasebench/field.hpp"
#include "phasebench/photon.hpp"

// Independent reference implementations shared by the unit tests and the
// acceptance binary.
namespace phasebench::oracle {

inline ComplexField random_field(GridShape shape, std::mt19937_64& gen, double scale)
{
    std::normal_distribution<double> n(0.0, scale);
    ComplexField f(shape);
    for (auto& v : f)
        v = {n(gen), n(gen)};
    return f;
}

inline double squared_norm(const ComplexField& f)
{
    double s = 0.0;
    for (const auto& v : f)
        s += std::norm(v);
    return s;
}

// Term-by-term evaluation of the cost, written without the library's helpers.
inline double brute_force_cost(const ComplexField& o, const ComplexField& r, const CountFrame& counts, double alpha,
                        int radius, double sigma, double floor = 0.0)
{
    const int w = static_cast<int>(o.width());
    const int h = static_cast<int>(o.height());
    double data = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
            const Complex rv = r(x, y);
            const Complex ov = o(x, y);
            const double model =
                std::norm(rv) + std::norm(ov) + (std::conj(rv) * ov).real() + (rv * std::conj(ov)).real();
            const double i = counts(x, y);
            const double beta = std::sqrt(std::max(i, floor));
            data += beta * beta * (i - model) * (i - model);
        }
    double psi = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int qy = y - radius; qy <= y + radius; ++qy)
                for (int qx = x - radius; qx <= x + radius; ++qx)
                {
                    if ((qx == x && qy == y) || qx < 0 || qy < 0 || qx >= w || qy >= h)
                        continue;
                    const double d2 = (qx - x) * (qx - x) + (qy - y) * (qy - y);
                    psi += std::exp(-d2 / (2 * sigma * sigma)) * std::norm(o(x, y) - o(qx, qy));
                }
    return data + alpha * psi;
}

// Central differences of f along Re and Im of every pixel, combined as the
// Wirtinger derivative d/dO* = (d/dRe + i d/dIm) / 2.
template <typename F>
ComplexField fd_gradient(const F& f, const ComplexField& o, double h)
{
    ComplexField g(o.shape());
    ComplexField x = o;
    for (std::size_t i = 0; i < o.size(); ++i)
    {
        const Complex v = o[i];
        x[i] = v + Complex(h, 0);
        const double fp = f(x);
        x[i] = v - Complex(h, 0);
        const double fm = f(x);
        x[i] = v + Complex(0, h);
        const double gp = f(x);
        x[i] = v - Complex(0, h);
        const double gm = f(x);
        x[i] = v;
        g[i] = Complex((fp - fm) / (2 * h), (gp - gm) / (2 * h)) / 2.0;
    }
    return g;
}

inline double relative_error(const ComplexField& a, const ComplexField& b)
{
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        diff += std::norm(a[i] - b[i]);
    return std::sqrt(diff / squared_norm(b));
}

struct Instance
{
    ComplexField o;
    ComplexField r;
    CountFrame counts;
};

inline Instance random_instance(unsigned seed)
{
    std::mt19937_64 gen(seed);
    const GridShape s(8, 8);
    Instance in{random_field(s, gen, 1.0), random_field(s, gen, 2.0), {}};
    const ComplexField truth = random_field(s, gen, 1.0);
    in.counts = sample_poisson_frame(interfere(in.r, truth), {seed, 0});
    return in;
}

} // namespace phasebench::oracle
