#pragma once

// Reference computations that share no code with the library.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Continuum best constant sup |u|_p / |u'|_2 on (0, L) with u(0) = 0 and a
/// free end at L. The maximizer solves -w'' = w^{p-1}, w(0) = 0, w'(0) = 1
/// up to the first zero X of w'; rescaling (0, X) onto (0, L) gives
/// B1 = (L/X)^{1/p + 1/2} |w|_p / |w'|_2.
inline double shooting_B1(double p, double L = 1.0, double dx = 1e-5) {
    using State = std::array<double, 4>;  // w, w', int |w|^p, int w'^2
    auto rhs = [p](const State& s, State& d, double) {
        d[0] = s[1];
        d[1] = -std::pow(std::abs(s[0]), p - 2.0) * s[0];
        d[2] = std::pow(std::abs(s[0]), p);
        d[3] = s[1] * s[1];
    };
    boost::numeric::odeint::runge_kutta4<State> rk;
    State s{0.0, 1.0, 0.0, 0.0};
    double x = 0.0;
    for (;;) {
        State next = s;
        rk.do_step(rhs, next, x, dx);
        if (next[1] <= 0.0) {
            const double th = s[1] / (s[1] - next[1]);
            State hit;
            for (int i = 0; i < 4; ++i) hit[i] = s[i] + th * (next[i] - s[i]);
            const double X = x + th * dx;
            return std::pow(L / X, 1.0 / p + 0.5) * std::pow(hit[2], 1.0 / p) / std::sqrt(hit[3]);
        }
        s = next;
        x += dx;
    }
}

/// Nonlinear inverse iteration for the discrete B1 on a uniform P1 mesh of
/// N elements: u <- K^{-1} b(u), renormalized, where b_i = int |u|^{p-2}u phi_i.
/// Integrals use 4-point Gauss-Legendre per element.
inline double inverse_iteration_B1(double p, int N, double L = 1.0, int iterations = 20000,
                                   double tol = 1e-14) {
    const double h = L / N;
    const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    std::vector<double> u(N + 1);
    for (int i = 0; i <= N; ++i) u[i] = i * h / L;

    auto lp_pow = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (int e = 0; e < N; ++e)
            for (int q = 0; q < 4; ++q) {
                const double a = 0.5 * (1 - gx[q]), b = 0.5 * (1 + gx[q]);
                s += 0.5 * h * gw[q] * std::pow(std::abs(a * v[e] + b * v[e + 1]), p);
            }
        return s;
    };
    auto grad_sq = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (int e = 0; e < N; ++e) s += (v[e + 1] - v[e]) * (v[e + 1] - v[e]) / h;
        return s;
    };
    auto ratio = [&](const std::vector<double>& v) { return std::pow(lp_pow(v), 1.0 / p) / std::sqrt(grad_sq(v)); };

    double prev = ratio(u);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> b(N + 1, 0.0);
        for (int e = 0; e < N; ++e)
            for (int q = 0; q < 4; ++q) {
                const double a = 0.5 * (1 - gx[q]), c = 0.5 * (1 + gx[q]);
                const double v = a * u[e] + c * u[e + 1];
                const double f = std::pow(std::abs(v), p - 2.0) * v * 0.5 * h * gw[q];
                b[e] += f * a;
                b[e + 1] += f * c;
            }
        // Stiffness on nodes 1..N: diag 2/h (1/h at N), off-diagonal -1/h.
        std::vector<double> diag(N + 1, 2.0 / h), rhs(b);
        diag[N] = 1.0 / h;
        const double off = -1.0 / h;
        for (int i = 2; i <= N; ++i) {
            const double w = off / diag[i - 1];
            diag[i] -= w * off;
            rhs[i] -= w * rhs[i - 1];
        }
        std::vector<double> x(N + 1, 0.0);
        x[N] = rhs[N] / diag[N];
        for (int i = N - 1; i >= 1; --i) x[i] = (rhs[i] - off * x[i + 1]) / diag[i];
        const double s = 1.0 / std::sqrt(grad_sq(x));
        for (auto& v : x) v *= s;
        u = x;
        const double r = ratio(u);
        if (std::abs(r - prev) <= tol * r) return r;
        prev = r;
    }
    return prev;
}

/// Eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence bisection.
inline std::vector<double> tridiagonal_eigenvalues(const std::vector<double>& d, const std::vector<double>& e) {
    const std::size_t n = d.size();
    auto count_below = [&](double x) {
        int c = 0;
        double q = d[0] - x;
        if (q < 0) ++c;
        for (std::size_t i = 1; i < n; ++i) {
            const double denom = q == 0.0 ? 1e-300 : q;
            q = d[i] - x - e[i - 1] * e[i - 1] / denom;
            if (q < 0) ++c;
        }
        return c;
    };
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k) {
        double a = lo, b = hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            if (count_below(mid) > static_cast<int>(k))
                b = mid;
            else
                a = mid;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace oracle
