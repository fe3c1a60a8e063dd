#pragma once

#include <cmath>
#include <stdexcept>

namespace bcmd {

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
inline constexpr double kKronrodX[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
inline constexpr double kKronrodW[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679,  0.1903505780647854,  0.2044329400752989, 0.2094821410847278};
inline constexpr double kGaussW[4] = {0.1294849661688697, 0.2797053914892767,
                                      0.3818300505051189, 0.4179591836734694};

template <class F>
struct GkEstimate {
    double kronrod;
    double err;
};

template <class F>
GkEstimate<F> gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kKronrodW[7] * fc;
    double gauss = kGaussW[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kKronrodX[i];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kKronrodW[i] * fsum;
        if (i % 2 == 1) gauss += kGaussW[i / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    return {kron, std::abs(kron - gauss)};
}

template <class F>
double integrate_rec(const F& f, double a, double b, double tol, int depth, int max_depth) {
    const auto e = gk15(f, a, b);
    if (e.err <= tol || depth >= max_depth) {
        if (e.err > tol) {
            throw std::runtime_error("integrate_adaptive: quadrature failed to converge");
        }
        return e.kronrod;
    }
    const double c = 0.5 * (a + b);
    return integrate_rec(f, a, c, 0.5 * tol, depth + 1, max_depth) +
           integrate_rec(f, c, b, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace detail

/**
 * Adaptive Gauss-Kronrod (G7, K15) integration of f over [a, b] by interval
 * bisection. Converges to roughly rel_tol relative accuracy for smooth
 * integrands; throws if the error estimate cannot be met.
 */
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-10,
                          double abs_floor = 1e-300, int max_depth = 40) {
    const auto coarse = detail::gk15(f, a, b);
    const double scale = std::max(std::abs(coarse.kronrod), abs_floor);
    const double tol = std::max(rel_tol * scale, abs_floor);
    if (coarse.err <= tol) return coarse.kronrod;
    const double c = 0.5 * (a + b);
    return detail::integrate_rec(f, a, c, 0.5 * tol, 1, max_depth) +
           detail::integrate_rec(f, c, b, 0.5 * tol, 1, max_depth);
}

}  // namespace bcmd
