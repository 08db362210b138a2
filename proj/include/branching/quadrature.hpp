#pragma once

#include <vector>

namespace branching {

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule, cached per n.
const QuadratureRule& gauss_legendre(int n);

// Integral of f over [a, b] with the n-point rule.
template <class F>
double integrate(F&& f, double a, double b, int n = 24) {
    const QuadratureRule& q = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
        sum += q.weights[i] * f(mid + half * q.nodes[i]);
    return sum * half;
}

// exp(x^2) * erfc(x), stable for large x.
double erfcx(double x);

}  // namespace branching
