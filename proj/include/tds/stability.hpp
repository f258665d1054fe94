#pragma once

#include "tds/model.hpp"

namespace tds {

/// Diagonal [order/order] rational approximant of exp(-tau s).
struct PadeApprox {
    double tau = 0.0;
    int order = 0;
    Poly num, den;  // descending coefficients, both of degree `order`
};

PadeApprox pade_delay(double tau, int order);

/// Replaces every delay channel by its Pade approximant, yielding a delay-free
/// model with order * (delay signal count) extra states.
GltiModel pade_model(const GltiModel& m, int order);

/// Rightmost characteristic roots of the free dynamics
///     dx/dt = A x(t) + sum_k B2_k C2_k x(t - tau_k).
struct SpectrumResult {
    CVec roots;            // descending real part
    int n_cheb = 0;        // collocation nodes at the accepted level (0: delay-free, exact)
    bool converged = false;
    double max_residual = 0.0;  // largest Newton-step magnitude over the kept roots
};

/// Chebyshev collocation of the solution-operator generator on [-tau_max, 0],
/// node count doubled from 16 until the rightmost real part moves less than
/// tol, every candidate polished by Newton's method on det(s I - A -
/// sum_k B2_k C2_k e^(-tau_k s)).  Rejects models with delayed feedthrough
/// between delay channels (neutral type).
SpectrumResult rightmost_roots(const GltiModel& m, int k = 10, double tol = 1e-6);

enum class Stability { kStable, kUnstable, kUndecided };

/// Spectral verdict: sign of the rightmost root's real part, kUndecided when
/// the discretization did not converge or the root sits within 1e-8 of the
/// imaginary axis.
Stability is_stable(const GltiModel& m);

}  // namespace tds
