#pragma once

#include <string>
#include <vector>

#include "tds/types.hpp"

namespace tds {

/// Polynomial in s, coefficients in descending powers: {c_n, ..., c_1, c_0}.
using Poly = std::vector<double>;

Poly poly_trim(const Poly& p);                 // drop exact leading zeros
Poly poly_mul(const Poly& a, const Poly& b);   // convolution
Complex poly_eval(const Poly& p, Complex s);

/// Linear time-invariant model with constant internal delays.
///
/// The rational core
///     dx/dt = A x + B1 u + B2 w
///     y     = C1 x + D11 u + D12 w
///     z     = C2 x + D21 u + D22 w
/// is closed by the pure-delay channels w(t) = z(t - tau), applied signal by
/// signal: channel k delays delay_widths[k] consecutive signals by tau[k].
/// With no channels this degenerates to an ordinary state-space model.
struct GltiModel {
    Mat a;           // n x n
    Mat b1, b2;      // n x m, n x q
    Mat c1, d11, d12;  // p x n, p x m, p x q
    Mat c2, d21, d22;  // q x n, q x m, q x q
    Vec tau;                        // one entry per channel, seconds, >= 0
    std::vector<int> delay_widths;  // signals per channel, sum == q
    std::vector<std::string> input_names;   // empty or size m
    std::vector<std::string> output_names;  // empty or size p

    int order() const { return static_cast<int>(a.rows()); }
    int num_inputs() const { return static_cast<int>(b1.cols()); }
    int num_outputs() const { return static_cast<int>(c1.rows()); }
    int num_channels() const { return static_cast<int>(tau.size()); }
    int delay_signal_count() const { return static_cast<int>(b2.cols()); }
    bool has_delays() const { return num_channels() > 0; }
    bool is_siso() const { return num_inputs() == 1 && num_outputs() == 1; }
};

/// Throws ModelError unless all block dimensions, widths and delays are
/// consistent (tau >= 0, delay_widths positive, sum widths == q, names sized).
void validate(const GltiModel& m);

/// Delay-free state-space model.
GltiModel make_ss(const Mat& a, const Mat& b, const Mat& c, const Mat& d);

/// Pure static gain y = K u.
GltiModel static_gain(const Mat& k);
GltiModel static_gain(double k);

/// p x m identity gain helper (square).
GltiModel identity_gain(int size);

/// Matrix of rational transfer functions with optional per-channel, per-input
/// and per-output dead times.  Channel (i,j) is num[i][j]/den[i][j] delayed by
/// io_delay(i,j) + input_delay(j) + output_delay(i).
struct TransferFunction {
    std::vector<std::vector<Poly>> num;  // p x m
    std::vector<std::vector<Poly>> den;  // p x m
    Mat io_delay;                        // p x m
    Vec input_delay;                     // m
    Vec output_delay;                    // p
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;

    int num_outputs() const { return static_cast<int>(num.size()); }
    int num_inputs() const { return num.empty() ? 0 : static_cast<int>(num[0].size()); }
};

TransferFunction make_tf(Poly num, Poly den, double io_delay = 0.0);
TransferFunction make_tf(std::vector<std::vector<Poly>> num,
                         std::vector<std::vector<Poly>> den,
                         Mat io_delay = Mat(),
                         Vec input_delay = Vec(),
                         Vec output_delay = Vec());

/// Realizes the transfer matrix in state space: one controllable-canonical
/// block per input column (common denominator = product of that column's
/// non-constant channel denominators), dead times lifted into width-1 delay
/// channels.  The result is normalized.  Throws ModelError on improper or
/// zero-denominator channels.
GltiModel to_glti(const TransferFunction& tf);

/// One retarded term of dx/dt = A0 x + B0 u + sum_j [A_j x + B_j u](t - theta_j),
/// with matching output terms y = C0 x + D0 u + sum_j [C_j x + D_j u](t - theta_j).
struct DelayDdeTerm {
    double theta = 0.0;
    Mat a, b, c, d;  // n x n, n x m, p x n, p x m
};

struct DelayDdeForm {
    Mat a0, b0, c0, d0;
    std::vector<DelayDdeTerm> terms;
};

/// Builds the delay model from delay-differential form.  Each distinct theta
/// becomes one channel; only the signals of [x; u] that the term actually
/// reads (nonzero columns of [A_j B_j; C_j D_j]) are routed through it.
GltiModel from_delay_dde(const DelayDdeForm& form);

/// Canonical form: zero delays folded into the rational part, bitwise-equal
/// delays merged into one channel, channels sorted ascending.  Idempotent and
/// response-preserving.  Throws NumericalError if a zero-delay algebraic loop
/// is singular.
GltiModel normalize(const GltiModel& m);

/// Lower LFT closure M11 + M12 Theta (I - M22 Theta)^{-1} M21.
/// Throws NumericalError if I - M22 Theta is singular.
CMat lft_eval(const CMat& m11, const CMat& m12, const CMat& m21, const CMat& m22,
              const CMat& theta);

/// Diagonal of the delay operator at a complex frequency: exp(-tau_k s)
/// repeated delay_widths[k] times.
CVec delay_diag(const GltiModel& m, Complex s);

}  // namespace tds
