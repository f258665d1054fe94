#pragma once

#include <string>
#include <vector>

#include "tds/model.hpp"

namespace tds {

/// Block-diagonal combination: inputs, outputs, states and delay channels of
/// a and b side by side, no coupling.  Signal names concatenate when both
/// operands carry them.
GltiModel append(const GltiModel& a, const GltiModel& b);

/// Generic wiring closure over a model's inputs and outputs:
///     u = K y + E u_ext,   y_ext = F y + Fu u_ext.
/// Any loop this creates is resolved exactly through I - K D11; a singular
/// loop throws NumericalError.  New external dimensions come from E/F.
GltiModel close_interconnection(const GltiModel& m, const Mat& k, const Mat& e, const Mat& f,
                                const Mat& fu = Mat());

/// Cascade: the response of series(g1, g2) is G2(s) G1(s) (g1 feeds g2).
GltiModel series(const GltiModel& g1, const GltiModel& g2);

/// Shared input, summed outputs: G1(s) + G2(s).
GltiModel parallel(const GltiModel& g1, const GltiModel& g2);

/// Loop g with h in the return path: (I - sign G H)^{-1} G, sign -1 (default)
/// is negative feedback.
GltiModel feedback(const GltiModel& g, const GltiModel& h, int sign = -1);

/// Signed adder in a named-signal diagram: output = sum signs[i] * inputs[i].
struct SumJunction {
    std::vector<int> signs;
    std::vector<std::string> inputs;
    std::string output;
};

/// Builds a diagram from named blocks and adders.  Every block input is fed
/// by the like-named signal (a block output, an adder output, or one of the
/// external inputs `from`); `to` selects the external outputs.  All blocks
/// must carry signal names.
GltiModel connect(const std::vector<GltiModel>& blocks, const std::vector<SumJunction>& sums,
                  const std::vector<std::string>& from, const std::vector<std::string>& to);

}  // namespace tds
