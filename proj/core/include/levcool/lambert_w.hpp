#pragma once

namespace levcool {

/// Lower real branch W_{-1}(x) of the Lambert W function.
///
/// Defined on [-1/e, 0); returns w <= -1 with w e^w = x to about 1e-14
/// relative residual. Throws InvalidArgument outside the domain.
double lambert_w_m1(double x);

}  // namespace levcool
