#pragma once

#include <cmath>
#include <stdexcept>

namespace gaborshear {

/// Smoothness profile nu: nu(x)=0 for x<=0, nu(x)=1 for x>=1,
/// nu(x)+nu(1-x)=1 on [0,1].
enum class Profile { Poly4, Step };

/// Poly4 is the C^3 polynomial x^4(35-84x+70x^2-20x^3); Step is the
/// midpoint step used for Shannon-type limits.
inline double eval_nu(Profile p, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (p == Profile::Step) return x < 0.5 ? 0.0 : (x > 0.5 ? 1.0 : 0.5);
    // evaluate on [0, 1/2] and reflect, which keeps nu(x) + nu(1-x) = 1
    // exact in floating point
    if (x > 0.5) return 1.0 - eval_nu(p, 1.0 - x);
    return x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

} // namespace gaborshear
