#ifndef FDE_TRANSFORM_HPP
#define FDE_TRANSFORM_HPP

// Changes of variables between the physical solution u(x, tau), the
// cylindrical solution w(rho, theta, tau) with rho = ln|x|, and the rescaled
// solution v(rho, theta, t) whose time axis is stretched to infinity.

#include <span>

#include "fde/geometry.hpp"

namespace fde {

struct PhysicalSample {
    double r = 1.0;
    double theta = 0.0;  ///< polar angle on S^{n-1}
    double t = 0.0;
    double value = 0.0;
};

struct CylindricalSample {
    double rho = 0.0;
    double theta = 0.0;
    double tau = 0.0;
    double value = 0.0;
};

struct RescaledSample {
    double rho = 0.0;
    double theta = 0.0;
    double t_rescaled = 0.0;
    double value = 0.0;
};

/// w = r^{2/(p-1)} u^{1/p}
double to_cylindrical(double u_value, double r, double p);

/// u = (r^{-2/(p-1)} w)^p
double from_cylindrical(double w_value, double r, double p);

/// t = T ln(T / (T - tau)), defined for 0 <= tau < T.
double rescale_time(double tau, double t_star);

/// tau = T (1 - exp(-t / T)), defined for t >= 0.
double unrescale_time(double t, double t_star);

/// (T / (T - tau))^{1/(p-1)}
double rescale_factor(double tau, double t_star, double p);

/// v = (T / (T - tau))^{1/(p-1)} w, pointwise.
Field rescale_field(std::span<const double> w, double tau, double t_star, double p);

CylindricalSample to_cylindrical(const PhysicalSample& s, double p);
PhysicalSample from_cylindrical(const CylindricalSample& s, double p);
RescaledSample rescale(const CylindricalSample& s, double t_star, double p);
CylindricalSample unrescale(const RescaledSample& s, double t_star, double p);

}  // namespace fde

#endif  // FDE_TRANSFORM_HPP
