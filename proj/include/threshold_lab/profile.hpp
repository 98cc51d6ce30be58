#pragma once

#include <functional>
#include <string>
#include <vector>

#include "threshold_lab/errors.hpp"

namespace thlab {

enum class ProfileFamily {
    Constant,  // c
    Affine,    // a + b*x
    Gaussian,  // amp * exp(-(x-center)^2 / (2 width^2))
    Tanh,      // amp * tanh((x-center)/width)
    Sine,      // offset + amp * sin(wavenumber * x)
};

/// An initial-data profile with closed-form derivatives and exact extrema.
/// Affine profiles with slope != 0 report infinite inf/sup; the classifier
/// treats those as unbounded data.
class ProfileSpec {
public:
    static ProfileSpec constant(double c);
    static ProfileSpec affine(double a, double b);
    static ProfileSpec gaussian(double amp, double center, double width);
    static ProfileSpec tanh_profile(double amp, double center, double width);
    static ProfileSpec sine(double amp, double wavenumber, double offset);

    ProfileFamily family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    std::string family_name() const;

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;

    // Exact extrema over the whole line (attained or approached).
    double inf_value() const;
    double sup_value() const;
    double inf_d1() const;
    double sup_d1() const;
    double sup_abs_value() const;
    double sup_abs_d1() const;
    double sup_abs_d2() const;

    bool bounded() const;

    /// Interval outside which the profile is flat to machine precision
    /// (periodic families report one full period).
    void active_window(double& lo, double& hi) const;

private:
    ProfileSpec(ProfileFamily fam, std::vector<double> params);
    ProfileFamily family_;
    std::vector<double> params_;
};

struct ScanExtremum {
    double value = 0.0;
    double x = 0.0;
};

/// Minimum of fn over the union of the profiles' active windows; dense scan
/// with local ternary refinement. Used for combined quantities like
/// e0 = u0' + rho0 whose extrema have no per-family closed form.
ScanExtremum scan_minimum(const std::vector<const ProfileSpec*>& profiles,
                          const std::function<double(double)>& fn,
                          int samples = 8192);

/// min over x of u0'(x) + rho0(x); exact when one side is x-independent.
ScanExtremum min_e0(const ProfileSpec& rho0, const ProfileSpec& u0);
ScanExtremum max_e0(const ProfileSpec& rho0, const ProfileSpec& u0);

} // namespace thlab
