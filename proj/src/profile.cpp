#include "threshold_lab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// max over y of |sech^2(y) tanh(y)| = 2 sqrt(3) / 9, at tanh^2 = 1/3.
const double kSech2TanhMax = 2.0 * std::sqrt(3.0) / 9.0;

} // namespace

ProfileSpec::ProfileSpec(ProfileFamily fam, std::vector<double> params)
    : family_(fam), params_(std::move(params)) {
    for (double p : params_) {
        if (!std::isfinite(p)) throw InvalidData("profile parameter not finite");
    }
}

ProfileSpec ProfileSpec::constant(double c) {
    return ProfileSpec(ProfileFamily::Constant, {c});
}

ProfileSpec ProfileSpec::affine(double a, double b) {
    return ProfileSpec(ProfileFamily::Affine, {a, b});
}

ProfileSpec ProfileSpec::gaussian(double amp, double center, double width) {
    if (!(width > 0.0)) throw InvalidData("gaussian width must be > 0");
    return ProfileSpec(ProfileFamily::Gaussian, {amp, center, width});
}

ProfileSpec ProfileSpec::tanh_profile(double amp, double center, double width) {
    if (!(width > 0.0)) throw InvalidData("tanh width must be > 0");
    return ProfileSpec(ProfileFamily::Tanh, {amp, center, width});
}

ProfileSpec ProfileSpec::sine(double amp, double wavenumber, double offset) {
    if (wavenumber == 0.0) throw InvalidData("sine wavenumber must be nonzero");
    return ProfileSpec(ProfileFamily::Sine, {amp, wavenumber, offset});
}

std::string ProfileSpec::family_name() const {
    switch (family_) {
        case ProfileFamily::Constant: return "Constant";
        case ProfileFamily::Affine: return "Affine";
        case ProfileFamily::Gaussian: return "Gaussian";
        case ProfileFamily::Tanh: return "Tanh";
        case ProfileFamily::Sine: return "Sine";
    }
    return "?";
}

double ProfileSpec::value(double x) const {
    switch (family_) {
        case ProfileFamily::Constant: return params_[0];
        case ProfileFamily::Affine: return params_[0] + params_[1] * x;
        case ProfileFamily::Gaussian: {
            const double y = (x - params_[1]) / params_[2];
            return params_[0] * std::exp(-0.5 * y * y);
        }
        case ProfileFamily::Tanh:
            return params_[0] * std::tanh((x - params_[1]) / params_[2]);
        case ProfileFamily::Sine:
            return params_[2] + params_[0] * std::sin(params_[1] * x);
    }
    return 0.0;
}

double ProfileSpec::d1(double x) const {
    switch (family_) {
        case ProfileFamily::Constant: return 0.0;
        case ProfileFamily::Affine: return params_[1];
        case ProfileFamily::Gaussian: {
            const double w = params_[2];
            const double y = (x - params_[1]) / w;
            return -params_[0] * y / w * std::exp(-0.5 * y * y);
        }
        case ProfileFamily::Tanh: {
            const double w = params_[2];
            const double s = 1.0 / std::cosh((x - params_[1]) / w);
            return params_[0] / w * s * s;
        }
        case ProfileFamily::Sine:
            return params_[0] * params_[1] * std::cos(params_[1] * x);
    }
    return 0.0;
}

double ProfileSpec::d2(double x) const {
    switch (family_) {
        case ProfileFamily::Constant:
        case ProfileFamily::Affine:
            return 0.0;
        case ProfileFamily::Gaussian: {
            const double w = params_[2];
            const double y = (x - params_[1]) / w;
            return params_[0] / (w * w) * (y * y - 1.0) * std::exp(-0.5 * y * y);
        }
        case ProfileFamily::Tanh: {
            const double w = params_[2];
            const double y = (x - params_[1]) / w;
            const double s = 1.0 / std::cosh(y);
            return -2.0 * params_[0] / (w * w) * s * s * std::tanh(y);
        }
        case ProfileFamily::Sine: {
            const double k = params_[1];
            return -params_[0] * k * k * std::sin(k * x);
        }
    }
    return 0.0;
}

double ProfileSpec::inf_value() const {
    switch (family_) {
        case ProfileFamily::Constant: return params_[0];
        case ProfileFamily::Affine: return params_[1] == 0.0 ? params_[0] : -kInf;
        case ProfileFamily::Gaussian: return std::min(0.0, params_[0]);
        case ProfileFamily::Tanh: return -std::fabs(params_[0]);
        case ProfileFamily::Sine: return params_[2] - std::fabs(params_[0]);
    }
    return 0.0;
}

double ProfileSpec::sup_value() const {
    switch (family_) {
        case ProfileFamily::Constant: return params_[0];
        case ProfileFamily::Affine: return params_[1] == 0.0 ? params_[0] : kInf;
        case ProfileFamily::Gaussian: return std::max(0.0, params_[0]);
        case ProfileFamily::Tanh: return std::fabs(params_[0]);
        case ProfileFamily::Sine: return params_[2] + std::fabs(params_[0]);
    }
    return 0.0;
}

double ProfileSpec::inf_d1() const {
    switch (family_) {
        case ProfileFamily::Constant: return 0.0;
        case ProfileFamily::Affine: return params_[1];
        case ProfileFamily::Gaussian:
            return -std::fabs(params_[0]) / params_[2] * std::exp(-0.5);
        case ProfileFamily::Tanh:
            // amp/w * sech^2 has one sign; other bound is the limit 0.
            return std::min(0.0, params_[0] / params_[2]);
        case ProfileFamily::Sine:
            return -std::fabs(params_[0] * params_[1]);
    }
    return 0.0;
}

double ProfileSpec::sup_d1() const {
    switch (family_) {
        case ProfileFamily::Constant: return 0.0;
        case ProfileFamily::Affine: return params_[1];
        case ProfileFamily::Gaussian:
            return std::fabs(params_[0]) / params_[2] * std::exp(-0.5);
        case ProfileFamily::Tanh:
            return std::max(0.0, params_[0] / params_[2]);
        case ProfileFamily::Sine:
            return std::fabs(params_[0] * params_[1]);
    }
    return 0.0;
}

double ProfileSpec::sup_abs_value() const {
    return std::max(std::fabs(inf_value()), std::fabs(sup_value()));
}

double ProfileSpec::sup_abs_d1() const {
    return std::max(std::fabs(inf_d1()), std::fabs(sup_d1()));
}

double ProfileSpec::sup_abs_d2() const {
    switch (family_) {
        case ProfileFamily::Constant:
        case ProfileFamily::Affine:
            return 0.0;
        case ProfileFamily::Gaussian: {
            // |(y^2-1) e^{-y^2/2}| peaks at y = 0 with value 1.
            const double w = params_[2];
            return std::fabs(params_[0]) / (w * w);
        }
        case ProfileFamily::Tanh: {
            const double w = params_[2];
            return 2.0 * std::fabs(params_[0]) / (w * w) * kSech2TanhMax;
        }
        case ProfileFamily::Sine:
            return std::fabs(params_[0]) * params_[1] * params_[1];
    }
    return 0.0;
}

bool ProfileSpec::bounded() const {
    return std::isfinite(inf_value()) && std::isfinite(sup_value());
}

void ProfileSpec::active_window(double& lo, double& hi) const {
    switch (family_) {
        case ProfileFamily::Constant:
        case ProfileFamily::Affine:
            lo = -1.0; hi = 1.0;
            return;
        case ProfileFamily::Gaussian:
            lo = params_[1] - 12.0 * params_[2];
            hi = params_[1] + 12.0 * params_[2];
            return;
        case ProfileFamily::Tanh:
            lo = params_[1] - 25.0 * params_[2];
            hi = params_[1] + 25.0 * params_[2];
            return;
        case ProfileFamily::Sine: {
            const double period = 2.0 * M_PI / std::fabs(params_[1]);
            lo = -1.5 * period; hi = 1.5 * period;
            return;
        }
    }
}

ScanExtremum scan_minimum(const std::vector<const ProfileSpec*>& profiles,
                          const std::function<double(double)>& fn,
                          int samples) {
    double lo = kInf, hi = -kInf;
    for (const ProfileSpec* p : profiles) {
        double a, b;
        p->active_window(a, b);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    if (!(hi > lo)) { lo = -1.0; hi = 1.0; }

    const double dx = (hi - lo) / samples;
    ScanExtremum best{fn(lo), lo};
    for (int i = 1; i <= samples; ++i) {
        const double x = lo + i * dx;
        const double v = fn(x);
        if (v < best.value) best = {v, x};
    }

    // Ternary refinement inside the bracketing neighbours.
    double a = best.x - dx, b = best.x + dx;
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::fabs(best.x)); ++it) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (fn(m1) < fn(m2)) b = m2; else a = m1;
    }
    const double xr = 0.5 * (a + b);
    const double vr = fn(xr);
    if (vr < best.value) best = {vr, xr};
    return best;
}

ScanExtremum min_e0(const ProfileSpec& rho0, const ProfileSpec& u0) {
    ScanExtremum scan = scan_minimum(
        {&rho0, &u0}, [&](double x) { return u0.d1(x) + rho0.value(x); });
    // Exact value when one contribution is x-independent; the scan still
    // supplies the best finite witness location.
    if (u0.family() == ProfileFamily::Constant || u0.family() == ProfileFamily::Affine) {
        scan.value = std::min(scan.value, u0.d1(0.0) + rho0.inf_value());
    } else if (rho0.family() == ProfileFamily::Constant) {
        scan.value = std::min(scan.value, rho0.value(0.0) + u0.inf_d1());
    }
    return scan;
}

ScanExtremum max_e0(const ProfileSpec& rho0, const ProfileSpec& u0) {
    ScanExtremum m = scan_minimum(
        {&rho0, &u0}, [&](double x) { return -(u0.d1(x) + rho0.value(x)); });
    ScanExtremum scan{-m.value, m.x};
    if (u0.family() == ProfileFamily::Constant || u0.family() == ProfileFamily::Affine) {
        scan.value = std::max(scan.value, u0.d1(0.0) + rho0.sup_value());
    } else if (rho0.family() == ProfileFamily::Constant) {
        scan.value = std::max(scan.value, rho0.value(0.0) + u0.sup_d1());
    }
    return scan;
}

} // namespace thlab
