#include "gibbsinv/radial_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gibbsinv/errors.hpp"
#include "gibbsinv/packing.hpp"

namespace gibbsinv {

std::size_t bin_count(double delta, double r_max) {
    if (!(delta > 0.0) || !(r_max >= 1.0)) {
        throw Error("radial grid needs delta > 0 and r_max >= 1");
    }
    const double n = std::ceil((r_max - 1.0) / delta - 1e-9);
    return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

RadialFunction::RadialFunction(int dim, double delta, double r_max, std::vector<double> values,
                               double core_value)
    : dim_(dim), delta_(delta), r_max_(r_max), values_(std::move(values)), core_value_(core_value) {
    if (dim < 1 || dim > 3) throw Error("dimension must be 1, 2 or 3");
    if (values_.size() != bin_count(delta, r_max)) {
        std::ostringstream msg;
        msg << "expected " << bin_count(delta, r_max) << " samples, got " << values_.size();
        throw GridMismatch(msg.str());
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error("radial samples must be finite");
    }
    if (std::isnan(core_value)) throw Error("core value is NaN");
}

RadialFunction RadialFunction::zeros(int dim, double delta, double r_max, double core_value) {
    return RadialFunction(dim, delta, r_max, std::vector<double>(bin_count(delta, r_max), 0.0),
                          core_value);
}

double RadialFunction::bin_hi(std::size_t i) const {
    return std::min(r_max_, 1.0 + static_cast<double>(i + 1) * delta_);
}

std::vector<double> RadialFunction::bin_centers() const {
    std::vector<double> r(values_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = bin_center(i);
    return r;
}

double RadialFunction::at_radius(double s) const {
    if (s < 1.0) return core_value_;
    if (s > r_max_ || values_.empty()) return 0.0;
    auto i = static_cast<std::size_t>((s - 1.0) / delta_);
    if (i >= values_.size()) i = values_.size() - 1;
    return values_[i];
}

bool RadialFunction::same_grid(const RadialFunction& other) const noexcept {
    return dim_ == other.dim_ && delta_ == other.delta_ && r_max_ == other.r_max_ &&
           values_.size() == other.values_.size();
}

RadialFunction RadialFunction::with_values(std::vector<double> values) const {
    return RadialFunction(dim_, delta_, r_max_, std::move(values), core_value_);
}

RadialFunction RadialFunction::with_core(double core_value) const {
    return RadialFunction(dim_, delta_, r_max_, values_, core_value);
}

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double evaluate(const RadialFunction& f, const Point& x) {
    return f.at_radius(norm(std::span<const double>(x.data(), static_cast<std::size_t>(f.dim()))));
}

RadialFunction combine(double a, const RadialFunction& f, double b, const RadialFunction& g) {
    if (!f.same_grid(g)) throw GridMismatch("radial functions live on different grids");
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * f[i] + b * g[i];
    return RadialFunction(f.dim(), f.delta(), f.r_max(), std::move(v),
                          a * f.core_value() + b * g.core_value());
}

RadialFunction g_to_phi(const RadialFunction& g) {
    if (g.core_value() != -1.0) throw NonPhysical("hard-core g must equal -1 in the core", 0.0);
    std::vector<double> phi(g.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!(g[i] > -1.0)) {
            std::ostringstream msg;
            msg << "g <= -1 at r = " << g.bin_center(i);
            throw NonPhysical(msg.str(), g.bin_center(i));
        }
        phi[i] = -std::log1p(g[i]);
    }
    return RadialFunction(g.dim(), g.delta(), g.r_max(), std::move(phi), kInf);
}

RadialFunction phi_to_g(const RadialFunction& phi) {
    std::vector<double> g(phi.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::expm1(-phi[i]);
    const double core = std::isinf(phi.core_value()) && phi.core_value() > 0
                            ? -1.0
                            : std::expm1(-phi.core_value());
    return RadialFunction(phi.dim(), phi.delta(), phi.r_max(), std::move(g), core);
}

HardCorePotential::HardCorePotential(RadialFunction g) : g_(std::move(g)) {
    if (g_.core_value() != -1.0) throw NonPhysical("hard-core g must equal -1 in the core", 0.0);
    double min_value = 0.0;
    for (std::size_t i = 0; i < g_.size(); ++i) {
        if (!(g_[i] > -1.0)) {
            std::ostringstream msg;
            msg << "g <= -1 at r = " << g_.bin_center(i);
            throw NonPhysical(msg.str(), g_.bin_center(i));
        }
        min_value = std::min(min_value, g_[i]);
    }
    a_ = -min_value;
}

HardCorePotential HardCorePotential::from_phi(const RadialFunction& phi) {
    return HardCorePotential(phi_to_g(phi));
}

HardCorePotential HardCorePotential::pure(int dim, double delta, double r_max) {
    return HardCorePotential(RadialFunction::zeros(dim, delta, r_max, -1.0));
}

ClusterTargets correlation_to_cluster(double rho1, const RadialFunction& rho2, double r) {
    std::vector<double> w(rho2.size());
    const double rho1_sq = rho1 * rho1;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rho2[i] - rho1_sq;
    return ClusterTargets{rho1, rho2.with_values(std::move(w)).with_core(rho2.core_value() - rho1_sq),
                          r};
}

CorrelationPair cluster_to_correlation(const ClusterTargets& targets) {
    const double w1_sq = targets.omega1 * targets.omega1;
    std::vector<double> rho2(targets.omega2.size());
    for (std::size_t i = 0; i < rho2.size(); ++i) rho2[i] = targets.omega2[i] + w1_sq;
    return CorrelationPair{targets.omega1, targets.omega2.with_values(std::move(rho2))
                                               .with_core(targets.omega2.core_value() + w1_sq)};
}

AdmissibilityReport check_admissible(const ClusterTargets& targets, double r) {
    AdmissibilityReport rep;
    const double w1 = targets.omega1;
    const double w1_sq = w1 * w1;
    rep.bound = r * w1_sq;

    if (!(r > 0.0 && r < 1.0)) rep.reasons.push_back("r must lie in (0,1)");
    if (!(w1 > 0.0) || !std::isfinite(w1)) {
        rep.reasons.push_back("omega1 must be positive");
    }
    // rho2 = 0 in the core means omega2 = -omega1^2 there; allow a few ulps
    // for values that went through a rho <-> omega round trip.
    const double core = targets.omega2.core_value();
    if (!(std::abs(core + w1_sq) <= 4.0 * std::numeric_limits<double>::epsilon() * w1_sq)) {
        std::ostringstream msg;
        msg << "core mismatch: omega2 core value " << core << " != -omega1^2 = " << -w1_sq;
        rep.reasons.push_back(msg.str());
    }
    try {
        rep.bracket = packing_norm(targets.omega2);
    } catch (const std::exception& e) {
        rep.reasons.push_back(std::string("norm evaluation failed: ") + e.what());
        rep.pass = false;
        return rep;
    }
    if (!(rep.bracket.upper <= rep.bound)) {
        std::ostringstream msg;
        msg << "norm: packing-norm upper bracket " << rep.bracket.upper << " exceeds r*omega1^2 = "
            << rep.bound;
        rep.reasons.push_back(msg.str());
    }
    rep.pass = rep.reasons.empty();
    return rep;
}

}  // namespace gibbsinv
