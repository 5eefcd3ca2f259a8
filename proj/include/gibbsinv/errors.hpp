#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gibbsinv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A sample of g is <= -1, so the potential -ln(1+g) is undefined there.
class NonPhysical : public Error {
public:
    NonPhysical(const std::string& what, double radius)
        : Error(what), radius_(radius) {}
    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

class OrderTooLarge : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class QuadratureUnderResolved : public Error {
public:
    using Error::Error;
};

/// Activity outside the configured convergence guard.
class SmallnessGuard : public Error {
public:
    using Error::Error;
};

/// Targets rejected by the admissibility check; reasons name each failing test.
class Inadmissible : public Error {
public:
    Inadmissible(const std::string& what, std::vector<std::string> reasons)
        : Error(what), reasons_(std::move(reasons)) {}
    const std::vector<std::string>& reasons() const noexcept { return reasons_; }

private:
    std::vector<std::string> reasons_;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double last_distance, bool left_domain)
        : Error(what), last_distance_(last_distance), left_domain_(left_domain) {}
    double last_distance() const noexcept { return last_distance_; }
    bool left_domain() const noexcept { return left_domain_; }

private:
    double last_distance_;
    bool left_domain_;
};

}  // namespace gibbsinv
