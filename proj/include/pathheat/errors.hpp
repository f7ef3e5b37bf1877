#pragma once

#include <stdexcept>
#include <string>

namespace pathheat {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Point or vector not on the manifold it was handed to.
class DomainError : public Error {
public:
    using Error::Error;
};

class CutLocusError : public Error {
public:
    using Error::Error;
};

class DeltaViolation : public Error {
public:
    DeltaViolation(const std::string& what, int interval)
        : Error(what), interval_(interval) {}
    int interval() const { return interval_; }

private:
    int interval_;
};

class AdmissibilityError : public Error {
public:
    using Error::Error;
};

class UnsupportedFeature : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Sampler diagnostics out of range (acceptance rate, ESS, rejection rate).
class SamplerError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace pathheat
