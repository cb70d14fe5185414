#pragma once

#include <stdexcept>
#include <string>

namespace fwm {

// Config file / key errors. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Inconsistent calibration targets (e.g. negative inferred Raman mean). Exit code 3.
class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

// Root finding / fitting failures. Exit code 4.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fwm
