#ifndef NELSONIUM_ERRORS_HPP
#define NELSONIUM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nelsonium {

// Conservation breaches, NaN states, drift blow-ups. CLI exit code 3.
struct numerical_breach : std::runtime_error {
    explicit numerical_breach(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configs, schema violations, unusable inputs. CLI exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nelsonium

#endif
