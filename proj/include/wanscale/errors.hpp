#pragma once

#include <stdexcept>
#include <string>

namespace wanscale {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A configuration or input document failed validation. `field()` is a dotted
// path to the offending key, e.g. "hpa.tolerance" or "events[0].name".
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Rejected underlay API call (unknown id, off-ladder target, ...).
class UnderlayError : public Error {
public:
    using Error::Error;
};

}  // namespace wanscale
