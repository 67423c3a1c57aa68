#pragma once

#include <stdexcept>
#include <string>

namespace ofdb {

// Base for every domain error raised by the library. The CLI maps these to
// exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

// A chaos-game orbit left the bounded region; the system is not contractive.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class EmptyCloudError : public Error {
public:
    using Error::Error;
};

// Bounding box has zero extent on every axis, so no isotropic scale exists.
class DegenerateExtentError : public Error {
public:
    using Error::Error;
};

class SearchExhaustedError : public Error {
public:
    SearchExhaustedError(const std::string& what, std::size_t accepted, std::size_t attempts)
        : Error(what), accepted_(accepted), attempts_(attempts) {}

    std::size_t accepted() const noexcept { return accepted_; }
    std::size_t attempts() const noexcept { return attempts_; }
    double acceptance_rate() const noexcept {
        return attempts_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(attempts_);
    }

private:
    std::size_t accepted_;
    std::size_t attempts_;
};

class InsufficientCategoriesError : public Error {
public:
    using Error::Error;
};

class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace ofdb
