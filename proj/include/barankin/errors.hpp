#pragma once

#include <stdexcept>
#include <string>

namespace barankin {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class InvalidConstraint : public Error {
public:
    using Error::Error;
};

class UnsupportedModel : public Error {
public:
    using Error::Error;
};

class InvalidOffset : public Error {
public:
    using Error::Error;
};

// Raised when a supremum search has no usable candidate left.
class AllCandidatesInvalid : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace barankin
