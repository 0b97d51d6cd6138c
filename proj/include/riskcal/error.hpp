#pragma once

#include <stdexcept>
#include <string>

namespace riskcal {

// Exit codes of the command-line tool are derived from these categories.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File missing, unreadable or unwritable.
class IoError : public Error {
public:
    using Error::Error;
};

// Input parsed but violates a schema rule or a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace riskcal
