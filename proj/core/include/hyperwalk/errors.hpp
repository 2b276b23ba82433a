#pragma once

#include <stdexcept>
#include <string>

namespace hyperwalk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: bad group spec, bad word, bad measure, bad config.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A memory or enumeration budget was hit before the computation finished.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// Green series requested on a recurrent group.
class RecurrentGroup : public Error {
public:
    using Error::Error;
};

// The working ball does not contain everything the query needs.
class IncompleteBall : public Error {
public:
    using Error::Error;
};

} // namespace hyperwalk
