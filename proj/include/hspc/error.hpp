#pragma once

#include <stdexcept>
#include <string>

namespace hspc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class EmptyCandidatesError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class EmptyNeighborhoodError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition (e.g. unsorted distances).
class ContractError : public Error {
public:
    using Error::Error;
};

class DisconnectedError : public Error {
public:
    DisconnectedError(const std::string& what, unsigned from, unsigned to)
        : Error(what), from_(from), to_(to) {}

    unsigned from() const noexcept { return from_; }
    unsigned to() const noexcept { return to_; }

private:
    unsigned from_;
    unsigned to_;
};

/// The index was built over a different dataset than the one it is queried with.
class StaleIndexError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or document.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Well-formed input whose values are unusable (NaN, label out of range, ...).
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hspc
