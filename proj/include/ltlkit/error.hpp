#pragma once

#include <stdexcept>
#include <string>

namespace ltlkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (empty atom pool, bad name, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// An atom has no description in the domain context.
class GroundingError : public Error {
public:
    GroundingError(std::string atom)
        : Error("no description for atom '" + atom + "' in domain context"), atom_(std::move(atom))
    {
    }
    const std::string& atom() const noexcept { return atom_; }

private:
    std::string atom_;
};

/// Dataset ingestion failure (I/O, schema, or itl/ltl inconsistency).
class IngestError : public Error {
public:
    IngestError(std::size_t line, std::string id, const std::string& what)
        : Error(format(line, id, what)), line_(line), id_(std::move(id))
    {
    }
    std::size_t line() const noexcept { return line_; }
    const std::string& id() const noexcept { return id_; }

private:
    static std::string format(std::size_t line, const std::string& id, const std::string& what)
    {
        std::string s = "line " + std::to_string(line);
        if (!id.empty())
            s += " (id " + id + ")";
        return s + ": " + what;
    }
    std::size_t line_;
    std::string id_;
};

/// External candidate generator timed out or answered with something unusable.
class GeneratorError : public Error {
public:
    using Error::Error;
};

/// A bounded automaton search built more states than it was allowed.
class SearchLimitExceeded : public Error {
public:
    using Error::Error;
};

} // namespace ltlkit
