#ifndef COA_ERRORS_HPP
#define COA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace coa {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Scenario/catalog problems: dangling references, duplicate ids, bad values.
struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Detokenize of an out-of-range token id.
struct UnknownToken : Error {
    explicit UnknownToken(const std::string& msg) : Error(msg) {}
};

// An action demands a joint role the embodiment does not provide.
struct MissingRole : Error {
    explicit MissingRole(const std::string& msg) : Error(msg) {}
};

struct EmptyRegions : Error {
    explicit EmptyRegions(const std::string& msg) : Error(msg) {}
};

// Exhaustive decode candidate count exceeded the safety bound.
struct CandidateExplosion : Error {
    explicit CandidateExplosion(const std::string& msg) : Error(msg) {}
};

struct NetworkError : Error {
    explicit NetworkError(const std::string& msg) : Error(msg) {}
};

struct CacheMiss : Error {
    explicit CacheMiss(const std::string& msg) : Error(msg) {}
};

struct ParseFailedAfterRepair : Error {
    explicit ParseFailedAfterRepair(const std::string& msg) : Error(msg) {}
};

}  // namespace coa

#endif
